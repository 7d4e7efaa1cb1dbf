#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace xsd {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;
using SubjectId = int;
using FoldIndices = std::vector<std::vector<std::size_t>>;

/// Raised for violated preconditions and malformed inputs anywhere in the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trial {
  Vector features;
  int label = 0;
  SubjectId subject_id = 0;
};

/// All trials recorded from one subject. Stored as a dense n x d block so the
/// solver can consume it without copying; `trial(i)` gives the per-trial view.
class SubjectDataset {
 public:
  SubjectDataset(SubjectId subject_id, Matrix features, Labels labels);
  static SubjectDataset from_trials(SubjectId subject_id, std::span<const Trial> trials);

  SubjectId subject_id() const { return subject_id_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }
  const Matrix& features() const { return features_; }
  const Labels& labels() const { return labels_; }
  std::size_t count(int label) const;
  Trial trial(std::size_t i) const;

  /// Same subject, rows restricted to `rows` (in the given order).
  SubjectDataset subset(std::span<const std::size_t> rows) const;
  /// Same features, replaced labels (used by the permutation harness).
  SubjectDataset with_labels(Labels labels) const;

 private:
  SubjectId subject_id_;
  Matrix features_;
  Labels labels_;
};

/// Subjects sharing one feature space, kept in ascending subject_id order.
class MultiSubjectDataset {
 public:
  explicit MultiSubjectDataset(std::vector<SubjectDataset> subjects);

  std::size_t size() const { return subjects_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t total_trials() const;
  const std::vector<SubjectDataset>& subjects() const { return subjects_; }
  std::vector<SubjectId> subject_ids() const;
  bool contains(SubjectId id) const;
  const SubjectDataset& subject(SubjectId id) const;

  MultiSubjectDataset without(SubjectId id) const;

 private:
  std::vector<SubjectDataset> subjects_;
  std::size_t dim_ = 0;
};

/// Flattened rows for the solver, with optional nonnegative row weights.
struct DesignMatrix {
  Matrix values;
  std::optional<Vector> weights;

  DesignMatrix() = default;
  explicit DesignMatrix(Matrix v, std::optional<Vector> w = std::nullopt);

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  void validate() const;
};

struct PooledData {
  DesignMatrix design;
  Labels labels;
  std::vector<SubjectId> row_subject;
};

/// Row-stacks every subject not in `exclude`, ascending subject order then trial order.
PooledData pool(const MultiSubjectDataset& dataset, const std::set<SubjectId>& exclude = {});

/// Stratified fold assignment over an arbitrary label vector. Each class is
/// shuffled (seeded) and dealt round-robin, continuing the dealer position
/// across classes so fold sizes differ by at most one.
FoldIndices stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

/// Stratified k-fold partition of one subject's trial indices.
FoldIndices split_kfold(const SubjectDataset& subject, int k, std::uint64_t seed);

/// Inverse view of a partition: fold index per element.
std::vector<int> fold_of(const FoldIndices& folds, std::size_t n);

/// Complement of fold `f` in [0, n), ascending.
std::vector<std::size_t> training_indices(const FoldIndices& folds, int f, std::size_t n);

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);
Labels select(std::span<const int> labels, std::span<const std::size_t> rows);

}  // namespace xsd
