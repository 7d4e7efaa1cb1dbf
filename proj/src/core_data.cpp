#include "xsd/core_data.hpp"

#include "xsd/random.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace xsd {

namespace {

void check_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw Error(what + ": features contain non-finite values");
}

void check_labels(std::span<const int> labels, const std::string& what) {
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(what + ": label " + std::to_string(y) + " not in {0,1}");
  }
}

}  // namespace

SubjectDataset::SubjectDataset(SubjectId subject_id, Matrix features, Labels labels)
    : subject_id_(subject_id), features_(std::move(features)), labels_(std::move(labels)) {
  const std::string what = "subject " + std::to_string(subject_id_);
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw Error(what + ": " + std::to_string(features_.rows()) + " feature rows but " +
                std::to_string(labels_.size()) + " labels");
  }
  if (features_.cols() == 0) throw Error(what + ": zero feature dimensionality");
  check_finite(features_, what);
  check_labels(labels_, what);
  if (count(0) == 0 || count(1) == 0) {
    throw Error(what + ": needs at least one trial of each class (class 0: " +
                std::to_string(count(0)) + ", class 1: " + std::to_string(count(1)) + ")");
  }
}

SubjectDataset SubjectDataset::from_trials(SubjectId subject_id, std::span<const Trial> trials) {
  if (trials.empty()) throw Error("subject " + std::to_string(subject_id) + ": no trials");
  const auto d = trials.front().features.size();
  Matrix x(static_cast<Eigen::Index>(trials.size()), d);
  Labels y(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (trials[i].features.size() != d) {
      throw Error("subject " + std::to_string(subject_id) + ": trial " + std::to_string(i) +
                  " has dimensionality " + std::to_string(trials[i].features.size()) +
                  ", expected " + std::to_string(d));
    }
    if (trials[i].subject_id != subject_id) {
      throw Error("trial " + std::to_string(i) + " carries subject " +
                  std::to_string(trials[i].subject_id) + ", expected " + std::to_string(subject_id));
    }
    x.row(static_cast<Eigen::Index>(i)) = trials[i].features.transpose();
    y[i] = trials[i].label;
  }
  return SubjectDataset(subject_id, std::move(x), std::move(y));
}

std::size_t SubjectDataset::count(int label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

Trial SubjectDataset::trial(std::size_t i) const {
  return Trial{features_.row(static_cast<Eigen::Index>(i)).transpose(), labels_.at(i), subject_id_};
}

SubjectDataset SubjectDataset::subset(std::span<const std::size_t> rows) const {
  return SubjectDataset(subject_id_, select_rows(features_, rows), select(labels_, rows));
}

SubjectDataset SubjectDataset::with_labels(Labels labels) const {
  return SubjectDataset(subject_id_, features_, std::move(labels));
}

MultiSubjectDataset::MultiSubjectDataset(std::vector<SubjectDataset> subjects)
    : subjects_(std::move(subjects)) {
  if (subjects_.empty()) throw Error("dataset has no subjects");
  std::stable_sort(subjects_.begin(), subjects_.end(),
                   [](const auto& a, const auto& b) { return a.subject_id() < b.subject_id(); });
  dim_ = subjects_.front().dim();
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    if (i > 0 && subjects_[i].subject_id() == subjects_[i - 1].subject_id()) {
      throw Error("duplicate subject id " + std::to_string(subjects_[i].subject_id()));
    }
    if (subjects_[i].dim() != dim_) {
      throw Error("subject " + std::to_string(subjects_[i].subject_id()) + " has dimensionality " +
                  std::to_string(subjects_[i].dim()) + ", expected " + std::to_string(dim_));
    }
  }
}

std::size_t MultiSubjectDataset::total_trials() const {
  std::size_t n = 0;
  for (const auto& s : subjects_) n += s.size();
  return n;
}

std::vector<SubjectId> MultiSubjectDataset::subject_ids() const {
  std::vector<SubjectId> ids;
  ids.reserve(subjects_.size());
  for (const auto& s : subjects_) ids.push_back(s.subject_id());
  return ids;
}

bool MultiSubjectDataset::contains(SubjectId id) const {
  return std::any_of(subjects_.begin(), subjects_.end(),
                     [id](const auto& s) { return s.subject_id() == id; });
}

const SubjectDataset& MultiSubjectDataset::subject(SubjectId id) const {
  for (const auto& s : subjects_) {
    if (s.subject_id() == id) return s;
  }
  throw Error("unknown subject " + std::to_string(id));
}

MultiSubjectDataset MultiSubjectDataset::without(SubjectId id) const {
  std::vector<SubjectDataset> rest;
  for (const auto& s : subjects_) {
    if (s.subject_id() != id) rest.push_back(s);
  }
  if (rest.empty()) throw Error("no training subjects");
  return MultiSubjectDataset(std::move(rest));
}

DesignMatrix::DesignMatrix(Matrix v, std::optional<Vector> w)
    : values(std::move(v)), weights(std::move(w)) {
  validate();
}

void DesignMatrix::validate() const {
  if (!weights) return;
  if (static_cast<std::size_t>(weights->size()) != rows()) {
    throw Error("weight vector has length " + std::to_string(weights->size()) + ", expected " +
                std::to_string(rows()));
  }
  if (!weights->allFinite() || (weights->array() < 0.0).any()) {
    throw Error("weights must be finite and nonnegative");
  }
  if (!(weights->array() > 0.0).any()) throw Error("at least one weight must be positive");
}

PooledData pool(const MultiSubjectDataset& dataset, const std::set<SubjectId>& exclude) {
  std::size_t n = 0;
  for (const auto& s : dataset.subjects()) {
    if (!exclude.contains(s.subject_id())) n += s.size();
  }
  if (n == 0) throw Error("no training subjects");
  PooledData out;
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dataset.dim()));
  out.labels.reserve(n);
  out.row_subject.reserve(n);
  Eigen::Index row = 0;
  for (const auto& s : dataset.subjects()) {
    if (exclude.contains(s.subject_id())) continue;
    x.middleRows(row, static_cast<Eigen::Index>(s.size())) = s.features();
    row += static_cast<Eigen::Index>(s.size());
    out.labels.insert(out.labels.end(), s.labels().begin(), s.labels().end());
    out.row_subject.insert(out.row_subject.end(), s.size(), s.subject_id());
  }
  out.design = DesignMatrix(std::move(x));
  return out;
}

FoldIndices stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw Error("k must be at least 2, got " + std::to_string(k));
  if (labels.size() < static_cast<std::size_t>(k)) {
    throw Error("cannot split " + std::to_string(labels.size()) + " items into " +
                std::to_string(k) + " folds");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  FoldIndices folds(static_cast<std::size_t>(k));
  std::size_t dealer = 0;
  for (auto& [label, idx] : by_class) {
    RandomStream rng(seed, static_cast<std::uint64_t>(label));
    shuffle(std::span<std::size_t>(idx), rng);
    for (auto i : idx) {
      folds[dealer].push_back(i);
      dealer = (dealer + 1) % folds.size();
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

FoldIndices split_kfold(const SubjectDataset& subject, int k, std::uint64_t seed) {
  for (int c : {0, 1}) {
    const auto n = subject.count(c);
    // Every training complement must keep both classes.
    if (n < 2) {
      throw Error("subject " + std::to_string(subject.subject_id()) + ": class " +
                  std::to_string(c) + " has only " + std::to_string(n) +
                  " trial(s); at least 2 are needed for " + std::to_string(k) + "-fold splitting");
    }
  }
  return stratified_folds(subject.labels(), k, seed);
}

std::vector<int> fold_of(const FoldIndices& folds, std::size_t n) {
  std::vector<int> out(n, -1);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (auto i : folds[f]) out.at(i) = static_cast<int>(f);
  }
  return out;
}

std::vector<std::size_t> training_indices(const FoldIndices& folds, int f, std::size_t n) {
  std::vector<bool> held(n, false);
  for (auto i : folds.at(static_cast<std::size_t>(f))) held.at(i) = true;
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!held[i]) out.push_back(i);
  }
  return out;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Labels select(std::span<const int> labels, std::span<const std::size_t> rows) {
  Labels out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(labels[r]);
  return out;
}

}  // namespace xsd
