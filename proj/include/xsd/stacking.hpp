#pragma once

#include "xsd/core_data.hpp"
#include "xsd/covariate_shift.hpp"
#include "xsd/glm.hpp"

#include <filesystem>
#include <map>
#include <optional>

namespace xsd {

/// A first-level model trained on one subject minus one fold.
struct FoldModel {
  int fold = 0;
  LinearModel model;
  std::vector<std::size_t> trained_on;  // trial indices within the subject
};

/// One full model and k out-of-fold models per training subject.
struct FirstLevelBank {
  int k = 6;
  std::uint64_t seed = 0;
  std::map<SubjectId, LinearModel> models;
  std::map<SubjectId, std::vector<FoldModel>> oof_models;
  std::map<SubjectId, std::vector<int>> fold_assignment;

  std::vector<SubjectId> subject_ids() const;
  std::size_t dim() const;
};

/// Which model produced a second-level cell. fold < 0 means the full model.
struct CellSource {
  SubjectId subject = 0;
  int fold = -1;

  bool full_model() const { return fold < 0; }
  bool operator==(const CellSource&) const = default;
};

/// Trials re-expressed as the vector of first-level probabilities; columns
/// follow ascending subject id.
struct SecondLevelDataset {
  Matrix features;
  Labels labels;                       // empty for test-mode featurization
  std::vector<SubjectId> row_subject;  // train mode only
  std::vector<std::size_t> row_trial;  // train mode only: index within the subject
  std::vector<SubjectId> columns;
  std::vector<CellSource> provenance;  // row-major, rows x columns
  std::optional<ImportanceWeights> weights;

  const CellSource& source(std::size_t row, std::size_t col) const {
    return provenance[row * columns.size() + col];
  }
};

struct StackingOptions {
  int k = 6;
  Regularization first_level;
  Regularization combiner;
  FitOptions solver;
  ShiftOptions shift;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StackedModel {
  FirstLevelBank bank;
  LinearModel combiner;
  bool used_weights = false;
  std::optional<ImportanceWeights> weights;
};

FirstLevelBank fit_first_level(const MultiSubjectDataset& train, int k, std::uint64_t seed,
                               const Regularization& reg = {}, const FitOptions& solver = {});

/// Train mode: the own-subject column of each trial comes from the fold model
/// that excluded it; all other columns come from full models.
SecondLevelDataset build_second_level_train(const FirstLevelBank& bank,
                                            const MultiSubjectDataset& trials);

/// Test mode: every column comes from the full model of that subject.
SecondLevelDataset build_second_level_test(const FirstLevelBank& bank, const Matrix& features);

/// Stacked generalization ("SG"), no importance weighting.
StackedModel fit_stacked(const MultiSubjectDataset& train, const StackingOptions& opts);

/// Stacked generalization with covariate-shift weights estimated from the
/// unlabeled target features ("SG+CS").
StackedModel fit_stacked(const MultiSubjectDataset& train, const Matrix& target_features,
                         const StackingOptions& opts);

/// Fits the combiner on an existing bank; `target_features` may be null.
StackedModel fit_stacked(FirstLevelBank bank, const MultiSubjectDataset& train,
                         const Matrix* target_features, const StackingOptions& opts);

Vector predict_stacked(const StackedModel& model, const Matrix& features);

void save_stacked(const StackedModel& model, const std::filesystem::path& dir);
StackedModel load_stacked(const std::filesystem::path& dir);

}  // namespace xsd
