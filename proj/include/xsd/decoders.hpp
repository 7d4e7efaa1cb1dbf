#pragma once

#include "xsd/core_data.hpp"
#include "xsd/covariate_shift.hpp"
#include "xsd/glm.hpp"
#include "xsd/stacking.hpp"

#include <filesystem>
#include <string_view>
#include <variant>

namespace xsd {

enum class Method { single, pool, sg, sg_cs };

inline constexpr Method kAllMethods[] = {Method::single, Method::pool, Method::sg, Method::sg_cs};

std::string_view to_string(Method m);
Method parse_method(std::string_view text);
std::vector<Method> parse_methods(std::string_view comma_list);

struct DecoderSpec {
  Method method = Method::pool;
  FitOptions solver;
  Regularization regularization;  // single, pool, and first-level stacking fits
  int k = 6;                      // within-subject folds for stacking
  Regularization combiner;
  ShiftOptions shift;
  std::uint64_t seed = 0;

  void validate() const;
  StackingOptions stacking() const;
};

struct DecoderMetadata {
  std::vector<SubjectId> subjects;
  double lambda = 0.0;  // of the single/pool model, or of the combiner
  std::uint64_t seed = 0;
  bool used_weights = false;
  double weight_min = 0.0;
  double weight_max = 0.0;
  double weight_raw_mean = 0.0;
};

struct FittedDecoder {
  Method method = Method::pool;
  std::variant<LinearModel, StackedModel> model;
  DecoderMetadata meta;
};

struct Prediction {
  Labels labels;
  Vector proba;
};

/// Target features are passed without labels; sg_cs requires them, the other
/// methods ignore them.
FittedDecoder fit_decoder(const DecoderSpec& spec, const MultiSubjectDataset& train,
                          const Matrix* target_unlabeled = nullptr);

/// As above, reusing a first-level bank for sg / sg_cs when one is supplied.
FittedDecoder fit_decoder(const DecoderSpec& spec, const MultiSubjectDataset& train,
                          const Matrix* target_unlabeled, const FirstLevelBank* prefit_bank);

Prediction predict_decoder(const FittedDecoder& decoder, const Matrix& trials);

void save_decoder(const FittedDecoder& decoder, const std::filesystem::path& dir);
FittedDecoder load_decoder(const std::filesystem::path& dir);

}  // namespace xsd
