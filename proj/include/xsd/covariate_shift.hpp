#pragma once

#include "xsd/core_data.hpp"
#include "xsd/glm.hpp"

#include <optional>
#include <string_view>

namespace xsd {

/// Feature space in which source and target are discriminated.
enum class ShiftSpace { second_level, original };

std::string_view to_string(ShiftSpace space);
ShiftSpace parse_shift_space(std::string_view text);

struct ShiftOptions {
  double clip_lo = 0.1;
  double clip_hi = 10.0;
  /// Absolute L1 strength for the domain classifier; when unset,
  /// `domain_lambda_ratio` * lambda_max of the domain problem.
  std::optional<double> domain_lambda;
  double domain_lambda_ratio = 0.01;
  ShiftSpace space = ShiftSpace::second_level;
  int folds = 3;
  std::uint64_t seed = 0;
  FitOptions solver;

  void validate() const;
};

/// Per-source-trial estimates of p_target(x) / p_source(x), clipped and
/// rescaled to mean one.
struct ImportanceWeights {
  Vector weights;
  double clip_lo = 0.0;
  double clip_hi = 0.0;
  double raw_mean = 0.0;  // mean of the clipped ratios, i.e. the divisor
  Vector posterior;       // out-of-fold domain posterior P(target | x)
  double domain_lambda = 0.0;
};

/// Trains source-vs-target logistic regression (target = 1) on features
/// only and converts out-of-fold posteriors into density-ratio weights
/// r(x) = (n_S / n_T) p(x) / (1 - p(x)).
///
/// Rows are processed in a canonical (lexicographic) order, so permuting the
/// source rows permutes the output identically for distinct rows.
ImportanceWeights estimate_weights(const Matrix& source, const Matrix& target,
                                   const ShiftOptions& opts);

/// Ratio of Gaussian densities N(mu_t, sigma_t^2) / N(mu_s, sigma_s^2) at x.
double true_gaussian_ratio(double x, double mu_s, double sigma_s, double mu_t, double sigma_t);

}  // namespace xsd
