#pragma once

#include "xsd/core_data.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace xsd {

/// Fitted logistic regression: p(y=1|x) = sigmoid(beta'x + intercept).
struct LinearModel {
  Vector beta;
  double intercept = 0.0;
  double lambda = 0.0;
  int n_iter = 0;
  bool converged = false;

  std::size_t dim() const { return static_cast<std::size_t>(beta.size()); }
};

struct FitOptions {
  double lambda = 0.0;
  double tol = 1e-7;   // relative objective decrease
  int max_iter = 2000;
  std::uint64_t seed = 0;  // reserved; the solver is deterministic

  void validate() const;
};

/// How lambda is chosen for a fit: a fixed fraction of lambda_max, or an
/// inner stratified cross-validation over a log grid of fractions.
struct Regularization {
  enum class Mode { fixed, cv };
  Mode mode = Mode::fixed;
  double ratio = 0.01;
  std::vector<double> grid = {1e-3, 3.1622776601683794e-3, 1e-2, 3.1622776601683794e-2,
                              1e-1, 3.1622776601683794e-1, 1.0};
  int folds = 3;

  void validate() const;
};

struct SmoothEval {
  double value = 0.0;      // weighted mean logistic loss
  double penalized = 0.0;  // value + lambda * |beta|_1
  Vector grad_beta;
  double grad_intercept = 0.0;
};

/// Row weights rescaled to mean one (all ones when X carries no weights).
Vector normalized_weights(const DesignMatrix& x);

/// Numerically stable log(1 + e^s).
double softplus(double s);
double sigmoid(double s);

/// Smooth part of the weighted objective and its gradient. The L1 term is
/// reported in `penalized` but excluded from the gradient.
SmoothEval objective_and_gradient(const Vector& beta, double intercept, const DesignMatrix& x,
                                  std::span<const int> y, double lambda = 0.0);

/// Smallest lambda for which beta = 0 is optimal.
double lambda_max(const DesignMatrix& x, std::span<const int> y);

/// Weighted L1-penalized logistic regression by accelerated proximal gradient
/// (soft-thresholding prox, backtracking, restart whenever the objective would
/// increase). Starts from beta = 0, intercept = logit of the weighted prior.
LinearModel fit(const DesignMatrix& x, std::span<const int> y, const FitOptions& opts);

/// Resolves lambda from `reg` on this training set only, then fits.
LinearModel fit_regularized(const DesignMatrix& x, std::span<const int> y,
                            const Regularization& reg, FitOptions opts);

/// Fraction of lambda_max picked by inner stratified CV (held-out log loss).
double select_lambda_ratio(const DesignMatrix& x, std::span<const int> y,
                           const Regularization& reg, const FitOptions& opts);

Vector predict_proba(const LinearModel& model, const Matrix& x);
/// Ties at the threshold go to class 1.
Labels predict_label(const LinearModel& model, const Matrix& x, double threshold = 0.5);

/// Shortest round-trip decimal rendering.
std::string format_double(double v);
double parse_double(std::string_view text);

/// One value per line: lambda, intercept, beta[0..d).
std::string serialize_model(const LinearModel& model);
LinearModel parse_model(std::string_view text);
void save_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace xsd
