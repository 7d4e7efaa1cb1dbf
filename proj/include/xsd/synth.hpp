#pragma once

#include "xsd/core_data.hpp"
#include "xsd/glm.hpp"

#include <filesystem>
#include <vector>

namespace xsd {

/// Linear-Gaussian multi-subject generator. Subject s draws latent
/// z = y * mu * e1 + eps, eps ~ N(0, sigma^2 I), and observes x = A_s z + b_s
/// with A_s = I + gamma * G_s / sqrt(d) and b_s ~ N(0, tau^2 I).
struct SynthConfig {
  int n_subjects = 8;
  int trials_per_subject = 200;
  int dim = 60;
  double mu = 2.0;
  double sigma = 1.0;
  double gamma = 0.0;
  double tau = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SubjectParams {
  SubjectId subject_id = 0;
  Matrix transform;  // A_s
  Vector shift;      // b_s
};

struct SynthDataset {
  MultiSubjectDataset data;
  std::vector<SubjectParams> params;
};

/// Subject ids run 1..n_subjects. Every draw is addressed by
/// (seed, subject, trial, coordinate), so output is independent of
/// generation order.
SynthDataset generate(const SynthConfig& config);

SubjectParams subject_params(const SynthConfig& config, SubjectId subject_id);

/// Standard normal CDF.
double normal_cdf(double x);

/// Optimal accuracy for one subject: Phi(0.5 * sqrt(D' S^-1 D)) with
/// D = mu A e1 and S = sigma^2 A A'.
double bayes_accuracy(const SubjectParams& params, const SynthConfig& config);

struct ShiftProfileOptions {
  int folds = 3;
  double lambda_ratio = 0.01;
  std::uint64_t seed = 0;
  FitOptions solver;
};

/// Pairwise cross-validated accuracy of a subject-vs-subject domain
/// classifier. Symmetric; the diagonal is NaN (undefined).
struct ShiftProfile {
  std::vector<SubjectId> subjects;
  Matrix values;

  double mean() const;  // over off-diagonal pairs
};

ShiftProfile shift_profile(const MultiSubjectDataset& dataset, const ShiftProfileOptions& opts = {});

void save_params(const std::vector<SubjectParams>& params, const std::filesystem::path& dir);

}  // namespace xsd
