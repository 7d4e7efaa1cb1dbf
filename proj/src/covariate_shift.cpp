#include "xsd/covariate_shift.hpp"

#include "xsd/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xsd {

std::string_view to_string(ShiftSpace space) {
  return space == ShiftSpace::second_level ? "second_level" : "original";
}

ShiftSpace parse_shift_space(std::string_view text) {
  if (text == "second_level") return ShiftSpace::second_level;
  if (text == "original") return ShiftSpace::original;
  throw Error("unknown shift space '" + std::string(text) + "' (expected second_level or original)");
}

void ShiftOptions::validate() const {
  if (!(clip_lo > 0.0) || !(clip_lo <= clip_hi) || !std::isfinite(clip_hi)) {
    throw Error("clip bounds must satisfy 0 < lo <= hi < inf");
  }
  if (domain_lambda && !(*domain_lambda >= 0.0)) throw Error("domain lambda must be >= 0");
  if (!(domain_lambda_ratio >= 0.0)) throw Error("domain lambda ratio must be >= 0");
  if (folds < 2) throw Error("domain classifier needs at least 2 folds");
  solver.validate();
}

namespace {

// Row order sorted lexicographically by content; ties keep input order.
std::vector<std::size_t> canonical_order(const Matrix& m) {
  std::vector<std::size_t> order(static_cast<std::size_t>(m.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&m](std::size_t a, std::size_t b) {
    const auto ra = m.row(static_cast<Eigen::Index>(a));
    const auto rb = m.row(static_cast<Eigen::Index>(b));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (ra[j] < rb[j]) return true;
      if (rb[j] < ra[j]) return false;
    }
    return false;
  });
  return order;
}

bool same_row(const Matrix& m, Eigen::Index a, Eigen::Index b) {
  return (m.row(a).array() == m.row(b).array()).all();
}

// Folds over groups of identical feature rows, so a row seen in training never
// has an exact twin in the held-out part. Groups are stratified by the domains
// they contain (source only, target only, both) and dealt round-robin after a
// seeded shuffle within each stratum. `combined` must be in canonical order
// within each domain block.
FoldIndices grouped_domain_folds(const Matrix& combined, std::span<const int> domain, int k,
                                 std::uint64_t seed) {
  const auto all = canonical_order(combined);
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i == 0 || !same_row(combined, static_cast<Eigen::Index>(all[i - 1]), static_cast<Eigen::Index>(all[i]))) {
      groups.emplace_back();
    }
    groups.back().push_back(all[i]);
  }
  std::vector<std::size_t> strata[3];
  for (std::size_t g = 0; g < groups.size(); ++g) {
    bool has_s = false, has_t = false;
    for (auto i : groups[g]) (domain[i] ? has_t : has_s) = true;
    strata[has_s && has_t ? 2 : (has_t ? 1 : 0)].push_back(g);
  }
  FoldIndices folds(static_cast<std::size_t>(k));
  std::size_t next = 0;
  for (std::uint64_t c = 0; c < 3; ++c) {
    RandomStream rng(seed, c);
    shuffle(std::span<std::size_t>(strata[c]), rng);
    for (auto g : strata[c]) {
      auto& fold = folds[next++ % static_cast<std::size_t>(k)];
      fold.insert(fold.end(), groups[g].begin(), groups[g].end());
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

bool both_domains(std::span<const std::size_t> rows, std::span<const int> domain) {
  bool s = false, t = false;
  for (auto i : rows) (domain[i] ? t : s) = true;
  return s && t;
}

}  // namespace

ImportanceWeights estimate_weights(const Matrix& source, const Matrix& target,
                                   const ShiftOptions& opts) {
  opts.validate();
  if (source.rows() == 0) throw Error("empty source domain");
  if (target.rows() == 0) throw Error("empty target domain");
  if (source.cols() != target.cols()) {
    throw Error("source has " + std::to_string(source.cols()) + " features, target has " +
                std::to_string(target.cols()));
  }
  if (!source.allFinite() || !target.allFinite()) throw Error("non-finite domain features");

  const auto n_s = static_cast<std::size_t>(source.rows());
  const auto n_t = static_cast<std::size_t>(target.rows());
  const auto src_order = canonical_order(source);
  const auto tgt_order = canonical_order(target);

  Matrix combined(static_cast<Eigen::Index>(n_s + n_t), source.cols());
  Labels domain(n_s + n_t);
  for (std::size_t i = 0; i < n_s; ++i) {
    combined.row(static_cast<Eigen::Index>(i)) = source.row(static_cast<Eigen::Index>(src_order[i]));
    domain[i] = 0;
  }
  for (std::size_t i = 0; i < n_t; ++i) {
    combined.row(static_cast<Eigen::Index>(n_s + i)) =
        target.row(static_cast<Eigen::Index>(tgt_order[i]));
    domain[n_s + i] = 1;
  }

  const DesignMatrix all(combined);
  FitOptions solver = opts.solver;
  solver.lambda = opts.domain_lambda ? *opts.domain_lambda
                                     : opts.domain_lambda_ratio * lambda_max(all, domain);

  // Out-of-fold posteriors: a source trial is never scored by a model that saw it.
  const int k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(opts.folds),
                                                       std::min(n_s, n_t)));
  Vector canon_score(static_cast<Eigen::Index>(n_s));
  FoldIndices folds;
  bool held_out = k >= 2;
  if (held_out) {
    folds = grouped_domain_folds(combined, domain, k, opts.seed);
    for (int f = 0; f < k && held_out; ++f) {
      held_out = both_domains(training_indices(folds, f, combined.rows()), domain);
    }
  }
  if (held_out) {
    for (int f = 0; f < k; ++f) {
      const auto train = training_indices(folds, f, combined.rows());
      const DesignMatrix x_train(select_rows(combined, train));
      const LinearModel m = fit(x_train, select(domain, train), solver);
      for (auto i : folds[static_cast<std::size_t>(f)]) {
        if (i >= n_s) continue;
        canon_score[static_cast<Eigen::Index>(i)] =
            combined.row(static_cast<Eigen::Index>(i)).dot(m.beta) + m.intercept;
      }
    }
  } else {
    // Too few distinct rows to hold any out with both domains left in training.
    const LinearModel m = fit(all, domain, solver);
    canon_score = combined.topRows(static_cast<Eigen::Index>(n_s)) * m.beta;
    canon_score.array() += m.intercept;
  }

  ImportanceWeights out;
  out.clip_lo = opts.clip_lo;
  out.clip_hi = opts.clip_hi;
  out.domain_lambda = solver.lambda;
  out.weights.resize(static_cast<Eigen::Index>(n_s));
  out.posterior.resize(static_cast<Eigen::Index>(n_s));
  const double log_prior = std::log(static_cast<double>(n_s)) - std::log(static_cast<double>(n_t));
  for (std::size_t c = 0; c < n_s; ++c) {
    const double s = canon_score[static_cast<Eigen::Index>(c)];
    // p / (1 - p) = exp(score), evaluated in log space.
    const double ratio = std::exp(std::clamp(log_prior + s, -700.0, 700.0));
    const auto i = static_cast<Eigen::Index>(src_order[c]);
    out.weights[i] = std::clamp(ratio, opts.clip_lo, opts.clip_hi);
    out.posterior[i] = sigmoid(s);
  }
  // Sum in canonical order so the result does not depend on input row order.
  double total = 0.0;
  for (std::size_t c = 0; c < n_s; ++c) total += out.weights[static_cast<Eigen::Index>(src_order[c])];
  out.raw_mean = total / static_cast<double>(n_s);
  out.weights /= out.raw_mean;
  return out;
}

double true_gaussian_ratio(double x, double mu_s, double sigma_s, double mu_t, double sigma_t) {
  if (!(sigma_s > 0.0) || !(sigma_t > 0.0)) throw Error("sigmas must be positive");
  const double zs = (x - mu_s) / sigma_s;
  const double zt = (x - mu_t) / sigma_t;
  return (sigma_s / sigma_t) * std::exp(0.5 * (zs * zs - zt * zt));
}

}  // namespace xsd
