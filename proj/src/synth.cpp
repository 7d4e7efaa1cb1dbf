#include "xsd/synth.hpp"

#include "xsd/manifest.hpp"
#include "xsd/parallel.hpp"
#include "xsd/random.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

namespace xsd {

namespace {

enum Stream : std::uint32_t { kNoise = 0, kTransform = 1, kShift = 2 };

}  // namespace

void SynthConfig::validate() const {
  if (n_subjects < 1) throw Error("n_subjects must be >= 1");
  if (trials_per_subject < 2 || trials_per_subject % 2 != 0) {
    throw Error("trials_per_subject must be even and >= 2");
  }
  if (dim < 1) throw Error("dim must be >= 1");
  if (!(mu >= 0.0) || !(sigma >= 0.0) || !(gamma >= 0.0) || !(tau >= 0.0)) {
    throw Error("mu, sigma, gamma and tau must be >= 0");
  }
}

SubjectParams subject_params(const SynthConfig& config, SubjectId subject_id) {
  config.validate();
  const CounterRng rng(config.seed);
  const auto d = static_cast<Eigen::Index>(config.dim);
  const auto sid = static_cast<std::uint32_t>(subject_id);
  SubjectParams p;
  p.subject_id = subject_id;
  p.transform = Matrix::Identity(d, d);
  const double g = config.gamma / std::sqrt(static_cast<double>(config.dim));
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      p.transform(r, c) += g * rng.normal(static_cast<std::uint32_t>(c),
                                          static_cast<std::uint32_t>(r), sid, kTransform);
    }
  }
  p.shift.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    p.shift[j] = config.tau * rng.normal(static_cast<std::uint32_t>(j), 0u, sid, kShift);
  }
  return p;
}

SynthDataset generate(const SynthConfig& config) {
  config.validate();
  const CounterRng rng(config.seed);
  const auto n = static_cast<std::size_t>(config.n_subjects);
  const auto trials = static_cast<Eigen::Index>(config.trials_per_subject);
  const auto d = static_cast<Eigen::Index>(config.dim);

  std::vector<SubjectParams> params(n);
  std::vector<std::optional<SubjectDataset>> subjects(n);
  parallel_for(n, [&](std::size_t s) {
    const SubjectId id = static_cast<SubjectId>(s + 1);
    params[s] = subject_params(config, id);
    Matrix z(trials, d);
    Labels y(static_cast<std::size_t>(trials));
    for (Eigen::Index i = 0; i < trials; ++i) {
      y[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
      for (Eigen::Index j = 0; j < d; ++j) {
        z(i, j) = config.sigma * rng.normal(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i),
                                            static_cast<std::uint32_t>(id), kNoise);
      }
      z(i, 0) += y[static_cast<std::size_t>(i)] * config.mu;
    }
    Matrix x = z * params[s].transform.transpose();
    x.rowwise() += params[s].shift.transpose();
    subjects[s].emplace(id, std::move(x), std::move(y));
  });

  std::vector<SubjectDataset> out;
  out.reserve(n);
  for (auto& s : subjects) out.push_back(std::move(*s));
  return SynthDataset{MultiSubjectDataset(std::move(out)), std::move(params)};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bayes_accuracy(const SubjectParams& params, const SynthConfig& config) {
  if (!(config.sigma > 0.0)) throw Error("bayes_accuracy needs sigma > 0");
  if (!(config.mu >= 0.0)) throw Error("bayes_accuracy needs mu >= 0");
  const Matrix& a = params.transform;
  const double rcond = Eigen::PartialPivLU<Matrix>(a).rcond();
  if (!(rcond > 1e-12)) {
    throw Error("subject " + std::to_string(params.subject_id) +
                ": transform is singular (condition estimate " +
                format_double(rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity()) + ")");
  }
  const Vector delta = config.mu * a.col(0);
  const Matrix cov = config.sigma * config.sigma * a * a.transpose();
  const Eigen::LDLT<Matrix> ldlt(cov);
  if (ldlt.info() != Eigen::Success) {
    throw Error("subject " + std::to_string(params.subject_id) + ": covariance factorization failed");
  }
  const double m2 = delta.dot(ldlt.solve(delta));
  return normal_cdf(0.5 * std::sqrt(std::max(m2, 0.0)));
}

double ShiftProfile::mean() const {
  double acc = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (i == j) continue;
      acc += values(i, j);
      ++count;
    }
  }
  return count ? acc / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

ShiftProfile shift_profile(const MultiSubjectDataset& dataset, const ShiftProfileOptions& opts) {
  if (dataset.size() < 2) throw Error("shift profile needs at least 2 subjects");
  const auto& subjects = dataset.subjects();
  const std::size_t s = subjects.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = a + 1; b < s; ++b) pairs.emplace_back(a, b);
  }
  std::vector<double> acc(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto& sa = subjects[pairs[p].first];
    const auto& sb = subjects[pairs[p].second];
    Matrix x(static_cast<Eigen::Index>(sa.size() + sb.size()), static_cast<Eigen::Index>(dataset.dim()));
    x << sa.features(), sb.features();
    Labels domain(sa.size(), 0);
    domain.insert(domain.end(), sb.size(), 1);
    const auto folds = stratified_folds(
        domain, opts.folds,
        derive_seed(opts.seed, {static_cast<std::uint64_t>(sa.subject_id()),
                                static_cast<std::uint64_t>(sb.subject_id())}));
    std::size_t hits = 0;
    for (int f = 0; f < opts.folds; ++f) {
      const auto train = training_indices(folds, f, domain.size());
      const DesignMatrix x_train(select_rows(x, train));
      const Labels y_train = select(domain, train);
      FitOptions solver = opts.solver;
      solver.lambda = opts.lambda_ratio * lambda_max(x_train, y_train);
      const LinearModel m = fit(x_train, y_train, solver);
      const auto& held = folds[static_cast<std::size_t>(f)];
      const Labels pred = predict_label(m, select_rows(x, held));
      for (std::size_t h = 0; h < held.size(); ++h) hits += pred[h] == domain[held[h]];
    }
    acc[p] = static_cast<double>(hits) / static_cast<double>(domain.size());
  });

  ShiftProfile out;
  out.subjects = dataset.subject_ids();
  out.values = Matrix::Constant(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s),
                                std::numeric_limits<double>::quiet_NaN());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto a = static_cast<Eigen::Index>(pairs[p].first);
    const auto b = static_cast<Eigen::Index>(pairs[p].second);
    out.values(a, b) = acc[p];
    out.values(b, a) = acc[p];
  }
  return out;
}

void save_params(const std::vector<SubjectParams>& params, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& p : params) {
    std::string a;
    for (Eigen::Index r = 0; r < p.transform.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.transform.cols(); ++c) {
        if (c) a += ' ';
        a += format_double(p.transform(r, c));
      }
      a += '\n';
    }
    std::string b;
    for (Eigen::Index j = 0; j < p.shift.size(); ++j) b += format_double(p.shift[j]) + '\n';
    const std::string stem = "sub-" + std::to_string(p.subject_id);
    write_file(dir / (stem + ".A.txt"), a);
    write_file(dir / (stem + ".b.txt"), b);
  }
}

}  // namespace xsd
