#include "xsd/glm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace xsd {

void FitOptions::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("lambda must be finite and >= 0");
  if (!(tol > 0.0)) throw Error("tol must be > 0");
  if (max_iter < 1) throw Error("max_iter must be >= 1");
}

void Regularization::validate() const {
  if (mode == Mode::fixed && !(ratio >= 0.0 && std::isfinite(ratio))) {
    throw Error("lambda ratio must be finite and >= 0");
  }
  if (mode == Mode::cv) {
    if (grid.empty()) throw Error("lambda grid is empty");
    if (folds < 2) throw Error("lambda selection needs at least 2 folds");
  }
}

double softplus(double s) {
  return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

namespace {

void check_problem(const DesignMatrix& x, std::span<const int> y) {
  x.validate();
  if (x.rows() < 2) throw Error("need at least 2 training rows, got " + std::to_string(x.rows()));
  if (y.size() != x.rows()) {
    throw Error("label count " + std::to_string(y.size()) + " does not match " +
                std::to_string(x.rows()) + " rows");
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw Error("labels must be 0 or 1");
  }
  if (!x.values.allFinite()) throw Error("design matrix contains non-finite values");
}

double soft_threshold(double v, double tau) {
  if (v > tau) return v - tau;
  if (v < -tau) return v + tau;
  return 0.0;
}

// Weighted class-1 prior under mean-one weights.
double weighted_prior(const Vector& w, std::span<const int> y) {
  double pos = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total += w[static_cast<Eigen::Index>(i)];
    if (y[i] == 1) pos += w[static_cast<Eigen::Index>(i)];
  }
  const double p = pos / total;
  if (!(p > 0.0 && p < 1.0)) throw Error("degenerate labels");
  return p;
}

struct Problem {
  const Matrix& x;
  std::span<const int> y;
  Vector w;
  double n;

  double loss_from_scores(const Vector& s) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double si = s[i];
      acc += w[i] * (softplus(si) - (y[static_cast<std::size_t>(i)] == 1 ? si : 0.0));
    }
    return acc / n;
  }

  // Residual r_i = w_i (sigmoid(s_i) - y_i) / n; gradient = [X'r, sum r].
  void gradient_from_scores(const Vector& s, Vector& g_beta, double& g_int) const {
    Vector r(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      r[i] = w[i] * (sigmoid(s[i]) - y[static_cast<std::size_t>(i)]) / n;
    }
    g_beta.noalias() = x.transpose() * r;
    g_int = r.sum();
  }

  Vector scores(const Vector& beta, double intercept) const {
    Vector s = x * beta;
    s.array() += intercept;
    return s;
  }
};

}  // namespace

Vector normalized_weights(const DesignMatrix& x) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  if (!x.weights) return Vector::Ones(n);
  x.validate();
  const double total = x.weights->sum();
  return *x.weights * (static_cast<double>(n) / total);
}

SmoothEval objective_and_gradient(const Vector& beta, double intercept, const DesignMatrix& x,
                                  std::span<const int> y, double lambda) {
  if (static_cast<std::size_t>(beta.size()) != x.cols()) {
    throw Error("coefficient length does not match design columns");
  }
  if (y.size() != x.rows()) throw Error("label count does not match design rows");
  const Problem prob{x.values, y, normalized_weights(x), static_cast<double>(x.rows())};
  const Vector s = prob.scores(beta, intercept);
  SmoothEval out;
  out.value = prob.loss_from_scores(s);
  out.penalized = out.value + lambda * beta.lpNorm<1>();
  prob.gradient_from_scores(s, out.grad_beta, out.grad_intercept);
  return out;
}

double lambda_max(const DesignMatrix& x, std::span<const int> y) {
  check_problem(x, y);
  const Vector w = normalized_weights(x);
  const double p = weighted_prior(w, y);
  Vector r(w.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    r[i] = w[i] * (p - y[static_cast<std::size_t>(i)]);
  }
  const Vector g = x.values.transpose() * r / static_cast<double>(x.rows());
  return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
}

LinearModel fit(const DesignMatrix& x, std::span<const int> y, const FitOptions& opts) {
  opts.validate();
  check_problem(x, y);
  const Problem prob{x.values, y, normalized_weights(x), static_cast<double>(x.rows())};
  const double lambda = opts.lambda;
  const auto d = static_cast<Eigen::Index>(x.cols());

  const double prior = weighted_prior(prob.w, y);

  Vector x_beta = Vector::Zero(d);
  double x_int = std::log(prior) - std::log1p(-prior);
  Vector x_scores = prob.scores(x_beta, x_int);
  double x_obj = prob.loss_from_scores(x_scores);

  Vector y_beta = x_beta;
  double y_int = x_int;
  Vector y_scores = x_scores;
  double t = 1.0;

  // Average curvature as a starting Lipschitz guess; backtracking raises it.
  double lip = 0.0;
  for (Eigen::Index i = 0; i < x.values.rows(); ++i) {
    lip += prob.w[i] * (x.values.row(i).squaredNorm() + 1.0);
  }
  lip = std::max(0.25 * lip / prob.n / static_cast<double>(d + 1), 1e-12);

  LinearModel model;
  model.lambda = lambda;
  Vector g_beta(d);
  double g_int = 0.0;
  Vector z_beta(d);
  Vector z_scores;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const double y_obj = prob.loss_from_scores(y_scores);
    prob.gradient_from_scores(y_scores, g_beta, g_int);

    double z_int = 0.0;
    double z_obj = 0.0;
    for (;;) {
      for (Eigen::Index j = 0; j < d; ++j) {
        z_beta[j] = soft_threshold(y_beta[j] - g_beta[j] / lip, lambda / lip);
      }
      z_int = y_int - g_int / lip;
      z_scores = prob.scores(z_beta, z_int);
      z_obj = prob.loss_from_scores(z_scores);
      const double step_int = z_int - y_int;
      const double quad = y_obj + g_beta.dot(z_beta - y_beta) + g_int * step_int +
                          0.5 * lip * ((z_beta - y_beta).squaredNorm() + step_int * step_int);
      if (z_obj <= quad + 1e-13 * std::abs(y_obj)) break;
      lip *= 2.0;
      if (!std::isfinite(lip)) throw Error("line search failed to find a descent step");
    }
    model.n_iter = iter + 1;

    const double z_full = z_obj + lambda * z_beta.lpNorm<1>();
    const double x_full = x_obj + lambda * x_beta.lpNorm<1>();
    if (z_full > x_full) {
      if (t == 1.0) {
        // A plain proximal step from the current iterate made no progress.
        model.converged = true;
        break;
      }
      y_beta = x_beta;
      y_int = x_int;
      y_scores = x_scores;
      t = 1.0;
      continue;
    }

    const double rel = (x_full - z_full) / std::max(std::abs(x_full), 1e-300);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    y_beta = z_beta + momentum * (z_beta - x_beta);
    y_int = z_int + momentum * (z_int - x_int);
    // Scores are affine in the parameters, so extrapolate them directly.
    y_scores = z_scores + momentum * (z_scores - x_scores);
    x_beta = z_beta;
    x_int = z_int;
    x_scores = z_scores;
    x_obj = z_obj;
    t = t_next;
    if (rel < opts.tol) {
      model.converged = true;
      break;
    }
  }

  model.beta = std::move(x_beta);
  model.intercept = x_int;
  return model;
}

double select_lambda_ratio(const DesignMatrix& x, std::span<const int> y,
                           const Regularization& reg, const FitOptions& opts) {
  reg.validate();
  check_problem(x, y);
  const auto folds = stratified_folds(y, reg.folds, opts.seed);
  const Vector w_all = x.weights ? *x.weights : Vector::Ones(static_cast<Eigen::Index>(x.rows()));

  double best_ratio = reg.grid.front();
  double best_loss = std::numeric_limits<double>::infinity();
  for (double ratio : reg.grid) {
    double total = 0.0;
    for (int f = 0; f < reg.folds; ++f) {
      const auto train = training_indices(folds, f, x.rows());
      const auto& held = folds[static_cast<std::size_t>(f)];
      Vector w_train(static_cast<Eigen::Index>(train.size()));
      for (std::size_t i = 0; i < train.size(); ++i) {
        w_train[static_cast<Eigen::Index>(i)] = w_all[static_cast<Eigen::Index>(train[i])];
      }
      const DesignMatrix x_train(select_rows(x.values, train),
                                 x.weights ? std::optional<Vector>(w_train) : std::nullopt);
      const Labels y_train = select(y, train);
      FitOptions inner = opts;
      inner.lambda = ratio * lambda_max(x_train, y_train);
      const LinearModel m = fit(x_train, y_train, inner);

      double loss = 0.0;
      double wsum = 0.0;
      for (auto i : held) {
        const auto row = static_cast<Eigen::Index>(i);
        const double s = x.values.row(row).dot(m.beta) + m.intercept;
        loss += w_all[row] * (softplus(s) - (y[i] == 1 ? s : 0.0));
        wsum += w_all[row];
      }
      total += wsum > 0.0 ? loss / wsum : 0.0;
    }
    total /= reg.folds;
    if (total < best_loss) {
      best_loss = total;
      best_ratio = ratio;
    }
  }
  return best_ratio;
}

LinearModel fit_regularized(const DesignMatrix& x, std::span<const int> y,
                            const Regularization& reg, FitOptions opts) {
  reg.validate();
  const double ratio =
      reg.mode == Regularization::Mode::cv ? select_lambda_ratio(x, y, reg, opts) : reg.ratio;
  opts.lambda = ratio * lambda_max(x, y);
  return fit(x, y, opts);
}

Vector predict_proba(const LinearModel& model, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != model.dim()) {
    throw Error("input has " + std::to_string(x.cols()) + " columns, model expects " +
                std::to_string(model.dim()));
  }
  Vector s = x * model.beta;
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = sigmoid(s[i] + model.intercept);
  return s;
}

Labels predict_label(const LinearModel& model, const Matrix& x, double threshold) {
  const Vector p = predict_proba(model, x);
  Labels out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = p[i] >= threshold;
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error("malformed number '" + std::string(text) + "'");
  }
  return v;
}

std::string serialize_model(const LinearModel& model) {
  std::string out;
  out += format_double(model.lambda) + '\n';
  out += format_double(model.intercept) + '\n';
  for (Eigen::Index j = 0; j < model.beta.size(); ++j) out += format_double(model.beta[j]) + '\n';
  return out;
}

LinearModel parse_model(std::string_view text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) values.push_back(parse_double(line));
    pos = end + 1;
  }
  if (values.size() < 2) throw Error("model text needs at least lambda and intercept");
  LinearModel m;
  m.lambda = values[0];
  m.intercept = values[1];
  m.beta = Eigen::Map<const Vector>(values.data() + 2, static_cast<Eigen::Index>(values.size() - 2));
  m.converged = true;
  return m;
}

void save_model(const LinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_model(model);
}

LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace xsd
