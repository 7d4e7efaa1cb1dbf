#pragma once

// Reference computations used as independent oracles. Nothing here calls the
// solver; objectives are evaluated directly from their definitions.

#include "xsd/core_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <numeric>
#include <vector>

namespace xsd::oracle {

struct Toy {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<double> w;  // empty = uniform
  double lambda = 0.0;
};

// Weighted mean logistic loss plus lambda * |beta|_1, written out longhand.
inline double objective(const Toy& p, const std::vector<double>& beta, double b) {
  const std::size_t n = p.y.size();
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) wsum += p.w.empty() ? 1.0 : p.w[i];
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = b;
    for (std::size_t j = 0; j < beta.size(); ++j) s += beta[j] * p.x[i][j];
    const double wi = (p.w.empty() ? 1.0 : p.w[i]) * static_cast<double>(n) / wsum;
    // log(1 + e^s) - y s, evaluated without overflow
    const double sp = s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    loss += wi * (sp - p.y[i] * s);
  }
  double l1 = 0.0;
  for (double v : beta) l1 += std::abs(v);
  return loss / static_cast<double>(n) + p.lambda * l1;
}

// Exhaustive search on a box, then repeated exhaustive search on a shrinking box
// around the incumbent. The objective is convex, so a box of +-2 coarse steps
// around the coarse minimizer always contains the true minimizer.
inline std::vector<double> grid_search(const std::function<double(const std::vector<double>&)>& f,
                                       std::size_t dims, double lo, double hi, double final_step,
                                       int points = 41) {
  std::vector<double> center(dims, 0.5 * (lo + hi));
  double half = 0.5 * (hi - lo);
  while (true) {
    const double step = 2.0 * half / (points - 1);
    std::vector<int> idx(dims, 0);
    std::vector<double> best = center, probe(dims);
    double best_val = f(center);
    while (true) {
      for (std::size_t j = 0; j < dims; ++j) probe[j] = center[j] - half + step * idx[j];
      const double v = f(probe);
      if (v < best_val) {
        best_val = v;
        best = probe;
      }
      std::size_t j = 0;
      while (j < dims && ++idx[j] == points) idx[j++] = 0;
      if (j == dims) break;
    }
    center = best;
    if (step <= final_step) return center;
    half = 2.0 * step;
  }
}

// Central differences of a scalar function of a parameter vector.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> at, double h) {
  std::vector<double> g(at.size());
  for (std::size_t j = 0; j < at.size(); ++j) {
    const double keep = at[j];
    at[j] = keep + h;
    const double up = f(at);
    at[j] = keep - h;
    const double down = f(at);
    at[j] = keep;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

// Average ranks, ties share the mean rank.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Bit-level checksum of a row, independent of row position.
inline std::uint64_t row_hash(const double* values, std::size_t d, int label) {
  std::uint64_t h = 1469598103934665603ULL ^ static_cast<std::uint64_t>(label);
  for (std::size_t j = 0; j < d; ++j) {
    std::uint64_t bits;
    std::memcpy(&bits, values + j, sizeof bits);
    h = (h ^ bits) * 1099511628211ULL;
  }
  return h;
}

// Fixed toy problems for the solver oracle. Minimizers were located with
// grid_search above and are frozen next to each problem's use.
inline std::vector<Toy> toy_problems() {
  std::vector<Toy> out;
  {
    Toy t;  // two points duplicated 50 times
    for (int r = 0; r < 50; ++r) {
      t.x.push_back({-1.0});
      t.y.push_back(0);
      t.x.push_back({1.0});
      t.y.push_back(1);
    }
    t.lambda = 0.1;
    out.push_back(t);
  }
  {
    Toy t;
    t.x = {{-3}, {-2}, {-1}, {-0.5}, {0}, {0.5}, {1}, {1.5}, {2}, {3}};
    t.y = {0, 0, 1, 0, 0, 1, 0, 1, 1, 1};
    out.push_back(t);
  }
  {
    Toy t;
    t.x = {{-2}, {-1.2}, {-0.4}, {0.1}, {0.3}, {0.9}, {1.4}, {2.2}};
    t.y = {0, 1, 0, 0, 1, 1, 0, 1};
    t.w = {1.0, 0.5, 2.0, 1.5, 0.3, 1.0, 0.7, 2.5};
    t.lambda = 0.02;
    out.push_back(t);
  }
  {
    Toy t;
    t.x = {{-1, 0.5}, {-0.5, -1}, {0, 0.3}, {0.4, -0.2}, {1, 1}, {1.5, -0.5},
           {-1.5, -0.3}, {0.2, 1.2}, {0.8, 0.1}, {-0.3, 0.8}, {1.1, -1.1}, {-0.9, -0.7}};
    t.y = {0, 0, 1, 0, 1, 1, 0, 1, 1, 0, 0, 1};
    out.push_back(t);
  }
  {
    Toy t;
    t.x = {{-1, 0.2}, {-0.6, -0.9}, {0.1, 0.4}, {0.5, -0.3}, {1.2, 0.6},
           {1.4, -0.4}, {-1.3, 0.1}, {0.3, 1.0}, {0.9, -0.8}, {-0.2, 0.7}};
    t.y = {0, 0, 0, 1, 1, 1, 0, 1, 1, 0};
    t.w = {1.0, 2.0, 0.5, 1.0, 1.5, 1.0, 0.8, 1.2, 0.6, 1.4};
    t.lambda = 0.08;
    out.push_back(t);
  }
  return out;
}

inline DesignMatrix design_of(const Toy& t) {
  Matrix x(static_cast<Eigen::Index>(t.x.size()), static_cast<Eigen::Index>(t.x[0].size()));
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    for (std::size_t j = 0; j < t.x[i].size(); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.x[i][j];
  }
  if (t.w.empty()) return DesignMatrix(std::move(x));
  return DesignMatrix(std::move(x), Vector::Map(t.w.data(), static_cast<Eigen::Index>(t.w.size())));
}

// Minimizers of the toy objectives, from grid_search at a final step of 1e-5.
// Layout: beta..., intercept.
inline const std::vector<std::vector<double>> kToyMinimizers = {
    {2.197225, 0.000000},
    {1.006155, -0.203805},
    {1.206740, -0.847650},
    {1.114200, 1.024570, -0.123385},
    {2.429060, 0.000000, -0.353230},
};

}  // namespace xsd::oracle
