#pragma once

// Reference computations that share no code with the library: single-pass
// streaming metrics and an iterative least-squares solver.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace agrimeta::testing {

// Welford-style running mean of squared error.
inline double streaming_rmse(std::span<const double> p, std::span<const double> o) {
  long double mean = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double e = static_cast<long double>(p[i]) - o[i];
    mean += (e * e - mean) / static_cast<long double>(i + 1);
  }
  return static_cast<double>(std::sqrt(mean));
}

// Single-pass co-moment update (Welford) for Pearson correlation.
inline double streaming_pearson(std::span<const double> p, std::span<const double> o) {
  long double mx = 0, my = 0, cxx = 0, cyy = 0, cxy = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double n = static_cast<long double>(i + 1);
    const long double dx = p[i] - mx;
    const long double dy = o[i] - my;
    mx += dx / n;
    my += dy / n;
    cxx += dx * (p[i] - mx);
    cyy += dy * (o[i] - my);
    cxy += dx * (o[i] - my);
  }
  return static_cast<double>(cxy / std::sqrt(cxx * cyy));
}

// Conjugate gradient on the least-squares problem (CGLS), never forming the
// normal-equation matrix.
template <std::size_t N>
std::array<double, N> cgls(const std::vector<std::array<double, N>>& x, std::span<const double> y,
                           int iterations = 500) {
  using V = std::array<long double, N>;
  const std::size_t m = x.size();
  auto apply = [&](const V& b) {
    std::vector<long double> r(m, 0.0L);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < N; ++j) r[i] += x[i][j] * b[j];
    return r;
  };
  auto apply_t = [&](const std::vector<long double>& r) {
    V g{};
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < N; ++j) g[j] += x[i][j] * r[i];
    return g;
  };
  auto dot = [](const V& a, const V& b) {
    long double s = 0;
    for (std::size_t j = 0; j < N; ++j) s += a[j] * b[j];
    return s;
  };
  V beta{};
  std::vector<long double> r(y.begin(), y.end());
  V s = apply_t(r);
  V p = s;
  long double gamma = dot(s, s);
  const long double tolerance = 1e-30L * gamma;
  for (int it = 0; it < iterations && gamma > tolerance; ++it) {
    const auto q = apply(p);
    long double qq = 0;
    for (auto v : q) qq += v * v;
    if (qq == 0.0L) break;
    const long double alpha = gamma / qq;
    for (std::size_t j = 0; j < N; ++j) beta[j] += alpha * p[j];
    for (std::size_t i = 0; i < m; ++i) r[i] -= alpha * q[i];
    s = apply_t(r);
    const long double next = dot(s, s);
    for (std::size_t j = 0; j < N; ++j) p[j] = s[j] + next / gamma * p[j];
    gamma = next;
  }
  std::array<double, N> out{};
  for (std::size_t j = 0; j < N; ++j) out[j] = static_cast<double>(beta[j]);
  return out;
}

}  // namespace agrimeta::testing
