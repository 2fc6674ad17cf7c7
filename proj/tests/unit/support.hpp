#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "tvflow/tvflow.hpp"

namespace tvtest {

/// Deterministic generator; TVFLOW_SEED shifts the corpus.
inline std::mt19937_64 rng(std::uint64_t salt) { return std::mt19937_64(tvflow::seed_from_env(20240601) + salt); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

/// Random step function with `k` plateaus on [0, 1).
inline tvflow::StepFunction1D random_step(std::mt19937_64& g, std::size_t k) {
  std::vector<double> values(k), lengths(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    values[i] = uniform(g, -1.0, 1.0);
    lengths[i] = uniform(g, 0.1, 1.0);
    total += lengths[i];
  }
  for (double& l : lengths) l /= total;
  return tvflow::StepFunction1D::from_lengths(values, lengths, 0.0);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Direct DFT coefficient sum sum_{m != 0} |m|^{2s} |a_m|^2, a_m = DFT/N, O(N^2).
inline double naive_hs_squared(const std::vector<double>& u, double length, double s) {
  const std::size_t n = u.size();
  double acc = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * M_PI * static_cast<double>(m * j % n) / static_cast<double>(n);
      re += u[j] * std::cos(ang);
      im += u[j] * std::sin(ang);
    }
    const double freq = static_cast<double>(m <= n / 2 ? m : n - m);
    acc += std::pow(freq, 2.0 * s) * (re * re + im * im) / static_cast<double>(n * n);
  }
  return length * acc;
}

}  // namespace tvtest
