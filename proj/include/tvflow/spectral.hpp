#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "tvflow/core.hpp"

namespace tvflow {

namespace detail {
/// FFTW planning is not thread-safe; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Real-to-complex transform pair of fixed length owning its FFTW plans.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    require(n >= 2, ErrorCode::InvalidArgument, "transform length must be >= 2");
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard lock(detail::fftw_planner_mutex());
    const int len = static_cast<int>(n);
    forward_ = fftw_plan_dft_r2c_1d(len, in_, out_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(len, out_, in_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(backward_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  /// Unnormalized DFT, bins 0..n/2.
  std::vector<std::complex<double>> forward(const std::vector<double>& x) {
    require(x.size() == n_, ErrorCode::InvalidArgument, "transform length mismatch");
    std::copy(x.begin(), x.end(), in_);
    fftw_execute(forward_);
    std::vector<std::complex<double>> out(bins());
    for (std::size_t k = 0; k < bins(); ++k) out[k] = {out_[k][0], out_[k][1]};
    return out;
  }

  /// Inverse of forward (normalized by 1/n).
  std::vector<double> inverse(const std::vector<std::complex<double>>& X) {
    require(X.size() == bins(), ErrorCode::InvalidArgument, "spectrum length mismatch");
    for (std::size_t k = 0; k < bins(); ++k) {
      out_[k][0] = X[k].real();
      out_[k][1] = X[k].imag();
    }
    fftw_execute(backward_);
    std::vector<double> x(in_, in_ + n_);
    for (double& v : x) v /= static_cast<double>(n_);
    return x;
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

/// Fourier multiplier |m|^{2s} on the mean-free periodic grid, m the integer
/// frequency; the mean mode is annihilated.
class SpectralOperator {
 public:
  SpectralOperator(std::size_t n, double s) : fft_(std::make_shared<RealFft>(n)), s_(s), mult_(n / 2 + 1, 0.0) {
    for (std::size_t k = 1; k < mult_.size(); ++k) mult_[k] = std::pow(static_cast<double>(k), 2.0 * s);
  }

  double order() const noexcept { return s_; }
  std::size_t size() const noexcept { return fft_->size(); }
  const std::vector<double>& multipliers() const noexcept { return mult_; }
  RealFft& fft() const { return *fft_; }

  /// Applies |m|^{2 s * power} (power = 1 for the operator, -1 for its inverse on mean-free data).
  std::vector<double> apply(const std::vector<double>& x, double power = 1.0) const {
    auto X = fft_->forward(x);
    X[0] = 0.0;
    for (std::size_t k = 1; k < X.size(); ++k) X[k] *= power == 1.0 ? mult_[k] : std::pow(mult_[k], power);
    return fft_->inverse(X);
  }

 private:
  std::shared_ptr<RealFft> fft_;
  double s_;
  std::vector<double> mult_;
};

/// Homogeneous Sobolev norm (L sum_{m != 0} |m|^{2s} |a_m|^2)^{1/2}, a_m = DFT/N.
/// The mean mode is ignored, so a non-zero mean is effectively removed.
inline double hs_norm(const GridSignal& u, double s, RealFft* fft = nullptr) {
  require(u.geometry() == GridGeometry::Periodic, ErrorCode::InvalidArgument, "Sobolev norms need a periodic grid");
  std::unique_ptr<RealFft> own;
  if (!fft || fft->size() != u.size()) {
    own = std::make_unique<RealFft>(u.size());
    fft = own.get();
  }
  const auto X = fft->forward(u.samples());
  const std::size_t n = u.size();
  double acc = 0.0;
  for (std::size_t k = 1; k < X.size(); ++k) {
    const double twice = (n % 2 == 0 && k == n / 2) ? 1.0 : 2.0;
    acc += twice * std::pow(static_cast<double>(k), 2.0 * s) * std::norm(X[k]);
  }
  return std::sqrt(u.extent() * acc) / static_cast<double>(n);
}

}  // namespace tvflow
