#pragma once

// Uniform periodic grids, Fourier differentiation/interpolation, quadrature
// and finite-difference helpers shared by the rest of the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "melnikov/error.hpp"

namespace melnikov {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Equispaced nodes x_j = j L / n on [0, L).
class PeriodicGrid {
 public:
  PeriodicGrid(std::size_t n, double length) : n_(n), length_(length) {
    if (n < 8 || n % 2 != 0) {
      throw InvalidArgument("PeriodicGrid: n must be even and >= 8, got " + std::to_string(n));
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
      throw InvalidArgument("PeriodicGrid: period must be positive");
    }
  }

  std::size_t size() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / static_cast<double>(n_); }
  double node(std::size_t j) const { return static_cast<double>(j) * spacing(); }

  std::vector<double> nodes() const {
    std::vector<double> x(n_);
    for (std::size_t j = 0; j < n_; ++j) x[j] = node(j);
    return x;
  }

  /// Signed integer mode index of FFT bin j: 0..n/2 then -n/2+1..-1.
  long mode(std::size_t j) const {
    const long n = static_cast<long>(n_);
    const long jj = static_cast<long>(j);
    return jj <= n / 2 ? jj : jj - n;
  }

  /// Angular wavenumber 2 pi k / L of FFT bin j.
  double wavenumber(std::size_t j) const { return kTwoPi * static_cast<double>(mode(j)) / length_; }

  double max_wavenumber() const { return kTwoPi * static_cast<double>(n_ / 2) / length_; }

  bool operator==(const PeriodicGrid& o) const { return n_ == o.n_ && length_ == o.length_; }

 private:
  std::size_t n_;
  double length_;
};

/// Complex samples of a function on a PeriodicGrid.  A field flagged real
/// has imaginary parts that are exactly zero.
class Field {
 public:
  Field(PeriodicGrid grid, std::vector<cplx> values, bool real = false)
      : grid_(grid), values_(std::move(values)), real_(real) {
    if (values_.size() != grid_.size()) {
      throw InvalidArgument("Field: sample count does not match grid size");
    }
    if (real_) {
      for (auto& v : values_) v = cplx(v.real(), 0.0);
    }
  }

  static Field from_real(PeriodicGrid grid, std::span<const double> values) {
    std::vector<cplx> v(values.begin(), values.end());
    return Field(grid, std::move(v), true);
  }

  template <class F>
  static Field sample(PeriodicGrid grid, F&& f, bool real = false) {
    std::vector<cplx> v(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) v[j] = cplx(f(grid.node(j)));
    return Field(grid, std::move(v), real);
  }

  static Field zeros(PeriodicGrid grid) { return Field(grid, std::vector<cplx>(grid.size()), true); }

  const PeriodicGrid& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  const cplx& operator[](std::size_t j) const { return values_[j]; }
  std::size_t size() const { return values_.size(); }
  bool is_real() const { return real_; }

  std::vector<double> real_part() const {
    std::vector<double> r(values_.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = values_[j].real();
    return r;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  double max_imag() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v.imag()));
    return m;
  }

  friend Field operator+(const Field& a, const Field& b) { return combine(a, b, 1.0, 1.0); }
  friend Field operator-(const Field& a, const Field& b) { return combine(a, b, 1.0, -1.0); }
  friend Field operator*(cplx s, const Field& a) {
    std::vector<cplx> v(a.values_);
    for (auto& x : v) x *= s;
    return Field(a.grid_, std::move(v), a.real_ && s.imag() == 0.0);
  }

  static Field combine(const Field& a, const Field& b, cplx sa, cplx sb) {
    if (!(a.grid_ == b.grid_)) throw InvalidArgument("Field: grid mismatch");
    std::vector<cplx> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = sa * a.values_[j] + sb * b.values_[j];
    const bool real = a.real_ && b.real_ && sa.imag() == 0.0 && sb.imag() == 0.0;
    return Field(a.grid_, std::move(v), real);
  }

  /// Pointwise product.
  friend Field operator*(const Field& a, const Field& b) {
    if (!(a.grid_ == b.grid_)) throw InvalidArgument("Field: grid mismatch");
    std::vector<cplx> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = a.values_[j] * b.values_[j];
    return Field(a.grid_, std::move(v), a.real_ && b.real_);
  }

 private:
  PeriodicGrid grid_;
  std::vector<cplx> values_;
  bool real_;
};

namespace detail {

inline std::vector<cplx> fft_forward(std::span<const cplx> in) {
  Eigen::FFT<double> fft;
  std::vector<cplx> src(in.begin(), in.end());
  std::vector<cplx> out;
  fft.fwd(out, src);
  return out;
}

/// Inverse transform including the 1/n factor.
inline std::vector<cplx> fft_inverse(std::span<const cplx> in) {
  Eigen::FFT<double> fft;
  std::vector<cplx> src(in.begin(), in.end());
  std::vector<cplx> out;
  fft.inv(out, src);
  return out;
}

}  // namespace detail

/// Normalized Fourier coefficients c_k = (1/n) sum_j f_j exp(-i k_j x_j), in FFT bin order.
inline std::vector<cplx> spectrum(const Field& f) {
  auto c = detail::fft_forward(f.values());
  const double inv_n = 1.0 / static_cast<double>(f.size());
  for (auto& v : c) v *= inv_n;
  return c;
}

inline Field from_spectrum(const PeriodicGrid& grid, std::span<const cplx> coeffs, bool real) {
  std::vector<cplx> scaled(coeffs.begin(), coeffs.end());
  const double n = static_cast<double>(grid.size());
  for (auto& v : scaled) v *= n;
  return Field(grid, detail::fft_inverse(scaled), real);
}

/// order-th derivative through the Fourier multiplier (i k)^order.  The
/// Nyquist bin is dropped for odd orders so that real fields stay real.
inline Field spectral_derivative(const Field& f, int order) {
  if (order < 1) throw InvalidArgument("spectral_derivative: order must be positive");
  const auto& g = f.grid();
  auto c = detail::fft_forward(f.values());
  const std::size_t nyquist = g.size() / 2;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j == nyquist && order % 2 == 1) {
      c[j] = 0.0;
      continue;
    }
    c[j] *= std::pow(cplx(0.0, g.wavenumber(j)), order);
  }
  return Field(g, detail::fft_inverse(c), f.is_real());
}

/// Zero-mean antiderivative of the zero-mean part of f.
inline Field spectral_antiderivative(const Field& f) {
  const auto& g = f.grid();
  auto c = detail::fft_forward(f.values());
  const std::size_t nyquist = g.size() / 2;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j == 0 || j == nyquist) {
      c[j] = 0.0;
      continue;
    }
    c[j] /= cplx(0.0, g.wavenumber(j));
  }
  return Field(g, detail::fft_inverse(c), f.is_real());
}

/// (1/n) sum of samples: the period average for band-limited data.
inline cplx mean(const Field& f) {
  cplx s = 0.0;
  for (const auto& v : f.values()) s += v;
  return s / static_cast<double>(f.size());
}

/// Root-mean-square of the samples.
inline double grid_rms(const Field& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  return std::sqrt(s / static_cast<double>(f.size()));
}

/// sqrt(sum |c_k|^2) of the normalized spectrum; equals grid_rms by Parseval.
inline double spectral_rms(const Field& f) {
  double s = 0.0;
  for (const auto& c : spectrum(f)) s += std::norm(c);
  return std::sqrt(s);
}

/// Evaluates the trigonometric interpolant of a field anywhere on the line.
/// The Nyquist bin contributes c cos(k_N x), which keeps the interpolant of
/// real data real.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const Field& f)
      : length_(f.grid().length()), half_(f.size() / 2), real_(f.is_real()), coeffs_(spectrum(f)) {}

  cplx operator()(double x) const {
    const double w = kTwoPi / length_;
    const cplx step = std::polar(1.0, w * x);
    const std::size_t n = coeffs_.size();
    cplx acc = coeffs_[0];
    cplx phase = 1.0;
    if (real_) {
      double re = coeffs_[0].real();
      for (std::size_t k = 1; k < half_; ++k) {
        phase *= step;
        re += 2.0 * (coeffs_[k].real() * phase.real() - coeffs_[k].imag() * phase.imag());
      }
      phase *= step;
      re += coeffs_[half_].real() * phase.real();
      return re;
    }
    cplx inv_phase = 1.0;
    const cplx inv_step = std::conj(step);
    for (std::size_t k = 1; k < half_; ++k) {
      phase *= step;
      inv_phase *= inv_step;
      acc += coeffs_[k] * phase + coeffs_[n - k] * inv_phase;
    }
    phase *= step;
    acc += coeffs_[half_] * phase.real();
    return acc;
  }

  /// Real part only; cheaper path used by ODE right-hand sides.
  double real_value(double x) const { return (*this)(x).real(); }

  bool is_real() const { return real_; }
  double period() const { return length_; }

 private:
  double length_;
  std::size_t half_;
  bool real_;
  std::vector<cplx> coeffs_;
};

inline cplx trig_interpolate(const Field& f, double x) { return TrigInterpolant(f)(x); }

/// Resamples f at x_j + shift on its own grid (periodic translation).
inline Field translate(const Field& f, double shift) {
  TrigInterpolant ip(f);
  const auto& g = f.grid();
  std::vector<cplx> v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) v[j] = ip(g.node(j) + shift);
  return Field(g, std::move(v), f.is_real());
}

/// Fourth-order central stencil (-g(x+2h) + 8g(x+h) - 8g(x-h) + g(x-2h)) / 12h.
template <class G>
auto central_difference(G&& g, double x0, double h) {
  return (-g(x0 + 2.0 * h) + 8.0 * g(x0 + h) - 8.0 * g(x0 - h) + g(x0 - 2.0 * h)) / (12.0 * h);
}

/// Default FD step: cube root of machine epsilon scaled by the argument.
inline double default_fd_step(double x0) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(x0));
}

/// Residual of an identity measured with FD steps h and h/2.
struct StepHalvingResult {
  double residual_h = 0.0;
  double residual_half = 0.0;

  double residual() const { return std::min(residual_h, residual_half); }

  /// log2 of the residual ratio; large when truncation error dominates.
  double observed_order() const {
    if (residual_half <= 0.0) return std::numeric_limits<double>::infinity();
    return std::log2(residual_h / residual_half);
  }

  /// Either the residual decays at order >= min_order, or both residuals are
  /// already below floor (round-off regime where no decay is visible).
  bool consistent(double min_order = 3.0, double floor = 1e-9) const {
    if (residual_h <= floor && residual_half <= floor) return true;
    return observed_order() >= min_order;
  }
};

/// Number of worker threads: MELNIKOV_THREADS if set, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("MELNIKOV_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n).  Each index is processed exactly once, so
/// results written to slot i do not depend on scheduling.  The first
/// exception (lowest index) is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace melnikov
