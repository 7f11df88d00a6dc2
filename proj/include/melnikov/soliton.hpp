#pragma once

// One-soliton family with a self-consistent source: closed forms, the c(t)
// flows, finite-time annihilation and the residue identity at one double point.

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "melnikov/error.hpp"
#include "melnikov/grid.hpp"
#include "melnikov/io.hpp"

namespace melnikov::soliton {

struct SolitonState {
  double kappa = 1.0;
  double c = 0.0;

  SolitonState() = default;
  SolitonState(double kappa_, double c_) : kappa(kappa_), c(c_) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("SolitonState: kappa must be positive");
    if (!std::isfinite(c)) throw InvalidArgument("SolitonState: c must be finite");
  }

  bool regular() const { return c > 0.0; }

  /// Peak position ln(2 kappa / c) / (2 kappa); only defined for c > 0.
  double peak_position() const {
    if (c <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::log(2.0 * kappa / c) / (2.0 * kappa);
  }
};

enum class FlowKind { standard_kdv, melnikov, melnikov_reversed };

inline std::string to_string(FlowKind k) {
  switch (k) {
    case FlowKind::standard_kdv: return "standard_kdv";
    case FlowKind::melnikov: return "melnikov";
    case FlowKind::melnikov_reversed: return "melnikov_reversed";
  }
  return "?";
}

inline FlowKind flow_kind_from_string(const std::string& s) {
  if (s == "standard_kdv") return FlowKind::standard_kdv;
  if (s == "melnikov") return FlowKind::melnikov;
  if (s == "melnikov_reversed") return FlowKind::melnikov_reversed;
  throw InvalidArgument("unknown flow kind '" + s + "'");
}

struct FlowSetting {
  FlowKind kind = FlowKind::melnikov;
  double c0 = 0.5;
  double kappa = 1.0;

  /// Right-hand side dc/dt.
  double rate(double c) const {
    const double k3 = kappa * kappa * kappa;
    switch (kind) {
      case FlowKind::standard_kdv: return k3 * c;
      case FlowKind::melnikov: return k3 * c - 1.0;
      case FlowKind::melnikov_reversed: return -(k3 * c - 1.0);
    }
    return 0.0;
  }
};

namespace detail {

/// D = 2k e^{-kx} + c e^{kx} and its x-derivative.
struct Denominator {
  double d;
  double dp;
  double grow;  // e^{kx}
};

inline Denominator denominator(const SolitonState& s, double x) {
  const double k = s.kappa;
  const double decay = std::exp(-k * x);
  const double grow = std::exp(k * x);
  const double a = 2.0 * k * decay;
  const double b = s.c * grow;
  const double d = a + b;
  if (!std::isfinite(d) || std::abs(d) <= 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(a) + std::abs(b))) {
    std::ostringstream os;
    os << "soliton denominator vanishes at x = " << x << " (kappa = " << k << ", c = " << s.c << ")";
    throw SingularPoint(os.str());
  }
  return {d, k * (b - a), grow};
}

}  // namespace detail

inline double potential(const SolitonState& s, double x) {
  const auto q = detail::denominator(s, x);
  return -16.0 * s.c * s.kappa * s.kappa * s.kappa / (q.d * q.d);
}

/// d^order u / dx^order for order 0..3.
inline double potential_dx(const SolitonState& s, double x, int order) {
  const auto q = detail::denominator(s, x);
  const double k = s.kappa;
  const double k2 = k * k;
  const double a = 32.0 * s.c * k2 * k;
  const double d = q.d;
  const double p = q.dp;
  const double d2 = d * d;
  const double d3 = d2 * d;
  switch (order) {
    case 0: return -0.5 * a / d2;
    case 1: return a * p / d3;
    case 2: return a * (k2 / d2 - 3.0 * p * p / (d2 * d2));
    case 3: return a * (-8.0 * k2 * p / d3 + 12.0 * p * p * p / (d3 * d2));
    default: throw InvalidArgument("potential_dx: order must be 0..3");
  }
}

inline double chi(const SolitonState& s, double x) {
  const auto q = detail::denominator(s, x);
  return -2.0 * s.c * s.kappa * q.grow / q.d;
}

inline double psi_kappa(const SolitonState& s, double x) {
  const auto q = detail::denominator(s, x);
  return 2.0 * s.kappa / q.d;
}

/// d^order psi_kappa / dx^order for order 0..2.
inline double psi_kappa_dx(const SolitonState& s, double x, int order) {
  const auto q = detail::denominator(s, x);
  const double k = s.kappa;
  const double d = q.d;
  const double p = q.dp;
  switch (order) {
    case 0: return 2.0 * k / d;
    case 1: return -2.0 * k * p / (d * d);
    case 2: return -2.0 * k * (k * k / d - 2.0 * p * p / (d * d * d));
    default: throw InvalidArgument("psi_kappa_dx: order must be 0..2");
  }
}

/// Source term 2 d/dx psi_kappa^2.
inline double source_dx(const SolitonState& s, double x) {
  return 4.0 * psi_kappa_dx(s, x, 0) * psi_kappa_dx(s, x, 1);
}

/// Rational factor 1 + chi/(lambda + kappa) of the Baker-Akhiezer function.
inline std::complex<double> ba_factor(const SolitonState& s, std::complex<double> lambda, double chi_value) {
  const std::complex<double> shifted = lambda + s.kappa;
  if (std::abs(shifted) <= 1e-14 * std::max(1.0, s.kappa)) {
    std::ostringstream os;
    os << "Baker-Akhiezer function evaluated at its pole lambda = " << -s.kappa;
    throw PoleAtDivisor(os.str());
  }
  return 1.0 + chi_value / shifted;
}

inline std::complex<double> ba_psi(const SolitonState& s, std::complex<double> lambda, double x) {
  const double ch = chi(s, x);
  return std::exp(lambda * x) * ba_factor(s, lambda, ch);
}

/// (lambda + kappa) psi(lambda) at lambda = -kappa, the residue at the pole.
inline double ba_residue(const SolitonState& s, double x) { return std::exp(-s.kappa * x) * chi(s, x); }

// ---------------------------------------------------------------- flows

inline double c_trajectory(const FlowSetting& f, double t) {
  const double k3 = f.kappa * f.kappa * f.kappa;
  const double fixed = 1.0 / k3;
  switch (f.kind) {
    case FlowKind::standard_kdv: return f.c0 * std::exp(k3 * t);
    case FlowKind::melnikov: return fixed + (f.c0 - fixed) * std::exp(k3 * t);
    case FlowKind::melnikov_reversed: return fixed + (f.c0 - fixed) * std::exp(-k3 * t);
  }
  return 0.0;
}

/// Time at which the Melnikov flow drives c from c0 to zero.
inline double annihilation_time(double kappa, double c0) {
  if (!(kappa > 0.0)) throw InvalidArgument("annihilation_time: kappa must be positive");
  const double k3 = kappa * kappa * kappa;
  if (!(c0 > 0.0) || !(c0 < 1.0 / k3)) {
    std::ostringstream os;
    os << "c0 = " << c0 << " is outside the annihilation regime (0, " << 1.0 / k3 << ")";
    throw NotInAnnihilationRegime(os.str());
  }
  return -std::log1p(-k3 * c0) / k3;
}

/// Classical RK4 for the scalar c-equation; used to cross-check the closed forms.
inline double c_trajectory_rk4(const FlowSetting& f, double t, std::size_t steps) {
  double c = f.c0;
  const double h = t / static_cast<double>(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double k1 = f.rate(c);
    const double k2 = f.rate(c + 0.5 * h * k1);
    const double k3 = f.rate(c + 0.5 * h * k2);
    const double k4 = f.rate(c + h * k3);
    c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return c;
}

/// sup |u| over [lo, hi] using n samples plus the peak if it lies inside.
inline double sup_abs_potential(const SolitonState& s, double lo, double hi, std::size_t n = 2001) {
  double best = 0.0;
  try {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      best = std::max(best, std::abs(potential(s, x)));
    }
    const double x0 = s.peak_position();
    if (std::isfinite(x0) && x0 >= lo && x0 <= hi) best = std::max(best, std::abs(potential(s, x0)));
  } catch (const SingularPoint&) {
    return std::numeric_limits<double>::infinity();
  }
  return best;
}

/// Columns t, c, x0, sup_u.
inline io::CsvTable trajectory_table(const FlowSetting& f, const std::vector<double>& times, double window_lo = -20.0,
                                     double window_hi = 20.0) {
  io::CsvTable table({"t", "c", "x0", "sup_u"});
  for (double t : times) {
    const double c = c_trajectory(f, t);
    const SolitonState s(f.kappa, c);
    table.add_row({t, c, s.peak_position(), sup_abs_potential(s, window_lo, window_hi)});
  }
  return table;
}

// ---------------------------------------------------------- verification

/// max_x |d_c u + 2 d_x psi_kappa^2| with d_c by central differences at h and h/2.
inline StepHalvingResult verify_c_derivative(const SolitonState& s, const std::vector<double>& xs, double h = 0.0) {
  if (h <= 0.0) h = default_fd_step(s.c);
  auto residual = [&](double step) {
    double worst = 0.0;
    for (double x : xs) {
      const double dc =
          central_difference([&](double c) { return potential(SolitonState(s.kappa, c), x); }, s.c, step);
      worst = std::max(worst, std::abs(dc + source_dx(s, x)));
    }
    return worst;
  };
  return {residual(h), residual(0.5 * h)};
}

/// Residual of u_t = scale (u_xxx/4 - 3/2 u u_x) + source_weight * 2 d_x psi_kappa^2
/// along c(t) of the given flow; u_t by central differences in t.
inline StepHalvingResult verify_flow_pde(const FlowSetting& f, const std::vector<double>& ts,
                                         const std::vector<double>& xs, double kdv_scale, double source_weight,
                                         double h = 0.0) {
  auto residual = [&](double step_scale) {
    double worst = 0.0;
    for (double t : ts) {
      const double step = (h > 0.0 ? h : default_fd_step(t)) * step_scale;
      const SolitonState s(f.kappa, c_trajectory(f, t));
      for (double x : xs) {
        const double ut = central_difference(
            [&](double tt) { return potential(SolitonState(f.kappa, c_trajectory(f, tt)), x); }, t, step);
        const double u = potential_dx(s, x, 0);
        const double kdv = 0.25 * potential_dx(s, x, 3) - 1.5 * u * potential_dx(s, x, 1);
        worst = std::max(worst, std::abs(ut - kdv_scale * kdv - source_weight * source_dx(s, x)));
      }
    }
    return worst;
  };
  return {residual(1.0), residual(0.5)};
}

/// Melnikov flow u_t = scale K[u] + 2 d_x psi_kappa^2 along dc/dt = kappa^3 c - 1.
/// With the c-equation as given, the dispersive part must carry scale 1/2.
inline StepHalvingResult verify_melnikov_pde(double kappa, double c0, const std::vector<double>& ts,
                                             const std::vector<double>& xs, double kdv_scale = 0.5) {
  return verify_flow_pde({FlowKind::melnikov, c0, kappa}, ts, xs, kdv_scale, 1.0);
}

/// Source-free flow dc/dt = kappa^3 c against u_t = scale K[u].
inline StepHalvingResult verify_standard_kdv(double kappa, double c0, const std::vector<double>& ts,
                                             const std::vector<double>& xs, double kdv_scale = 0.5) {
  return verify_flow_pde({FlowKind::standard_kdv, c0, kappa}, ts, xs, kdv_scale, 0.0);
}

/// max over xs of |-psi'' + u psi + kappa^2 psi| with analytic derivatives.
inline double schrodinger_residual(const SolitonState& s, const std::vector<double>& xs) {
  double worst = 0.0;
  for (double x : xs) {
    const double p = psi_kappa_dx(s, x, 0);
    worst = std::max(worst, std::abs(-psi_kappa_dx(s, x, 2) + potential(s, x) * p + s.kappa * s.kappa * p));
  }
  return worst;
}

// --------------------------------------------------------- residue flow

inline constexpr std::size_t kContourNodes = 128;

namespace detail {

/// -(1/M) sum f(lambda_j) lambda_j over the circle |lambda| = R, i.e. the residue at
/// infinity of f(lambda) d lambda with the circle traversed counter-clockwise.
template <class F>
std::complex<double> residue_at_infinity(F&& f, double radius, std::size_t nodes) {
  std::complex<double> sum = 0.0;
  for (std::size_t j = 0; j < nodes; ++j) {
    const double theta = kTwoPi * (static_cast<double>(j) + 0.5) / static_cast<double>(nodes);
    const std::complex<double> lambda = std::polar(radius, theta);
    sum += f(lambda) * lambda;
  }
  return -sum / static_cast<double>(nodes);
}

inline void check_radius(const SolitonState& s, double radius) {
  if (!(radius > 2.0 * s.kappa)) {
    std::ostringstream os;
    os << "contour radius " << radius << " must exceed 2 kappa = " << 2.0 * s.kappa;
    throw ContourTooSmall(os.str());
  }
}

/// psi(lambda) psi(-lambda); the exponential factors cancel.
inline std::complex<double> psi_product(const SolitonState& s, std::complex<double> lambda, double ch) {
  return ba_factor(s, lambda, ch) * ba_factor(s, -lambda, ch);
}

/// d/dx of psi(lambda) psi(-lambda), using chi' = u/2.
inline std::complex<double> psi_product_dx(const SolitonState& s, std::complex<double> lambda, double ch,
                                           double chi_dx) {
  const std::complex<double> p = 1.0 / (lambda + s.kappa);
  const std::complex<double> m = 1.0 / (s.kappa - lambda);
  return chi_dx * (p + m + 2.0 * ch * p * m);
}

/// Raw residue of lambda^3 psi(lambda) psi(-lambda) d lambda at infinity.
inline double raw_residue(const SolitonState& s, double x, double radius, std::size_t nodes) {
  check_radius(s, radius);
  const double ch = chi(s, x);
  return residue_at_infinity([&](std::complex<double> l) { return l * l * l * psi_product(s, l, ch); }, radius, nodes)
      .real();
}

inline double raw_residue_dx(const SolitonState& s, double x, double radius, std::size_t nodes) {
  check_radius(s, radius);
  const double ch = chi(s, x);
  const double chi_dx = 0.5 * potential(s, x);
  return residue_at_infinity([&](std::complex<double> l) { return l * l * l * psi_product_dx(s, l, ch, chi_dx); },
                             radius, nodes)
      .real();
}

inline double kdv_part(const SolitonState& s, double x) {
  return 0.25 * potential_dx(s, x, 3) - 1.5 * potential_dx(s, x, 0) * potential_dx(s, x, 1);
}

}  // namespace detail

/// One-point orientation calibration of the residue at infinity.
struct ResidueCalibration {
  double kappa = 1.0;
  double c = 2.0;
  double x = 0.5;
  double radius = 5.0;
  double lhs_raw = 0.0;  // 2 d_x [-raw residue]
  double rhs = 0.0;      // u_xxx/4 - 3/2 u u_x
  int sign = 1;
};

/// The sign that makes 2 d_x[-residue_flow] equal the KdV vector field at one point.
/// The peak (x = 0 for kappa = 1, c = 2) is a zero of both sides, so the point is
/// taken off-peak.
inline ResidueCalibration calibrate_residue(double kappa = 1.0, double c = 2.0, double x = 0.5, double radius = 5.0) {
  ResidueCalibration cal{kappa, c, x, radius};
  const SolitonState s(kappa, c);
  cal.lhs_raw = -2.0 * detail::raw_residue_dx(s, x, radius, kContourNodes);
  cal.rhs = detail::kdv_part(s, x);
  if (std::abs(cal.rhs) < 1e-6 || std::abs(cal.lhs_raw) < 1e-6) {
    throw InvalidArgument("calibrate_residue: calibration point is a zero of the identity");
  }
  cal.sign = (cal.lhs_raw > 0.0) == (cal.rhs > 0.0) ? 1 : -1;
  return cal;
}

inline const ResidueCalibration& residue_calibration() {
  static const ResidueCalibration cal = calibrate_residue();
  return cal;
}

/// Calibrated residue at infinity of lambda^3 psi(lambda) psi(-lambda) d lambda.
inline double residue_flow(const SolitonState& s, double x, double radius, std::size_t nodes = kContourNodes) {
  return residue_calibration().sign * detail::raw_residue(s, x, radius, nodes);
}

/// x-derivative of residue_flow, differentiating under the contour integral.
inline double residue_flow_dx(const SolitonState& s, double x, double radius, std::size_t nodes = kContourNodes) {
  return residue_calibration().sign * detail::raw_residue_dx(s, x, radius, nodes);
}

/// max_x |2 d_x[-residue_flow] - (u_xxx/4 - 3/2 u u_x)|.
inline double residue_identity_residual(const SolitonState& s, const std::vector<double>& xs, double radius) {
  double worst = 0.0;
  for (double x : xs) {
    worst = std::max(worst, std::abs(-2.0 * residue_flow_dx(s, x, radius) - detail::kdv_part(s, x)));
  }
  return worst;
}

}  // namespace melnikov::soliton
