#pragma once

// Spectral analysis of the periodic Schroedinger operator H = -d^2/dx^2 + u(x):
// monodromy, Hill discriminant, Bloch multipliers and Bloch solutions, band
// edges and closed gaps (double points of the spectral curve).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/numeric/odeint.hpp>

#include "melnikov/error.hpp"
#include "melnikov/grid.hpp"
#include "melnikov/io.hpp"

namespace melnikov::floquet {

/// Real periodic potential u(x); the grid length is the period T.
class PeriodicPotential {
 public:
  explicit PeriodicPotential(Field field)
      : field_(std::move(field)), interp_(std::make_shared<const TrigInterpolant>(field_)) {
    if (!field_.is_real()) throw InvalidArgument("PeriodicPotential: potential must be real-valued");
  }

  template <class F>
  static PeriodicPotential sample(PeriodicGrid grid, F&& f) {
    return PeriodicPotential(Field::sample(grid, [&](double x) { return cplx(f(x), 0.0); }, true));
  }

  static PeriodicPotential zero(double period, std::size_t n = 16) {
    return PeriodicPotential(Field::zeros(PeriodicGrid(n, period)));
  }

  /// amplitude * cos(2 pi x / T).
  static PeriodicPotential cosine(double amplitude, double period, std::size_t n = 32) {
    return sample(PeriodicGrid(n, period), [=](double x) { return amplitude * std::cos(kTwoPi * x / period); });
  }

  const Field& field() const { return field_; }
  const PeriodicGrid& grid() const { return field_.grid(); }
  double period() const { return field_.grid().length(); }
  double operator()(double x) const { return interp_->real_value(x); }

 private:
  Field field_;
  std::shared_ptr<const TrigInterpolant> interp_;
};

/// One-period transfer matrix of -psi'' + u psi = E psi acting on (psi, psi').
struct Monodromy {
  cplx m11, m12, m21, m22;
  cplx energy;

  cplx trace() const { return m11 + m22; }
  cplx det() const { return m11 * m22 - m12 * m21; }
  double det_error() const { return std::abs(det() - 1.0); }
  /// det_error over the size of the products forming det.
  double relative_det_error() const {
    return det_error() / std::max(1.0, std::abs(m11 * m22) + std::abs(m12 * m21));
  }

  /// Delta^2 - 4 written as (m11 - m22)^2 + 4 m12 m21, which avoids the
  /// cancellation of the naive form near Delta = +-2.
  cplx discriminant_gap() const { return (m11 - m22) * (m11 - m22) + 4.0 * m12 * m21; }

  /// Max-entry distance from sign * Identity.
  double distance_to_scaled_identity(double sign) const {
    return std::max({std::abs(m11 - sign), std::abs(m12), std::abs(m21), std::abs(m22 - sign)});
  }
};

struct Multipliers {
  cplx plus;
  cplx minus;
  bool degenerate = false;
};

struct DiscriminantSample {
  cplx energy;
  cplx delta;
  cplx rho_plus;
  cplx rho_minus;
  cplx mu;
};

/// Bloch solution psi (multiplier rho) and its partner psi_star (multiplier
/// 1/rho), sampled on the potential's grid and normalized so that
/// mean(psi psi_star) = 1.
struct BlochPair {
  cplx energy;
  cplx rho;
  Field psi;
  Field psi_star;
  std::array<cplx, 2> psi_initial;       // (psi(0), psi'(0))
  std::array<cplx, 2> psi_star_initial;  // (psi*(0), psi*'(0))
  std::array<cplx, 2> psi_end;           // (psi(T), psi'(T))

  Field product() const { return psi * psi_star; }
};

struct EdgeInfo {
  double energy = 0.0;
  int level = 0;              // +2 or -2
  bool double_root = false;   // located as a tangency of Delta with +-2
  bool closed_gap = false;    // both double-point conditions hold
  double delta_derivative = 0.0;
  double identity_distance = 0.0;  // || M -+ I ||
};

struct GapReport {
  std::vector<double> band_edges;
  std::vector<double> closed_gaps;
  std::vector<std::pair<double, double>> open_gaps;
  std::vector<EdgeInfo> edges;
  std::size_t scan_points = 0;
  double scan_density = 0.0;  // samples per unit energy
  std::vector<std::string> warnings;
};

struct BandEdgeOptions {
  std::size_t scan_points = 2001;
  double root_tolerance = 1e-10;
  double derivative_tolerance = 1e-5;  // |Delta'(E')| for multiplicity two
  double identity_tolerance = 1e-5;    // ||M -+ I|| for a 2D solution space
  double tangency_tolerance = 1e-14;   // |Delta^2 - 4| at a tangency
  double derivative_step = 1e-4;
};

namespace detail {

using HillState = std::array<cplx, 4>;  // (phi1, phi1', phi2, phi2')

struct HillRun {
  std::vector<HillState> samples;  // at requested nodes
  HillState end;                   // at x = T
};

// Integration runs in extended precision: Delta reaches ~1e4 in deep gaps
// while absolute accuracy ~1e-10 is required.
using WideReal = long double;
using WideState = std::array<std::complex<WideReal>, 4>;

inline constexpr WideReal kRelTol = 1e-15L;
inline constexpr WideReal kAbsTol = 1e-17L;

inline HillState narrow(const WideState& s) {
  HillState out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = cplx(static_cast<double>(s[i].real()), static_cast<double>(s[i].imag()));
  }
  return out;
}

/// Integrates the fundamental matrix from x = 0 to x = T with an adaptive
/// Runge-Kutta-Fehlberg 7(8) pair, recording the state at each node in [0, T).
inline HillRun integrate_fundamental(const PeriodicPotential& u, cplx energy, std::span<const double> nodes) {
  namespace ode = boost::numeric::odeint;
  const WideReal period = u.period();
  const std::complex<WideReal> e_wide(energy.real(), energy.imag());
  auto rhs = [&](const WideState& y, WideState& dy, WideReal x) {
    const std::complex<WideReal> q = static_cast<WideReal>(u(static_cast<double>(x))) - e_wide;
    dy[0] = y[1];
    dy[1] = q * y[0];
    dy[2] = y[3];
    dy[3] = q * y[2];
  };
  std::vector<WideReal> times(nodes.begin(), nodes.end());
  const std::size_t skip = nodes.empty() || nodes.front() != 0.0 ? 1 : 0;
  if (skip) times.insert(times.begin(), 0.0L);
  times.push_back(period);

  HillRun run;
  run.samples.reserve(nodes.size());
  WideState y{1.0L, 0.0L, 0.0L, 1.0L};
  std::size_t index = 0;
  using Stepper = ode::runge_kutta_fehlberg78<WideState, WideReal, WideState, WideReal>;
  auto stepper = ode::make_controlled(kAbsTol, kRelTol, Stepper());
  const WideReal dt0 = std::min<WideReal>(0.05L, period / 16.0L);
  try {
    ode::integrate_times(stepper, rhs, y, times.begin(), times.end(), dt0, [&](const WideState& s, WideReal) {
      if (index >= skip && index < skip + nodes.size()) run.samples.push_back(narrow(s));
      if (index + 1 == times.size()) run.end = narrow(s);
      ++index;
    });
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << "Hill integration failed at E = " << energy << ": " << e.what();
    throw StepUnderflow(os.str());
  }
  for (const auto& v : run.end) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream os;
      os << "Hill integration produced non-finite values at E = " << energy;
      throw StepUnderflow(os.str());
    }
  }
  return run;
}

/// Monodromy together with its energy derivative, from the variational
/// system d/dx (Y_E) = A Y_E + (dA/dE) Y.
inline std::pair<HillState, HillState> integrate_with_energy_derivative(const PeriodicPotential& u, cplx energy) {
  namespace ode = boost::numeric::odeint;
  using State8 = std::array<std::complex<WideReal>, 8>;
  const std::complex<WideReal> e_wide(energy.real(), energy.imag());
  auto rhs = [&](const State8& y, State8& dy, WideReal x) {
    const std::complex<WideReal> q = static_cast<WideReal>(u(static_cast<double>(x))) - e_wide;
    for (std::size_t c = 0; c < 2; ++c) {
      const std::size_t b = 2 * c;
      dy[b] = y[b + 1];
      dy[b + 1] = q * y[b];
      dy[4 + b] = y[4 + b + 1];
      dy[4 + b + 1] = q * y[4 + b] - y[b];
    }
  };
  State8 y{1.0L, 0.0L, 0.0L, 1.0L, 0.0L, 0.0L, 0.0L, 0.0L};
  using Stepper = ode::runge_kutta_fehlberg78<State8, WideReal, State8, WideReal>;
  const WideReal period = u.period();
  try {
    ode::integrate_adaptive(ode::make_controlled(kAbsTol, kRelTol, Stepper()), rhs, y, 0.0L, period,
                            std::min<WideReal>(0.05L, period / 16.0L));
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << "Hill variational integration failed at E = " << energy << ": " << e.what();
    throw StepUnderflow(os.str());
  }
  WideState a{y[0], y[1], y[2], y[3]};
  WideState b{y[4], y[5], y[6], y[7]};
  return {narrow(a), narrow(b)};
}

inline Monodromy to_monodromy(const HillState& end, cplx energy) {
  return Monodromy{end[0], end[2], end[1], end[3], energy};
}

}  // namespace detail

inline Monodromy monodromy(const PeriodicPotential& u, cplx energy) {
  return detail::to_monodromy(detail::integrate_fundamental(u, energy, {}).end, energy);
}

/// dDelta/dE from the variational equations (no finite-difference noise).
inline cplx delta_energy_derivative(const PeriodicPotential& u, cplx energy) {
  const auto [m, dm] = detail::integrate_with_energy_derivative(u, energy);
  return dm[0] + dm[3];
}

/// Roots of rho^2 - delta rho + 1 = 0 with |rho_plus| >= 1; on the unit
/// circle the root with Im >= 0 (then Re >= 0) is rho_plus.
inline Multipliers multipliers(cplx delta) {
  const cplx s = std::sqrt(delta * delta - 4.0);
  cplx big = (delta + s) / 2.0;
  if (std::abs(delta - s) > std::abs(delta + s)) big = (delta - s) / 2.0;
  Multipliers m;
  m.degenerate = std::abs(delta * delta - 4.0) < 1e-14;
  if (m.degenerate) {
    m.plus = m.minus = delta / 2.0;
    return m;
  }
  cplx small = 1.0 / big;
  if (std::abs(std::abs(big) - 1.0) < 1e-12) {
    if (big.imag() < small.imag() || (big.imag() == small.imag() && big.real() < small.real())) std::swap(big, small);
  }
  m.plus = big;
  m.minus = small;
  return m;
}

inline DiscriminantSample sample_from(const Monodromy& m, double period) {
  DiscriminantSample s;
  s.energy = m.energy;
  s.delta = m.trace();
  const auto r = multipliers(s.delta);
  s.rho_plus = r.plus;
  s.rho_minus = r.minus;
  s.mu = cplx(0.0, -1.0) * std::log(r.plus) / period;
  return s;
}

inline DiscriminantSample discriminant(const PeriodicPotential& u, cplx energy) {
  return sample_from(monodromy(u, energy), u.period());
}

/// Element-wise discriminant; entries are computed independently, so the
/// result does not depend on evaluation order or thread count.
inline std::vector<DiscriminantSample> scan_discriminant(const PeriodicPotential& u, std::span<const cplx> energies) {
  std::vector<std::optional<DiscriminantSample>> slots(energies.size());
  parallel_for(energies.size(), [&](std::size_t i) { slots[i] = discriminant(u, energies[i]); });
  std::vector<DiscriminantSample> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(*s);
  return out;
}

/// Energy-range scan on a uniform grid of real energies.
inline std::vector<cplx> energy_grid(double e_min, double e_max, std::size_t count) {
  std::vector<cplx> e(count);
  for (std::size_t i = 0; i < count; ++i) {
    e[i] = count == 1 ? e_min : e_min + (e_max - e_min) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return e;
}

/// Multiplier carried by psi: the root with |rho| <= 1, or on the unit
/// circle the one with Im >= 0 (then Re >= 0).
inline cplx bloch_multiplier(const Multipliers& m) {
  if (std::abs(std::abs(m.plus) - 1.0) < 1e-12) return m.plus;
  return m.minus;
}

namespace detail {

/// Eigenvector of the monodromy for eigenvalue rho, as initial data (psi, psi').
inline std::array<cplx, 2> eigenvector(const Monodromy& m, cplx rho) {
  std::array<cplx, 2> a{m.m12, rho - m.m11};
  std::array<cplx, 2> b{rho - m.m22, m.m21};
  const double na = std::abs(a[0]) + std::abs(a[1]);
  const double nb = std::abs(b[0]) + std::abs(b[1]);
  auto v = na >= nb ? a : b;
  const double scale = std::max(std::abs(v[0]), std::abs(v[1]));
  return {v[0] / scale, v[1] / scale};
}

inline Field combine_columns(const PeriodicGrid& grid, const std::vector<HillState>& samples,
                             const std::array<cplx, 2>& v, bool real) {
  std::vector<cplx> out(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) out[j] = v[0] * samples[j][0] + v[1] * samples[j][2];
  return Field(grid, std::move(out), real);
}

}  // namespace detail

/// Tolerance on |Delta^2 - 4| below which the Bloch pair is refused.
inline constexpr double kBandEdgeExclusion = 1e-8;

inline BlochPair bloch_pair(const PeriodicPotential& u, cplx energy) {
  const auto& grid = u.grid();
  const auto nodes = grid.nodes();
  const auto run = detail::integrate_fundamental(u, energy, nodes);
  const auto m = detail::to_monodromy(run.end, energy);
  const cplx gap = m.discriminant_gap();
  if (std::abs(gap) < kBandEdgeExclusion) {
    std::ostringstream os;
    os << "bloch_pair: E = " << energy << " is within the band-edge exclusion zone (|Delta^2-4| = " << std::abs(gap)
       << ")";
    throw DegenerateEnergy(os.str());
  }
  const auto mult = multipliers(m.trace());
  const cplx rho = bloch_multiplier(mult);
  const cplx rho_star = 1.0 / rho;

  const bool real_energy = energy.imag() == 0.0;
  auto v = detail::eigenvector(m, rho);
  std::array<cplx, 2> w;
  bool real_product = false;
  if (real_energy && gap.real() > 0.0) {
    // Real monodromy, real multipliers: real eigenvectors.
    v = {cplx(v[0].real()), cplx(v[1].real())};
    w = detail::eigenvector(m, rho_star);
    w = {cplx(w[0].real()), cplx(w[1].real())};
    real_product = true;
  } else if (real_energy) {
    // Conjugate unimodular multipliers: psi_star = conj(psi).
    w = {std::conj(v[0]), std::conj(v[1])};
    real_product = true;
  } else {
    w = detail::eigenvector(m, rho_star);
  }

  Field psi = detail::combine_columns(grid, run.samples, v, false);
  Field psi_star = detail::combine_columns(grid, run.samples, w, false);
  const cplx s = mean(psi * psi_star);
  if (std::abs(s) < 1e-12 * psi.max_abs() * psi_star.max_abs()) {
    std::ostringstream os;
    os << "bloch_pair: mean(psi psi*) vanishes at E = " << energy;
    throw DegenerateEnergy(os.str());
  }
  cplx a, b;  // psi /= a, psi_star /= b, with a b = s
  if (real_product) {
    const double r = std::sqrt(std::abs(s.real()));
    a = r;
    b = s.real() / r;
  } else {
    a = std::sqrt(s);
    b = s / a;
  }
  for (auto& x : v) x /= a;
  for (auto& x : w) x /= b;

  BlochPair pair{energy,
                 rho,
                 detail::combine_columns(grid, run.samples, v, false),
                 detail::combine_columns(grid, run.samples, w, false),
                 v,
                 w,
                 {v[0] * run.end[0] + v[1] * run.end[2], v[0] * run.end[1] + v[1] * run.end[3]}};
  return pair;
}

/// Samples the solution with initial data (psi(0), psi'(0)) at the grid nodes.
inline Field propagate(const PeriodicPotential& u, cplx energy, const std::array<cplx, 2>& initial) {
  const auto nodes = u.grid().nodes();
  const auto run = detail::integrate_fundamental(u, energy, nodes);
  return detail::combine_columns(u.grid(), run.samples, initial, false);
}

namespace detail {

inline double real_delta(const PeriodicPotential& u, double e) { return monodromy(u, e).trace().real(); }

/// Bisection on a continuous real function with f(a) f(b) <= 0.
template <class F>
double bisect(F&& f, double a, double b, double tol) {
  double fa = f(a);
  if (fa == 0.0) return a;
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fa < 0.0) == (fm < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Band edges (real roots of Delta = +-2) of a real potential in [e_min, e_max].
///
/// Simple roots are bracketed by sign changes of Delta -+ 2 on a uniform scan
/// and refined by bisection.  Near-tangencies (local extrema of Delta close to
/// +-2) are refined to the extremum E*; there Delta^2 - 4 is evaluated in the
/// cancellation-free form.  A tangency with |Delta^2 - 4| below tolerance is a
/// double root, and is flagged a closed gap only if Delta'(E*) ~ 0 and the
/// monodromy equals +-Identity.  A positive value means a narrow open gap
/// whose two edges are found by bisecting Delta^2 - 4.
inline GapReport find_band_edges(const PeriodicPotential& u, double e_min, double e_max,
                                 const BandEdgeOptions& opt = {}) {
  if (!(e_min < e_max)) throw InvalidArgument("find_band_edges: need e_min < e_max");
  if (opt.scan_points < 3) throw InvalidArgument("find_band_edges: need at least 3 scan points");
  const auto energies = energy_grid(e_min, e_max, opt.scan_points);
  std::vector<Monodromy> mono(energies.size());
  parallel_for(energies.size(), [&](std::size_t i) { mono[i] = monodromy(u, energies[i]); });
  std::vector<double> delta(mono.size());
  for (std::size_t i = 0; i < mono.size(); ++i) delta[i] = mono[i].trace().real();
  const double h = (e_max - e_min) / static_cast<double>(opt.scan_points - 1);

  GapReport report;
  report.scan_points = opt.scan_points;
  report.scan_density = 1.0 / h;

  auto delta_prime = [&](double e) {
    return central_difference([&](double x) { return detail::real_delta(u, x); }, e, opt.derivative_step);
  };
  auto make_edge = [&](double e, int level, bool double_root) {
    EdgeInfo info;
    info.energy = e;
    info.level = level;
    info.double_root = double_root;
    const auto m = monodromy(u, e);
    info.delta_derivative = delta_prime(e);
    info.identity_distance = m.distance_to_scaled_identity(level > 0 ? 1.0 : -1.0);
    info.closed_gap = double_root && std::abs(info.delta_derivative) < opt.derivative_tolerance &&
                      info.identity_distance < opt.identity_tolerance;
    return info;
  };

  // Simple roots from sign changes.
  std::vector<EdgeInfo> edges;
  for (int level : {2, -2}) {
    for (std::size_t i = 0; i + 1 < delta.size(); ++i) {
      const double a = delta[i] - level;
      const double b = delta[i + 1] - level;
      if (a == 0.0 || (a < 0.0) != (b < 0.0)) {
        if (b == 0.0 && i + 2 < delta.size()) continue;  // counted on the next interval
        const double root = detail::bisect([&](double e) { return detail::real_delta(u, e) - level; },
                                           energies[i].real(), energies[i + 1].real(), opt.root_tolerance);
        edges.push_back(make_edge(root, level, false));
      }
    }
  }

  // Near-tangencies at interior extrema of Delta.
  std::vector<std::pair<double, double>> narrow_gaps;
  for (std::size_t i = 1; i + 1 < delta.size(); ++i) {
    const double left = delta[i] - delta[i - 1];
    const double right = delta[i + 1] - delta[i];
    if (left * right > 0.0) continue;
    const int level = delta[i] > 0.0 ? 2 : -2;
    if (std::abs(delta[i] - level) > 0.05) continue;
    const bool is_max = left >= 0.0 && right <= 0.0;
    if ((level > 0) != is_max) continue;  // the extremum must point toward +-2
    const double lo = energies[i - 1].real();
    const double hi = energies[i + 1].real();
    const double s = level > 0 ? 1.0 : -1.0;
    // Locate the extremum as a root of Delta'(E); fall back to Brent.
    auto slope = [&](double e) { return delta_energy_derivative(u, e).real(); };
    double e_star;
    if ((slope(lo) < 0.0) != (slope(hi) < 0.0)) {
      e_star = detail::bisect(slope, lo, hi, 1e-13);
    } else {
      e_star = boost::math::tools::brent_find_minima([&](double e) { return -s * detail::real_delta(u, e); }, lo, hi,
                                                     26)
                   .first;
    }
    const auto m_star = monodromy(u, e_star);
    const double gap_star = m_star.discriminant_gap().real();

    auto in_window = [&](const EdgeInfo& ed) { return ed.level == level && ed.energy >= lo && ed.energy <= hi; };
    const auto existing = std::count_if(edges.begin(), edges.end(), in_window);

    if (std::abs(gap_star) <= opt.tangency_tolerance) {
      // Sign changes in the window are integration noise around a double root.
      edges.erase(std::remove_if(edges.begin(), edges.end(), in_window), edges.end());
      edges.push_back(make_edge(e_star, level, true));
    } else if (gap_star > 0.0 && existing < 2) {
      auto gap_fn = [&](double e) { return monodromy(u, e).discriminant_gap().real(); };
      if (gap_fn(lo) < 0.0 && gap_fn(hi) < 0.0) {
        edges.erase(std::remove_if(edges.begin(), edges.end(), in_window), edges.end());
        const double a = detail::bisect(gap_fn, lo, e_star, opt.root_tolerance);
        const double b = detail::bisect(gap_fn, e_star, hi, opt.root_tolerance);
        edges.push_back(make_edge(a, level, false));
        edges.push_back(make_edge(b, level, false));
        narrow_gaps.emplace_back(a, b);
      } else {
        report.warnings.push_back("unresolved narrow gap near E = " + io::format_number(e_star));
      }
    }
  }

  std::sort(edges.begin(), edges.end(), [](const EdgeInfo& a, const EdgeInfo& b) { return a.energy < b.energy; });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const EdgeInfo& a, const EdgeInfo& b) { return std::abs(a.energy - b.energy) < 1e-9; }),
              edges.end());

  for (const auto& ed : edges) {
    report.band_edges.push_back(ed.energy);
    if (ed.closed_gap) report.closed_gaps.push_back(ed.energy);
  }
  // Open gaps: consecutive simple edges with |Delta| > 2 between them.
  std::vector<double> simple;
  for (const auto& ed : edges) {
    if (!ed.double_root) simple.push_back(ed.energy);
  }
  for (std::size_t i = 0; i + 1 < simple.size(); ++i) {
    const double mid = 0.5 * (simple[i] + simple[i + 1]);
    if (monodromy(u, mid).discriminant_gap().real() > 0.0) report.open_gaps.emplace_back(simple[i], simple[i + 1]);
  }
  report.edges = std::move(edges);

  // Oscillation scale of Delta ~ 2 cos(T sqrt(E)) at the top of the range.
  const double e_top = std::max(std::abs(e_min), std::abs(e_max));
  const double period_in_e = 4.0 * std::numbers::pi * std::sqrt(std::max(e_top, 0.25)) / u.period();
  if (h > period_in_e / 20.0) {
    report.warnings.push_back("scan spacing " + io::format_number(h) +
                              " is coarse relative to the oscillation of Delta; close roots may be missed");
  }
  return report;
}

/// max over probes of |Delta(E; u_a) - Delta(E; u_b)|.
inline double discriminant_drift(const PeriodicPotential& u_a, const PeriodicPotential& u_b,
                                 std::span<const cplx> probes) {
  if (std::abs(u_a.period() - u_b.period()) > 1e-14 * u_a.period()) {
    throw InvalidArgument("discriminant_drift: potentials have different periods");
  }
  std::vector<double> drift(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    drift[i] = std::abs(monodromy(u_a, probes[i]).trace() - monodromy(u_b, probes[i]).trace());
  });
  double m = 0.0;
  for (double d : drift) m = std::max(m, d);
  return m;
}

inline io::CsvTable discriminant_table(std::span<const DiscriminantSample> samples) {
  io::CsvTable t({"E_re", "E_im", "delta_re", "delta_im", "rho_plus_re", "rho_plus_im", "mu_re", "mu_im"});
  for (const auto& s : samples) {
    t.add_row({s.energy.real(), s.energy.imag(), s.delta.real(), s.delta.imag(), s.rho_plus.real(),
               s.rho_plus.imag(), s.mu.real(), s.mu.imag()});
  }
  return t;
}

inline void write_discriminant_csv(std::span<const DiscriminantSample> samples, const std::filesystem::path& path) {
  discriminant_table(samples).write(path);
}

}  // namespace melnikov::floquet
