#pragma once

// Pseudo-spectral integrator for periodic KdV with self-consistent sources:
//   u_t = s (u_xxx / 4 - 3/2 u u_x) + 2 d_x sum_k g_k psi_k psi*_k
// where (psi_k, psi*_k) is the Bloch pair of u at energy E_k.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "melnikov/error.hpp"
#include "melnikov/floquet.hpp"
#include "melnikov/grid.hpp"
#include "melnikov/io.hpp"
#include "melnikov/soliton.hpp"

namespace melnikov::kdv {

struct SourceEntry {
  double energy = 0.0;
  double weight = 0.0;
};

struct SourceSpec {
  std::vector<SourceEntry> entries;
  int refresh_every = 1;
  bool refresh_stages = false;  // recompute the Bloch pairs at every RK stage
};

enum class Integrator { if_rk4, etdrk4 };

inline std::string to_string(Integrator i) { return i == Integrator::if_rk4 ? "if_rk4" : "etdrk4"; }

inline Integrator integrator_from_string(const std::string& s) {
  if (s == "if_rk4") return Integrator::if_rk4;
  if (s == "etdrk4") return Integrator::etdrk4;
  throw InvalidArgument("unknown integrator '" + s + "'");
}

struct SolverConfig {
  PeriodicGrid grid{256, kTwoPi};
  double dt = 1e-3;
  double t_end = 1.0;
  Integrator integrator = Integrator::etdrk4;
  bool dealias = true;
  int snapshot_every = 100;
  double kdv_scale = 1.0;  // s in front of u_xxx/4 - 3/2 u u_x
  double blowup_threshold = 1e6;
  double advective_limit = 2.5;  // bound on dt * k_max * max|3/2 s u|

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be non-negative");
    if (snapshot_every < 1) throw InvalidArgument("snapshot_every must be >= 1");
    const std::size_t n = grid.size();
    if ((n & (n - 1)) != 0) throw InvalidArgument("grid size must be a power of two");
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(std::ceil(t_end / dt - 1e-9))); }
};

struct Snapshot {
  double t;
  Field u;
};

struct RunReport {
  std::vector<Snapshot> snapshots;
  std::vector<double> times;
  std::vector<double> mean_u;
  std::vector<double> l2;  // integral of u^2 over one period
  std::vector<cplx> probes;
  std::vector<std::vector<cplx>> delta;  // delta[i][p] at times[i]
  std::vector<double> exact_error;       // prescribed-source runs only
  double max_imag = 0.0;
  std::size_t steps = 0;
  double dt = 0.0;

  const Field& final_state() const { return snapshots.back().u; }
  double max_exact_error() const {
    return exact_error.empty() ? 0.0 : *std::max_element(exact_error.begin(), exact_error.end());
  }
};

namespace detail {

/// Wavenumbers with the Nyquist entry zeroed (used for odd derivatives).
inline std::vector<double> odd_wavenumbers(const PeriodicGrid& g) {
  std::vector<double> k(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) k[j] = (j == g.size() / 2) ? 0.0 : g.wavenumber(j);
  return k;
}

inline std::vector<double> dealias_mask(const PeriodicGrid& g, bool on) {
  std::vector<double> m(g.size(), 1.0);
  if (!on) return m;
  const long cut = static_cast<long>(g.size() / 3);
  for (std::size_t j = 0; j < g.size(); ++j)
    if (std::abs(g.mode(j)) > cut) m[j] = 0.0;
  return m;
}

/// Mean over a circle of radius 1 around z of f(z + r), for phi-type functions.
template <class F>
cplx contour_mean(cplx z, F&& f, int points = 64) {
  cplx sum = 0.0;
  for (int j = 0; j < points; ++j) {
    const cplx r = std::polar(1.0, kTwoPi * (j + 0.5) / points);
    sum += f(z + r);
  }
  return sum / static_cast<double>(points);
}

}  // namespace detail

/// Source field 2 d_x sum_k g_k psi_k psi*_k for the Bloch pairs of u.
inline Field source_term(const floquet::PeriodicPotential& u, const SourceSpec& spec) {
  const auto& grid = u.grid();
  std::vector<Field> products(spec.entries.size(), Field::zeros(grid));
  parallel_for(spec.entries.size(), [&](std::size_t i) {
    const auto& e = spec.entries[i];
    if (e.weight == 0.0) return;
    products[i] = e.weight * floquet::bloch_pair(u, e.energy).product();
  });
  Field total = Field::zeros(grid);
  for (const auto& p : products) total = total + p;
  total = Field(grid, std::vector<cplx>(total.values().begin(), total.values().end()), true);
  return 2.0 * spectral_derivative(total, 1);
}

/// Throws DegenerateEnergy when a band edge (simple or closed gap) lies within
/// `margin` of a source energy.
inline void check_edge_distance(const floquet::PeriodicPotential& u, const SourceSpec& spec, double margin = 1e-3) {
  for (const auto& e : spec.entries) {
    auto fail = [&] {
      std::ostringstream os;
      os << "source energy " << e.energy << " is within " << margin << " of a band edge";
      throw DegenerateEnergy(os.str());
    };
    const double lo = e.energy - margin, hi = e.energy + margin;
    const std::array<double, 3> d{floquet::detail::real_delta(u, lo), floquet::detail::real_delta(u, e.energy),
                                  floquet::detail::real_delta(u, hi)};
    for (double level : {2.0, -2.0}) {
      for (std::size_t i = 0; i < 2; ++i)
        if ((d[i] - level) * (d[i + 1] - level) <= 0.0) fail();
      const double nearest = std::min({std::abs(d[0] - level), std::abs(d[1] - level), std::abs(d[2] - level)});
      if (nearest > 0.05) continue;
      auto slope = [&](double x) { return floquet::delta_energy_derivative(u, x).real(); };
      if ((slope(lo) < 0.0) == (slope(hi) < 0.0)) continue;
      const double turn = floquet::detail::bisect(slope, lo, hi, 1e-13);
      if (floquet::monodromy(u, turn).discriminant_gap().real() > -1e-10) fail();
    }
  }
}

/// u_xxx/4 - 3/2 u u_x scaled by s, plus an optional source.
inline Field rhs(const Field& u, const SourceSpec& spec, double kdv_scale = 1.0, bool dealias = true) {
  const auto& g = u.grid();
  const auto k = detail::odd_wavenumbers(g);
  const auto mask = detail::dealias_mask(g, dealias);
  auto uh = spectrum(u);
  auto sq = spectrum(u * u);
  std::vector<cplx> out(g.size());
  const cplx i(0.0, 1.0);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const cplx ik = i * k[j];
    out[j] = kdv_scale * (0.25 * ik * ik * ik * uh[j] - 0.75 * ik * mask[j] * sq[j]);
  }
  Field r = from_spectrum(g, out, true);
  bool sourced = false;
  for (const auto& e : spec.entries) sourced = sourced || e.weight != 0.0;
  if (sourced) r = r + source_term(floquet::PeriodicPotential(u), spec);
  return r;
}

/// Stepper for v_t = L v + N(v, t) in Fourier space with diagonal L.
class SpectralStepper {
 public:
  using Nonlinear = std::function<std::vector<cplx>(const std::vector<cplx>&, double)>;

  SpectralStepper(const PeriodicGrid& g, const SolverConfig& cfg) : cfg_(cfg), n_(g.size()) {
    const auto k = detail::odd_wavenumbers(g);
    const double h = cfg.dt;
    lin_.resize(n_);
    e_.resize(n_);
    e2_.resize(n_);
    q_.resize(n_);
    f1_.resize(n_);
    f2_.resize(n_);
    f3_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      const cplx ik(0.0, k[j]);
      lin_[j] = cfg.kdv_scale * 0.25 * ik * ik * ik;
      const cplx z = h * lin_[j];
      e_[j] = std::exp(z);
      e2_[j] = std::exp(0.5 * z);
      if (cfg.integrator == Integrator::etdrk4) {
        q_[j] = h * detail::contour_mean(z, [](cplx w) { return (std::exp(0.5 * w) - 1.0) / w; });
        f1_[j] = h * detail::contour_mean(z, [](cplx w) {
                   return (-4.0 - w + std::exp(w) * (4.0 - 3.0 * w + w * w)) / (w * w * w);
                 });
        f2_[j] = h * detail::contour_mean(z, [](cplx w) { return (2.0 + w + std::exp(w) * (-2.0 + w)) / (w * w * w); });
        f3_[j] = h * detail::contour_mean(z, [](cplx w) {
                   return (-4.0 - 3.0 * w - w * w + std::exp(w) * (4.0 - w)) / (w * w * w);
                 });
      }
    }
  }

  void step(std::vector<cplx>& v, double t, const Nonlinear& nl) const {
    const double h = cfg_.dt;
    auto combine = [&](auto&& f) {
      std::vector<cplx> out(n_);
      for (std::size_t j = 0; j < n_; ++j) out[j] = f(j);
      return out;
    };
    if (cfg_.integrator == Integrator::etdrk4) {
      const auto nv = nl(v, t);
      const auto a = combine([&](std::size_t j) { return e2_[j] * v[j] + q_[j] * nv[j]; });
      const auto na = nl(a, t + 0.5 * h);
      const auto b = combine([&](std::size_t j) { return e2_[j] * v[j] + q_[j] * na[j]; });
      const auto nb = nl(b, t + 0.5 * h);
      const auto c = combine([&](std::size_t j) { return e2_[j] * a[j] + q_[j] * (2.0 * nb[j] - nv[j]); });
      const auto nc = nl(c, t + h);
      for (std::size_t j = 0; j < n_; ++j)
        v[j] = e_[j] * v[j] + f1_[j] * nv[j] + 2.0 * f2_[j] * (na[j] + nb[j]) + f3_[j] * nc[j];
    } else {
      const auto k1 = nl(v, t);
      const auto a = combine([&](std::size_t j) { return e2_[j] * (v[j] + 0.5 * h * k1[j]); });
      const auto k2 = nl(a, t + 0.5 * h);
      const auto b = combine([&](std::size_t j) { return e2_[j] * v[j] + 0.5 * h * k2[j]; });
      const auto k3 = nl(b, t + 0.5 * h);
      const auto c = combine([&](std::size_t j) { return e_[j] * v[j] + h * e2_[j] * k3[j]; });
      const auto k4 = nl(c, t + h);
      for (std::size_t j = 0; j < n_; ++j)
        v[j] = e_[j] * v[j] + h / 6.0 * (e_[j] * k1[j] + 2.0 * e2_[j] * (k2[j] + k3[j]) + k4[j]);
    }
  }

 private:
  SolverConfig cfg_;
  std::size_t n_;
  std::vector<cplx> lin_, e_, e2_, q_, f1_, f2_, f3_;
};

namespace detail {

/// -3/4 s ik (u^2)^ for a spectrum v, dealiased.
inline std::vector<cplx> quadratic_term(const PeriodicGrid& g, const std::vector<cplx>& v, double kdv_scale,
                                        const std::vector<double>& k, const std::vector<double>& mask) {
  const Field u = from_spectrum(g, v, true);
  auto sq = spectrum(u * u);
  const cplx i(0.0, 1.0);
  for (std::size_t j = 0; j < sq.size(); ++j) sq[j] *= -0.75 * kdv_scale * i * k[j] * mask[j];
  return sq;
}

inline void check_stability(const SolverConfig& cfg, double max_u) {
  const double bound = cfg.dt * cfg.grid.max_wavenumber() * 1.5 * std::abs(cfg.kdv_scale) * max_u;
  if (bound > cfg.advective_limit) {
    std::ostringstream os;
    os << "time step " << cfg.dt << " violates the advective bound (" << bound << " > " << cfg.advective_limit << ")";
    throw UnstableTimeStep(os.str());
  }
}

inline double l2_integral(const Field& u) {
  double s = 0.0;
  for (const auto& v : u.values()) s += std::norm(v);
  return s * u.grid().spacing();
}

/// Source spectrum as a function of time and the current spectrum of u.
using ForcingFn = std::function<std::vector<cplx>(double, const std::vector<cplx>&)>;

/// Shared time loop. staged(t, v) is evaluated at every stage; frozen(t, v) is
/// evaluated every refresh_every steps and held for the whole step.
inline RunReport run(const Field& u0, const SolverConfig& cfg_in, const std::vector<cplx>& probes,
                     const ForcingFn& staged_forcing, const ForcingFn& frozen,
                     int refresh_every, const std::function<Field(double)>& exact) {
  cfg_in.validate();
  // Shrink dt so an integer number of steps lands exactly on t_end.
  SolverConfig cfg = cfg_in;
  const std::size_t steps = cfg_in.steps();
  if (steps > 0) cfg.dt = cfg_in.t_end / static_cast<double>(steps);
  if (!(u0.grid() == cfg.grid)) throw InvalidArgument("initial field is not on the configured grid");
  if (!u0.is_real()) throw InvalidArgument("initial field must be real");
  detail::check_stability(cfg, u0.max_abs());
  const auto& g = cfg.grid;
  const auto k = odd_wavenumbers(g);
  const auto mask = dealias_mask(g, cfg.dealias);
  SpectralStepper stepper(g, cfg);
  RunReport rep;
  rep.dt = cfg.dt;
  rep.probes = probes;
  std::vector<cplx> v = spectrum(u0);
  const cplx zero_mode = v[0];
  std::vector<cplx> held;

  auto record = [&](double t, const Field& u) {
    rep.snapshots.push_back({t, u});
    rep.times.push_back(t);
    rep.mean_u.push_back(mean(u).real());
    rep.l2.push_back(l2_integral(u));
    if (!probes.empty()) {
      const floquet::PeriodicPotential pot(u);
      std::vector<cplx> d(probes.size());
      parallel_for(probes.size(), [&](std::size_t p) { d[p] = floquet::discriminant(pot, probes[p]).delta; });
      rep.delta.push_back(std::move(d));
    }
    if (exact) {
      const Field ue = exact(t);
      double err = 0.0;
      for (std::size_t j = 0; j < u.size(); ++j) err = std::max(err, std::abs(u[j] - ue[j]));
      rep.exact_error.push_back(err);
    }
  };

  rep.steps = steps;
  record(0.0, u0);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * cfg.dt;
    if (frozen && (s % static_cast<std::size_t>(std::max(1, refresh_every)) == 0)) {
      held = frozen(t, v);
    }
    auto nl = [&](const std::vector<cplx>& w, double tt) {
      auto out = quadratic_term(g, w, cfg.kdv_scale, k, mask);
      if (!held.empty())
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += held[j];
      if (staged_forcing) {
        const auto f = staged_forcing(tt, w);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += f[j];
      }
      out[0] = 0.0;
      return out;
    };
    stepper.step(v, t, nl);
    v[0] = zero_mode;
    const Field u_raw = from_spectrum(g, v, false);
    rep.max_imag = std::max(rep.max_imag, u_raw.max_imag());
    const Field u(g, std::vector<cplx>(u_raw.values().begin(), u_raw.values().end()), true);
    const double m = u.max_abs();
    if (!std::isfinite(m) || m > cfg.blowup_threshold) {
      std::ostringstream os;
      os << "solution blew up at t = " << t + cfg.dt << " (max |u| = " << m << ")";
      throw BlowUp(os.str());
    }
    const bool last = s + 1 == steps;
    if (last || (s + 1) % static_cast<std::size_t>(cfg.snapshot_every) == 0)
      record(last ? cfg.t_end : t + cfg.dt, u);
  }
  return rep;
}

}  // namespace detail

/// Periodic run with Bloch-pair sources. By default the pairs are recomputed every
/// spec.refresh_every steps and held fixed inside each step; with refresh_stages
/// they follow u through every Runge-Kutta stage.
inline RunReport evolve(const floquet::PeriodicPotential& u0, const SourceSpec& spec, const SolverConfig& cfg,
                        const std::vector<cplx>& probes = {}) {
  if (!(u0.grid() == cfg.grid)) throw InvalidArgument("potential grid differs from config");
  bool sourced = false;
  for (const auto& e : spec.entries) sourced = sourced || e.weight != 0.0;
  detail::ForcingFn source;
  if (sourced) {
    source = [&, g = cfg.grid](double, const std::vector<cplx>& v) {
      const floquet::PeriodicPotential pot(from_spectrum(g, v, true));
      check_edge_distance(pot, spec);
      return spectrum(source_term(pot, spec));
    };
  }
  if (spec.refresh_stages) return detail::run(u0.field(), cfg, probes, source, {}, 1, {});
  return detail::run(u0.field(), cfg, probes, {}, source, spec.refresh_every, {});
}

/// Smallest box for the prescribed-source run: 2 (x0(t_end) + 20/kappa).
inline double minimum_box(double kappa, double c0, double t_end) {
  const soliton::FlowSetting f{soliton::FlowKind::melnikov, c0, kappa};
  double x0 = 0.0;
  for (double t : {0.0, t_end}) {
    const double c = soliton::c_trajectory(f, t);
    if (!(c > 0.0)) throw InvalidArgument("prescribed-source run needs c(t) > 0 on [0, t_end]");
    x0 = std::max(x0, std::abs(soliton::SolitonState(kappa, c).peak_position()));
  }
  return 2.0 * (x0 + 20.0 / kappa);
}

/// Soliton closed form on the grid, centred at x = L/2.
inline Field soliton_field(const PeriodicGrid& g, double kappa, double c) {
  const soliton::SolitonState s(kappa, c);
  const double centre = 0.5 * g.length();
  return Field::sample(g, [&](double x) { return soliton::potential(s, x - centre); }, true);
}

/// Integrates the flow with the closed-form source 2 d_x psi_kappa^2 along the
/// exact c(t) and compares with the exact one-soliton solution.
inline RunReport evolve_prescribed_source(double kappa, double c0, const SolverConfig& cfg) {
  const double need = minimum_box(kappa, c0, cfg.t_end);
  if (cfg.grid.length() < need) {
    std::ostringstream os;
    os << "box length " << cfg.grid.length() << " below the required " << need;
    throw BoxTooSmall(os.str());
  }
  const soliton::FlowSetting flow{soliton::FlowKind::melnikov, c0, kappa};
  const auto& g = cfg.grid;
  const double centre = 0.5 * g.length();
  const auto k = detail::odd_wavenumbers(g);
  auto forcing = [&](double t, const std::vector<cplx>&) {
    const soliton::SolitonState s(kappa, soliton::c_trajectory(flow, t));
    std::vector<double> sq(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double p = soliton::psi_kappa(s, g.node(j) - centre);
      sq[j] = 2.0 * p * p;
    }
    auto h = spectrum(Field::from_real(g, sq));
    for (std::size_t j = 0; j < h.size(); ++j) h[j] *= cplx(0.0, k[j]);
    return h;
  };
  auto exact = [&](double t) { return soliton_field(g, kappa, soliton::c_trajectory(flow, t)); };
  return detail::run(soliton_field(g, kappa, c0), cfg, {}, forcing, {}, 1, exact);
}

struct DriftSummary {
  std::vector<cplx> probes;
  std::vector<double> delta_drift;  // per probe, max over snapshots
  double max_delta_drift = 0.0;
  double mean_drift = 0.0;
  double l2_drift = 0.0;
  double displacement = 0.0;  // max |u(t_end) - u(0)|
};

/// Discriminant drift per probe together with the mean and L2 drifts.
inline DriftSummary isospectrality_report(const RunReport& rep, const std::vector<cplx>& probes) {
  if (rep.snapshots.empty()) throw InvalidArgument("run report has no snapshots");
  DriftSummary d;
  d.probes = probes;
  std::vector<std::vector<cplx>> series;
  if (probes == rep.probes && rep.delta.size() == rep.snapshots.size()) {
    series = rep.delta;
  } else {
    for (const auto& snap : rep.snapshots) {
      const floquet::PeriodicPotential pot(snap.u);
      std::vector<cplx> row(probes.size());
      parallel_for(probes.size(), [&](std::size_t p) { row[p] = floquet::discriminant(pot, probes[p]).delta; });
      series.push_back(std::move(row));
    }
  }
  d.delta_drift.assign(probes.size(), 0.0);
  for (const auto& row : series)
    for (std::size_t p = 0; p < probes.size(); ++p)
      d.delta_drift[p] = std::max(d.delta_drift[p], std::abs(row[p] - series.front()[p]));
  for (double v : d.delta_drift) d.max_delta_drift = std::max(d.max_delta_drift, v);
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    d.mean_drift = std::max(d.mean_drift, std::abs(rep.mean_u[i] - rep.mean_u.front()));
    d.l2_drift = std::max(d.l2_drift, std::abs(rep.l2[i] - rep.l2.front()));
  }
  const auto& first = rep.snapshots.front().u;
  const auto& last = rep.snapshots.back().u;
  for (std::size_t j = 0; j < first.size(); ++j) d.displacement = std::max(d.displacement, std::abs(last[j] - first[j]));
  return d;
}

// ------------------------------------------------------------- output

/// Columns t, mean_u, l2, delta_probe_1..m (real parts; imaginary parts for complex probes).
inline io::CsvTable invariant_table(const RunReport& rep) {
  std::vector<std::string> cols{"t", "mean_u", "l2"};
  std::vector<bool> complex_probe;
  for (std::size_t p = 0; p < rep.probes.size(); ++p) {
    cols.push_back("delta_probe_" + std::to_string(p + 1));
    complex_probe.push_back(rep.probes[p].imag() != 0.0);
    if (complex_probe.back()) cols.push_back("delta_probe_" + std::to_string(p + 1) + "_im");
  }
  io::CsvTable t(cols);
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    std::vector<double> row{rep.times[i], rep.mean_u[i], rep.l2[i]};
    for (std::size_t p = 0; p < rep.probes.size() && i < rep.delta.size(); ++p) {
      row.push_back(rep.delta[i][p].real());
      if (complex_probe[p]) row.push_back(rep.delta[i][p].imag());
    }
    if (row.size() == cols.size()) t.add_row(row);
  }
  return t;
}

/// Columns t, x, u.
inline io::CsvTable snapshot_table(const RunReport& rep) {
  io::CsvTable t({"t", "x", "u"});
  for (const auto& s : rep.snapshots)
    for (std::size_t j = 0; j < s.u.size(); ++j) t.add_row({s.t, s.u.grid().node(j), s.u[j].real()});
  return t;
}

// ----------------------------------------------------------- config

inline SolverConfig solver_config_from_json(const nlohmann::json& j) {
  SolverConfig c;
  if (j.contains("grid")) c.grid = PeriodicGrid(j["grid"].at("n").get<std::size_t>(), j["grid"].at("length").get<double>());
  c.dt = j.value("dt", c.dt);
  c.t_end = j.value("t_end", c.t_end);
  if (j.contains("integrator")) c.integrator = integrator_from_string(j["integrator"].get<std::string>());
  c.dealias = j.value("dealias", c.dealias);
  c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
  c.kdv_scale = j.value("kdv_scale", c.kdv_scale);
  c.validate();
  return c;
}

inline nlohmann::json to_json(const SolverConfig& c) {
  return {{"grid", {{"n", c.grid.size()}, {"length", c.grid.length()}}},
          {"dt", c.dt},
          {"t_end", c.t_end},
          {"integrator", to_string(c.integrator)},
          {"dealias", c.dealias},
          {"snapshot_every", c.snapshot_every},
          {"kdv_scale", c.kdv_scale}};
}

inline SourceSpec source_spec_from_json(const nlohmann::json& j) {
  SourceSpec s;
  if (j.contains("entries"))
    for (const auto& e : j["entries"]) s.entries.push_back({e.at("energy").get<double>(), e.at("weight").get<double>()});
  s.refresh_every = j.value("refresh_every", 1);
  s.refresh_stages = j.value("refresh_stages", false);
  if (s.refresh_every < 1) throw InvalidArgument("refresh_every must be >= 1");
  return s;
}

}  // namespace melnikov::kdv
