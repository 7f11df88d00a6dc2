#include <gtest/gtest.h>

#include <cmath>

#include "melnikov/kdv_solver.hpp"

using namespace melnikov;
using namespace melnikov::kdv;

namespace {

floquet::PeriodicPotential cosine_potential(std::size_t n, double amplitude) {
  return floquet::PeriodicPotential::sample(PeriodicGrid(n, kTwoPi), [=](double x) { return amplitude * std::cos(x); });
}

SolverConfig config(std::size_t n, double dt, double t_end) {
  SolverConfig c;
  c.grid = PeriodicGrid(n, kTwoPi);
  c.dt = dt;
  c.t_end = t_end;
  return c;
}

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

const std::vector<cplx> kProbes{-0.3, 0.0, 0.2, 0.5, 1.0};

}  // namespace

TEST(SourceTerm, VanishesForZeroPotential) {
  const auto u = floquet::PeriodicPotential::zero(kTwoPi, 32);
  for (double e : {-1.0, 0.5}) {
    const auto s = source_term(u, SourceSpec{{{e, 1.0}}});
    // Forward integration of the decaying solution loses digits in proportion to |rho|.
    const double rho = std::abs(floquet::bloch_pair(u, e).rho);
    EXPECT_LT(s.max_abs(), 1e-12 * std::max(rho, 1.0 / rho)) << "E = " << e;
  }
}

TEST(SourceTerm, GapEnergyHasZeroMeanAndRealProduct) {
  const auto u = cosine_potential(64, 0.2);
  const auto gaps = floquet::find_band_edges(u, 0.0, 0.6);
  ASSERT_FALSE(gaps.open_gaps.empty());
  const double e = 0.5 * (gaps.open_gaps[0].first + gaps.open_gaps[0].second);
  const auto s = source_term(u, SourceSpec{{{e, 1.0}}});
  EXPECT_LT(std::abs(mean(s)), 1e-14);
  EXPECT_LT(floquet::bloch_pair(u, e).product().max_imag(), 1e-12);
  EXPECT_GT(s.max_abs(), 1e-6);
}

TEST(Rhs, ZeroFieldIsStationary) {
  const PeriodicGrid g(32, kTwoPi);
  EXPECT_EQ(rhs(Field::zeros(g), {}).max_abs(), 0.0);
}

TEST(Rhs, SineMatchesHandDerivative) {
  const PeriodicGrid g(32, kTwoPi);
  const auto u = Field::sample(g, [](double x) { return std::sin(x); }, true);
  const auto ref = Field::sample(
      g, [](double x) { return -0.25 * std::cos(x) - 1.5 * std::sin(x) * std::cos(x); }, true);
  EXPECT_LT(max_diff(rhs(u, {}), ref), 1e-10);
  EXPECT_LT(max_diff(rhs(u, {}, 0.5), 0.5 * ref), 1e-10);
  EXPECT_LT(std::abs(mean(rhs(u, {}))), 1e-15);
}

TEST(PureKdV, ConservesMeanL2AndDiscriminant) {
  const auto u0 = cosine_potential(64, 0.1);
  auto cfg = config(64, 1e-3, 1.0);
  cfg.snapshot_every = 250;
  const auto rep = evolve(u0, {}, cfg, kProbes);
  const auto d = isospectrality_report(rep, kProbes);
  EXPECT_LT(d.mean_drift, 1e-8);
  EXPECT_LT(d.l2_drift, 1e-8);
  EXPECT_LT(d.max_delta_drift, 1e-6);
  EXPECT_GT(d.displacement, 1e-3);
  EXPECT_LT(rep.max_imag, 1e-12);
}

TEST(PureKdV, ZeroStaysZero) {
  const auto rep = evolve(floquet::PeriodicPotential::zero(kTwoPi, 32), {}, config(32, 1e-2, 0.5));
  EXPECT_EQ(rep.final_state().max_abs(), 0.0);
}

TEST(PureKdV, GridRefinementAgrees) {
  auto run = [](std::size_t n) { return evolve(cosine_potential(n, 0.1), {}, config(n, 1e-3, 0.5)).final_state(); };
  const auto coarse = run(32), fine = run(64);
  double err = 0.0;
  for (std::size_t j = 0; j < coarse.size(); ++j) err = std::max(err, std::abs(coarse[j] - fine[2 * j]));
  EXPECT_LT(err, 1e-6);
}

TEST(PureKdV, IntegratorsAgree) {
  auto cfg = config(64, 1e-3, 0.5);
  const auto a = evolve(cosine_potential(64, 0.1), {}, cfg).final_state();
  cfg.integrator = Integrator::if_rk4;
  const auto b = evolve(cosine_potential(64, 0.1), {}, cfg).final_state();
  EXPECT_LT(max_diff(a, b), 1e-8);
}

TEST(PrescribedSource, StationarySolitonTracksClosedForm) {
  SolverConfig cfg;
  cfg.grid = PeriodicGrid(1024, 80.0);
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.kdv_scale = 0.5;
  cfg.snapshot_every = 100;
  const auto rep = evolve_prescribed_source(1.0, 1.0, cfg);
  EXPECT_LT(rep.max_exact_error(), 1e-6);
  EXPECT_EQ(rep.exact_error.size(), rep.times.size());
}

TEST(PrescribedSource, RejectsSmallBox) {
  SolverConfig cfg;
  cfg.grid = PeriodicGrid(256, 20.0);
  cfg.t_end = 0.5;
  cfg.kdv_scale = 0.5;
  EXPECT_THROW(evolve_prescribed_source(1.0, 0.5, cfg), BoxTooSmall);
}

TEST(Errors, UnstableTimeStep) {
  EXPECT_THROW(evolve(cosine_potential(256, 1.0), {}, config(256, 1.0, 1.0)), UnstableTimeStep);
}

TEST(Errors, BlowUpThreshold) {
  auto cfg = config(32, 1e-2, 0.1);
  cfg.blowup_threshold = 0.05;
  EXPECT_THROW(evolve(cosine_potential(32, 0.1), {}, cfg), BlowUp);
}

TEST(Errors, SourceAtBandEdge) {
  const auto u = floquet::PeriodicPotential::zero(kTwoPi, 32);
  EXPECT_THROW(check_edge_distance(u, SourceSpec{{{0.25, 1.0}}}), DegenerateEnergy);
  EXPECT_THROW(check_edge_distance(u, SourceSpec{{{0.2505, 1.0}}}), DegenerateEnergy);
  EXPECT_NO_THROW(check_edge_distance(u, SourceSpec{{{0.4, 1.0}}}));
  EXPECT_THROW(check_edge_distance(u, SourceSpec{{{1e-4, 1.0}}}), DegenerateEnergy);
  EXPECT_THROW(evolve(u, SourceSpec{{{0.25, 1.0}}}, config(32, 1e-2, 0.1)), DegenerateEnergy);
}

TEST(Errors, GridMismatch) {
  EXPECT_THROW(evolve(cosine_potential(32, 0.1), {}, config(64, 1e-2, 0.1)), InvalidArgument);
}

TEST(BlochSources, StageRefreshBeatsFrozenPairs) {
  const auto u0 = cosine_potential(64, 0.2);
  const std::vector<cplx> probes{0.0, 0.5};
  auto drift = [&](double dt, bool stages) {
    auto cfg = config(64, dt, 0.05);
    cfg.snapshot_every = 1000;
    const auto rep = evolve(u0, SourceSpec{{{0.18, 0.05}}, 1, stages}, cfg, probes);
    return isospectrality_report(rep, probes);
  };
  const auto coarse = drift(1e-2, false);
  const auto fine = drift(5e-3, false);
  const auto staged = drift(1e-2, true);
  EXPECT_LT(fine.max_delta_drift, coarse.max_delta_drift);
  EXPECT_LT(staged.max_delta_drift, fine.max_delta_drift);
  EXPECT_GT(staged.displacement, 1e-4);
  EXPECT_LT(staged.mean_drift, 1e-12);
}

TEST(Schedule, SnapshotsAndAdjustedStep) {
  auto cfg = config(32, 0.03, 0.1);
  cfg.snapshot_every = 3;
  const auto rep = evolve(cosine_potential(32, 0.1), {}, cfg);
  EXPECT_EQ(rep.steps, 4u);
  EXPECT_DOUBLE_EQ(rep.dt, 0.025);
  ASSERT_EQ(rep.times.size(), 3u);
  EXPECT_EQ(rep.times.front(), 0.0);
  EXPECT_NEAR(rep.times[1], 0.075, 1e-15);
  EXPECT_EQ(rep.times.back(), 0.1);

  const auto inv = invariant_table(evolve(cosine_potential(32, 0.1), {}, cfg, {0.1, cplx(0.2, 0.1)}));
  EXPECT_EQ(inv.columns(), (std::vector<std::string>{"t", "mean_u", "l2", "delta_probe_1", "delta_probe_2",
                                                     "delta_probe_2_im"}));
  EXPECT_EQ(snapshot_table(rep).rows().size(), 3u * 32u);
}

TEST(Config, JsonRoundTrip) {
  SolverConfig c = config(128, 2e-3, 0.7);
  c.integrator = Integrator::if_rk4;
  c.dealias = false;
  c.kdv_scale = 0.5;
  const auto back = solver_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.grid.size(), 128u);
}

TEST(Config, RejectsInvalidInput) {
  EXPECT_THROW(solver_config_from_json({{"integrator", "rk2"}}), InvalidArgument);
  EXPECT_THROW(solver_config_from_json({{"dt", -1.0}}), InvalidArgument);
  EXPECT_THROW(solver_config_from_json({{"grid", {{"n", 96}, {"length", 1.0}}}}), InvalidArgument);
  EXPECT_THROW(solver_config_from_json({{"snapshot_every", 0}}), InvalidArgument);
  EXPECT_THROW(source_spec_from_json({{"refresh_every", 0}}), InvalidArgument);
  const auto s = source_spec_from_json({{"entries", {{{"energy", 0.1}, {"weight", 2.0}}}}, {"refresh_stages", true}});
  ASSERT_EQ(s.entries.size(), 1u);
  EXPECT_EQ(s.entries[0].weight, 2.0);
  EXPECT_TRUE(s.refresh_stages);
}
