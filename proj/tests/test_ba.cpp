#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "melnikov/ba_genus0.hpp"
#include "melnikov/soliton.hpp"

using namespace melnikov;
using namespace melnikov::ba;

namespace {

const cplx I(0.0, 1.0);

/// lim_{e->0} e f(p + e) by symmetric sampling and one Richardson step.
template <class F>
cplx residue_by_limit(F&& f, cplx p, double eps = 1e-3) {
  auto g = [&](double e) { return 0.5 * (e * f(p + e) + (-e) * f(p - e)); };
  return (4.0 * g(0.5 * eps) - g(eps)) / 3.0;
}

SpectralDataG0 generic_two() {
  return SpectralDataG0({{cplx(-1.0, 0.2), cplx(1.1, -0.1)}, {cplx(-1.6, -0.3), cplx(1.4, 0.4)}});
}

}  // namespace

TEST(SpectralData, Validation) {
  EXPECT_THROW(SpectralDataG0({{1.0, 1.0}}), InvalidArgument);
  EXPECT_THROW(SpectralDataG0({{1.0, 2.0}, {2.0, 3.0}}), InvalidArgument);
  EXPECT_THROW(SpectralDataG0({{-1.0, 1.5}}, true), InvalidArgument);
  EXPECT_NO_THROW(SpectralDataG0::kdv({1.0, 1.5}));
  EXPECT_THROW(SpectralDataG0::kdv({1.0, 1.0}), InvalidArgument);
}

TEST(SolveBA, OneSolitonCoefficientIsChi) {
  const auto data = SpectralDataG0::kdv({1.0});
  EXPECT_NEAR(std::abs(solve_ba(data, TimePoint({0.0}, {-2.0})).a[0] - (-1.0)), 0.0, 1e-13);
  for (double c : {0.3, 2.0})
    for (double x : {-2.0, 0.0, 0.4, 1.7}) {
      const auto ev = solve_ba(data, TimePoint({x}, {-c}));
      EXPECT_LT(std::abs(ev.a[0] - soliton::chi(soliton::SolitonState(1.0, c), x)), 1e-13);
      EXPECT_EQ(ev.chi1, ev.a[0]);
    }
}

TEST(SolveBA, UngluedDataIsVacuum) {
  const auto data = generic_two();
  const TimePoint tp({0.3, 0.1, -0.2}, {0.0, 0.0});
  const auto ev = solve_ba(data, tp);
  for (cplx a : ev.a) EXPECT_EQ(std::abs(a), 0.0);
  for (cplx l : {cplx(2.0), cplx(0.5, 1.0)})
    EXPECT_LT(std::abs(eval_psi(data, tp, l) - std::exp(l * 0.3 + l * l * 0.1 - l * l * l * 0.2)), 1e-14);
  EXPECT_EQ(potential_u(data, tp), cplx(0.0));
}

TEST(SolveBA, ResidueConditionsByNumericalLimit) {
  const auto data = SpectralDataG0::kdv({1.0, 1.5});
  const TimePoint tp({0.1}, {-2.0, -3.0});
  for (std::size_t k = 0; k < 2; ++k) {
    const cplx res = residue_by_limit([&](cplx l) { return eval_psi(data, tp, l); }, data.plus(k));
    const cplx want = tp.taus[k] * eval_psi(data, tp, data.minus(k));
    EXPECT_LT(std::abs(res - want), 1e-9 * std::max(1.0, std::abs(want))) << "k=" << k;
  }
  const auto g = generic_two();
  const TimePoint gt({0.2, 0.1}, {cplx(0.5, 0.3), cplx(-1.2, 0.1)});
  for (std::size_t k = 0; k < 2; ++k) {
    const cplx res = residue_by_limit([&](cplx l) { return eval_psi(g, gt, l); }, g.plus(k));
    const cplx want = gt.taus[k] * eval_psi(g, gt, g.minus(k));
    EXPECT_LT(std::abs(res - want), 1e-9 * std::max(1.0, std::abs(want))) << "k=" << k;
  }
}

TEST(SolveBA, ConjugateResidueConditions) {
  const auto g = generic_two();
  const TimePoint gt({0.2, 0.1}, {cplx(0.5, 0.3), cplx(-1.2, 0.1)});
  for (std::size_t k = 0; k < 2; ++k) {
    const cplx res = residue_by_limit([&](cplx l) { return eval_psi_star(g, gt, l); }, g.minus(k));
    const cplx want = -gt.taus[k] * eval_psi_star(g, gt, g.plus(k));
    EXPECT_LT(std::abs(res - want), 1e-9 * std::max(1.0, std::abs(want))) << "k=" << k;
  }
}

TEST(SolveBA, SingularSystemAndPoles) {
  const auto data = SpectralDataG0::kdv({1.0});
  EXPECT_THROW(solve_ba(data, TimePoint({0.0}, {2.0})), SingularBASystem);
  EXPECT_THROW(eval_psi(data, TimePoint({0.0}, {-2.0}), -1.0), PoleAtMarkedPoint);
  EXPECT_THROW(eval_psi_star(data, TimePoint({0.0}, {-2.0}), 1.0), PoleAtMarkedPoint);
}

TEST(Potential, OneSolitonMatchesClosedForm) {
  const auto data = SpectralDataG0::kdv({1.3});
  for (double c : {0.2, 1.0, 4.0})
    for (double x : {-3.0, -0.5, 0.0, 0.8, 2.5}) {
      const cplx u = potential_u(data, TimePoint({x}, {-c}));
      EXPECT_LT(std::abs(u - soliton::potential(soliton::SolitonState(1.3, c), x)), 1e-12);
    }
}

TEST(Potential, AnalyticXDerivativeMatchesDifferences) {
  const auto data = SpectralDataG0::kdv({1.0});
  for (double x : {-1.0, 0.3, 1.2}) {
    const TimePoint tp({x}, {-2.0});
    const cplx fd = central_difference([&](double y) { return potential_u(data, tp.with_x(y)); }, x, 1e-3);
    EXPECT_LT(std::abs(potential_derivative(data, tp, {Direction::x()}) - fd), 1e-8);
  }
}

TEST(Psi, NormalizationAtInfinity) {
  const auto data = SpectralDataG0::kdv({1.0, 1.5});
  const TimePoint tp({0.02}, {-2.0, -3.0});
  const auto ev = solve_ba(data, tp);
  const cplx first = ev.a[0] + ev.a[1];
  for (double l : {1e4, -1e4}) {
    const cplx rel = eval_psi(data, tp, l) / std::exp(l * 0.02) - 1.0;
    EXPECT_LT(std::abs(rel), 1e-3);
    EXPECT_LT(std::abs(l * rel - first), 1e-3);
  }
}

TEST(Psi, OneSolitonMatchesClosedForms) {
  const auto data = SpectralDataG0::kdv({1.0});
  const soliton::SolitonState s(1.0, 2.0);
  for (double x : {-1.5, 0.0, 0.9}) {
    const TimePoint tp({x}, {-2.0});
    EXPECT_LT(std::abs(eval_psi(data, tp, 1.0) - soliton::psi_kappa(s, x)), 1e-12);
    for (cplx l : {cplx(2.0), cplx(0.3, 1.1)}) {
      EXPECT_LT(std::abs(eval_psi(data, tp, l) - soliton::ba_psi(s, l, x)), 1e-12 * std::abs(std::exp(l * x)));
      EXPECT_LT(std::abs(eval_psi_star(data, tp, l) - eval_psi(data, tp, -l)), 1e-10 * std::abs(std::exp(-l * x)));
    }
  }
}

TEST(Psi, ConjugateMatchesReflectionOnKdVData) {
  const auto data = SpectralDataG0::kdv({0.8, 1.4});
  const TimePoint tp({0.3, 0.0, 0.1}, {-1.5, -0.7});
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> re(-3.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const cplx l(re(rng), re(rng));
    const cplx a = eval_psi_star(data, tp, l), b = eval_psi(data, tp, -l);
    EXPECT_LT(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(b)));
  }
  const TimePoint vac({0.3, 0.0, 0.1}, {0.0, 0.0});
  const cplx l(0.4, 0.2);
  EXPECT_LT(std::abs(eval_psi_star(data, vac, l) - std::exp(-(l * 0.3 + l * l * l * 0.1))), 1e-14);
}

TEST(Psi, PermutationInvariance) {
  const auto a = generic_two();
  const SpectralDataG0 b({a.pairs[1], a.pairs[0]});
  const TimePoint ta({0.4, 0.2}, {cplx(0.5, 0.3), cplx(-1.2, 0.1)});
  const TimePoint tb({0.4, 0.2}, {ta.taus[1], ta.taus[0]});
  EXPECT_LT(std::abs(potential_u(a, ta) - potential_u(b, tb)), 1e-12);
  const auto ea = solve_ba(a, ta), eb = solve_ba(b, tb);
  EXPECT_LT(std::abs(ea.a[0] - eb.a[1]), 1e-12);
  EXPECT_LT(std::abs(ea.a[1] - eb.a[0]), 1e-12);
}

TEST(Psi, DeletingAnUngluedPair) {
  const auto data = generic_two();
  const auto reduced = data.without(0);
  for (double x : {-1.0, 0.0, 1.3}) {
    const TimePoint full({x, 0.1}, {0.0, cplx(-1.2, 0.1)});
    const TimePoint part({x, 0.1}, {cplx(-1.2, 0.1)});
    const auto ev = solve_ba(data, full);
    EXPECT_LT(std::abs(ev.a[0]), 1e-14);
    EXPECT_LT(std::abs(ev.a[1] - solve_ba(reduced, part).a[0]), 1e-12);
    EXPECT_LT(std::abs(potential_u(data, full) - potential_u(reduced, part)), 1e-12);
    EXPECT_LT(std::abs(eval_psi(data, full, 2.5) - eval_psi(reduced, part, 2.5)), 1e-12);
  }
}

TEST(Kernel, VacuumIsElementaryIntegral) {
  const SpectralDataG0 data = SpectralDataG0::kdv({1.0});
  const TimePoint tp({0.0}, {0.0});
  for (auto [l, m] : {std::pair<cplx, cplx>{0.5, 1.5}, {cplx(0.2, 0.4), cplx(1.0, -0.3)}, {1.5, 0.5}}) {
    const auto s = cba_kernel(data, tp, l, m);
    EXPECT_LT(std::abs(s.omega_over_dmu - 1.0 / (m - l)), 1e-12) << l << ' ' << m;
    EXPECT_EQ(s.convergence_direction, (l - m).real() < 0.0 ? Infinity::plus : Infinity::minus);
  }
}

TEST(Kernel, DiagonalPoleHasUnitResidue) {
  const auto data = SpectralDataG0::kdv({1.0});
  const TimePoint tp({0.2}, {-2.0});
  const cplx l = 2.0;
  std::vector<cplx> regular;
  for (double e : {1e-2, 1e-3, 1e-4}) regular.push_back(cba_kernel(data, tp, l, l + e).omega_over_dmu - 1.0 / e);
  EXPECT_LT(std::abs(regular[1] - regular[2]), 1e-2);
  EXPECT_LT(std::abs(regular[2]), 10.0);
}

TEST(Kernel, XDerivativeIsMinusProduct) {
  const auto data = SpectralDataG0::kdv({1.0});
  const TimePoint tp({0.2}, {-2.0});
  EXPECT_LT(verify_deromega(data, tp, 2.0, -1.0).residual(), 1e-7);
  EXPECT_LT(verify_deromega(data, tp, cplx(0.5, 0.5), 1.7).residual(), 1e-7);
  EXPECT_THROW(cba_kernel(data, tp, cplx(1.0, 0.2), cplx(1.0, -0.5)), NonConvergentDirection);
}

TEST(TauFlows, DpsiIdentity) {
  const auto data = SpectralDataG0::kdv({1.0});
  const auto r = verify_dpsi(data, TimePoint({0.2}, {-2.0}), 0, 2.0);
  EXPECT_LT(r.residual(), 1e-6);
  EXPECT_TRUE(r.consistent(3.0, 1e-8));
  EXPECT_LT(verify_dpsi(data, TimePoint({0.2}, {0.0}), 0, 2.0).residual(), 1e-6);
  EXPECT_LT(verify_dpsi(SpectralDataG0::kdv({1.0, 1.5}), TimePoint({0.1}, {-2.0, -3.0}), 1, cplx(0.4, 1.0)).residual(),
            1e-6);
}

TEST(TauFlows, TauDerivativeIsSource) {
  const std::vector<double> xs{-1.0, -0.3, 0.0, 0.6, 1.4};
  const auto one = SpectralDataG0::kdv({1.0});
  EXPECT_LT(verify_tau_source(one, TimePoint({0.0}, {-2.0}), 0, xs).residual(), 1e-6);
  const auto two = generic_two();
  const TimePoint tp({0.0, 0.1}, {cplx(0.5, 0.3), cplx(-1.2, 0.1)});
  for (std::size_t k = 0; k < 2; ++k) EXPECT_LT(verify_tau_source(two, tp, k, xs).residual(), 1e-6);
  EXPECT_LT(verify_tau_source(two, tp.with_tau(0, 0.0), 0, xs).residual(), 1e-6);
}

TEST(TauFlows, OneSolitonTauFlowIsCFlow) {
  const auto one = SpectralDataG0::kdv({1.0});
  const soliton::SolitonState s(1.0, 2.0);
  for (double x : {-1.0, 0.0, 0.5, 2.0}) {
    const cplx src = tau_source(one, TimePoint({x}, {-2.0}), 0);
    EXPECT_LT(std::abs(src - soliton::source_dx(s, x)), 1e-12);
  }
}

TEST(TauFlows, QuotientIsLambdaIndependent) {
  const auto two = SpectralDataG0::kdv({1.0, 1.5});
  const TimePoint tp({0.1}, {-2.0, -3.0});
  const auto q = verify_tau_quotient(two, tp, 0, {2.0, cplx(3.0, 1.0), cplx(-0.4, 2.2)});
  EXPECT_LT(q.spread, 1e-6);
  EXPECT_LT(q.against_source, 1e-6);
}

TEST(CombinedFlow, ChainRuleAndUngluingTime) {
  const auto two = SpectralDataG0::kdv({1.0, 1.5});
  const TimePoint base({0.1, 0.0, 0.0}, {-2.0, -3.0});
  const std::vector<double> xs{-0.5, 0.0, 0.7};
  const FlowPath hierarchy{{{1, 0.3}, {3, 0.5}}, {-2.0, -3.0}, {0.0, 0.0}};
  EXPECT_LT(verify_combined_flow(two, base, hierarchy, 0.2, xs).residual.residual(), 1e-6);

  const auto one = SpectralDataG0::kdv({1.0});
  const TimePoint b1({0.0}, {0.0});
  const FlowPath source{{}, {-2.0}, {1.0}};
  const auto rep = verify_combined_flow(one, b1, source, 0.3, xs);
  EXPECT_LT(rep.residual.residual(), 1e-6);
  ASSERT_TRUE(rep.ungluing_times[0].has_value());
  EXPECT_EQ(*rep.ungluing_times[0], cplx(2.0));
  for (double x : xs) {
    const TimePoint at = source.at(b1.with_x(x), 2.0);
    EXPECT_EQ(std::abs(solve_ba(one, at).a[0]), 0.0);
    EXPECT_EQ(std::abs(potential_u(one, at)), 0.0);
  }
  EXPECT_FALSE(hierarchy.ungluing_time(0).has_value());
}

TEST(Auxiliary, KPResiduals) {
  const std::vector<double> grid5{-1.0, -0.5, 0.0, 0.5, 1.0};
  const SpectralDataG0 vac({{-1.0, 1.3}});
  EXPECT_LT(kp_residual(vac, TimePoint({0.0, 0.0}, {0.0}), {2.0, cplx(3.0, 1.0)}, grid5, grid5), 1e-15);
  EXPECT_LT(kp_residual(vac, TimePoint({0.0, 0.0}, {1.0}), {2.0, cplx(3.0, 1.0)}, grid5, grid5), 1e-6);
  EXPECT_LT(kp_residual(generic_two(), TimePoint({0.0, 0.0}, {cplx(0.5, 0.3), cplx(-1.2, 0.1)}), {2.0, cplx(3.0, 1.0)},
                        grid5, {-0.3, 0.0, 0.3}),
            1e-6);
}

TEST(Auxiliary, KdVResiduals) {
  const std::vector<double> xs{-2.0, -0.7, 0.0, 0.4, 1.9};
  EXPECT_LT(kdv_residual(SpectralDataG0::kdv({1.0}), TimePoint({0.0}, {-2.0}), {2.0, cplx(0.5, 1.5)}, xs), 1e-10);
  EXPECT_LT(kdv_residual(SpectralDataG0::kdv({1.0, 1.5}), TimePoint({0.0}, {-2.0, -3.0}), {2.0, cplx(0.5, 1.5)}, xs),
            1e-6);
  EXPECT_LT(kdv_residual(SpectralDataG0::kdv({1.0, 1.5}), TimePoint({0.0}, {0.0, 0.0}), {2.0}, xs), 1e-15);
  EXPECT_THROW(kdv_residual(generic_two(), TimePoint({0.0}, {1.0, 1.0}), {2.0}, xs), NotKdVSymmetric);
  EXPECT_THROW(kdv_residual(SpectralDataG0::kdv({1.0}), TimePoint({0.0, 0.3}, {-2.0}), {2.0}, xs), NotKdVSymmetric);
}

TEST(Serialization, JsonRoundTrip) {
  const auto data = generic_two();
  const TimePoint tp({0.1, 0.2, 0.3}, {cplx(0.5, 0.3), cplx(-1.2, 0.1)});
  const auto d2 = spectral_data_from_json(nlohmann::json::parse(to_json(data).dump()));
  const auto t2 = time_point_from_json(nlohmann::json::parse(to_json(tp).dump()));
  EXPECT_EQ(d2.pairs, data.pairs);
  EXPECT_EQ(d2.kdv_symmetric, data.kdv_symmetric);
  EXPECT_EQ(t2.times, tp.times);
  EXPECT_EQ(t2.taus, tp.taus);
  EXPECT_THROW(complex_from_json(nlohmann::json::array({1.0})), InvalidArgument);
}

TEST(Serialization, PotentialGridColumns) {
  const auto t = potential_grid(SpectralDataG0::kdv({1.0}), TimePoint({0.0}, {-2.0}), 0, {-1.0, 0.0, 1.0}, {-2.0, -1.0});
  const std::vector<std::string> cols{"x", "tau", "u_re", "u_im"};
  EXPECT_EQ(t.columns(), cols);
  EXPECT_EQ(t.rows().size(), 6u);
}
