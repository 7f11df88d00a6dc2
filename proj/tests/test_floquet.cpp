#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "melnikov/floquet.hpp"

using namespace melnikov;
using namespace melnikov::floquet;

namespace {

const cplx I(0.0, 1.0);

/// Product of exact constant-potential transfer matrices over `slices` midpoint slices.
Monodromy sliced_monodromy(const std::function<double(double)>& u, double period, cplx energy, std::size_t slices) {
  const double h = period / static_cast<double>(slices);
  cplx a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  for (std::size_t s = 0; s < slices; ++s) {
    const cplx q = energy - u((static_cast<double>(s) + 0.5) * h);
    const cplx k = std::sqrt(q);
    const cplx cs = std::cos(k * h);
    const cplx sn = std::abs(k) < 1e-300 ? cplx(h) : std::sin(k * h) / k;
    const cplx ms = -k * std::sin(k * h);
    const cplx na = cs * a + sn * c, nb = cs * b + sn * d;
    const cplx nc = ms * a + cs * c, nd = ms * b + cs * d;
    a = na, b = nb, c = nc, d = nd;
  }
  return {a, b, c, d, energy};
}

/// Eigenvalues of -d^2 + 2 cos x on periodic (shift 0) or antiperiodic (shift 1/2) Fourier modes.
std::vector<double> mathieu_edges(double shift, int modes) {
  const int n = 2 * modes + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double q = (i - modes) + shift;
    h(i, i) = q * q;
    if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const auto ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

PeriodicPotential random_trig_potential(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-0.5, 0.5);
  std::vector<double> a(4), b(4);
  for (int m = 0; m < 4; ++m) a[m] = coef(rng), b[m] = coef(rng);
  return PeriodicPotential::sample(PeriodicGrid(32, kTwoPi), [&](double x) {
    double v = 0.0;
    for (int m = 0; m < 4; ++m) v += a[m] * std::cos((m + 1) * x) + b[m] * std::sin((m + 1) * x);
    return v;
  });
}

}  // namespace

TEST(Monodromy, FreeParticleClosedForm) {
  const auto u = PeriodicPotential::zero(kTwoPi);
  for (double k : {0.3, 0.5, 1.0, 1.7, 2.0}) {
    const auto m = monodromy(u, k * k);
    const double t = kTwoPi * k;
    EXPECT_LT(std::abs(m.m11 - std::cos(t)), 1e-10);
    EXPECT_LT(std::abs(m.m12 - std::sin(t) / k), 1e-10);
    EXPECT_LT(std::abs(m.m21 + k * std::sin(t)), 1e-10);
    EXPECT_LT(std::abs(m.m22 - std::cos(t)), 1e-10);
  }
}

TEST(Monodromy, ConstantPotentialShiftsEnergy) {
  const double c = 0.37;
  const auto u = PeriodicPotential::sample(PeriodicGrid(16, kTwoPi), [&](double) { return c; });
  for (cplx e : {cplx(1.2), cplx(0.1), cplx(0.5, 0.3)}) {
    const auto m = monodromy(u, e);
    const cplx k = std::sqrt(e - c);
    const cplx t = kTwoPi * k;
    EXPECT_LT(std::abs(m.m11 - std::cos(t)), 1e-10);
    EXPECT_LT(std::abs(m.m12 - std::sin(t) / k), 1e-10);
    EXPECT_LT(std::abs(m.m21 + k * std::sin(t)), 1e-10);
  }
}

TEST(Monodromy, CosinePotentialMatchesSlicedTransferMatrices) {
  const auto u = PeriodicPotential::cosine(2.0, kTwoPi);
  auto f = [](double x) { return 2.0 * std::cos(x); };
  for (double e : {0.0, -0.1}) {
    const auto m = monodromy(u, e);
    const auto ref = sliced_monodromy(f, kTwoPi, e, 100000);
    EXPECT_LT(std::abs(m.m11 - ref.m11), 1e-7) << "E=" << e;
    EXPECT_LT(std::abs(m.m12 - ref.m12), 1e-7) << "E=" << e;
    EXPECT_LT(std::abs(m.m21 - ref.m21), 1e-7) << "E=" << e;
    EXPECT_LT(std::abs(m.m22 - ref.m22), 1e-7) << "E=" << e;
    EXPECT_LT(std::abs(discriminant(u, e).delta - ref.trace()), 1e-7) << "E=" << e;
  }
}

TEST(Monodromy, DeterminantIsOne) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> re(-10.0, 10.0);
  for (int trial = 0; trial < 12; ++trial) {
    const auto u = random_trig_potential(rng);
    cplx e;
    do e = cplx(re(rng), re(rng));
    while (std::abs(e) > 10.0);
    const auto m = monodromy(u, e);
    EXPECT_LT(m.relative_det_error(), 1e-9) << "E=" << e;
    const double size = std::max({std::abs(m.m11), std::abs(m.m12), std::abs(m.m21), std::abs(m.m22)});
    if (size < 1e3) EXPECT_LT(m.det_error(), 1e-9) << "E=" << e;
  }
}

TEST(Discriminant, FreeOperatorValues) {
  const auto u = PeriodicPotential::zero(kTwoPi);
  EXPECT_NEAR(discriminant(u, 1.0).delta.real(), 2.0, 1e-10);
  const auto s = discriminant(u, 1.0 / 16.0);
  EXPECT_LT(std::abs(s.delta), 1e-10);
  EXPECT_LT(std::abs(s.rho_plus - I), 1e-10);
  EXPECT_LT(std::abs(s.rho_minus + I), 1e-10);
}

TEST(Discriminant, MultiplierBranches) {
  const auto two = multipliers(2.0);
  EXPECT_TRUE(two.degenerate);
  EXPECT_EQ(two.plus, cplx(1.0));
  EXPECT_EQ(two.minus, cplx(1.0));
  const auto zero = multipliers(0.0);
  EXPECT_FALSE(zero.degenerate);
  EXPECT_LT(std::abs(zero.plus - I), 1e-15);
  EXPECT_LT(std::abs(zero.minus + I), 1e-15);
  const auto three = multipliers(3.0);
  EXPECT_NEAR(three.plus.real(), (3.0 + std::sqrt(5.0)) / 2.0, 1e-14);
  EXPECT_NEAR(three.minus.real(), (3.0 - std::sqrt(5.0)) / 2.0, 1e-14);
  const auto neg = multipliers(-3.0);
  EXPECT_GE(std::abs(neg.plus), 1.0);
}

TEST(Discriminant, MultiplierAndQuasimomentumInvariants) {
  const auto u = PeriodicPotential::cosine(0.8, kTwoPi);
  for (cplx e : {cplx(-0.5), cplx(0.1), cplx(0.3), cplx(1.1), cplx(2.0, 0.5), cplx(-1.0, -2.0)}) {
    const auto s = discriminant(u, e);
    EXPECT_LT(std::abs(s.rho_plus * s.rho_minus - 1.0), 1e-9);
    EXPECT_LT(std::abs(s.rho_plus * s.rho_plus - s.delta * s.rho_plus + 1.0), 1e-9 * std::norm(s.rho_plus));
    EXPECT_GE(std::abs(s.rho_plus), 1.0 - 1e-12);
    EXPECT_LT(std::abs(std::exp(I * s.mu * kTwoPi) - s.rho_plus), 1e-10 * std::abs(s.rho_plus));
    if (e.imag() == 0.0) {
      EXPECT_LT(std::abs(s.delta.imag()), 1e-12);
      const bool in_band = std::abs(s.delta.real()) <= 2.0;
      EXPECT_EQ(in_band, std::abs(std::abs(s.rho_plus) - 1.0) < 1e-9) << "E=" << e;
    }
  }
}

TEST(Discriminant, ComplexStepAgreesWithRealDifferences) {
  const auto u = PeriodicPotential::cosine(1.0, kTwoPi);
  for (double e : {-0.4, 0.2, 0.9, 1.6}) {
    const double h_cs = 1e-20;
    const double cs = discriminant(u, cplx(e, h_cs)).delta.imag() / h_cs;
    const double fd = central_difference([&](double x) { return discriminant(u, x).delta.real(); }, e, 1e-3);
    EXPECT_NEAR(cs, fd, 1e-6 * std::max(1.0, std::abs(fd))) << "E=" << e;
    EXPECT_NEAR(delta_energy_derivative(u, e).real(), fd, 1e-6 * std::max(1.0, std::abs(fd))) << "E=" << e;
  }
}

TEST(BlochPair, PlaneWavesForZeroPotential) {
  const auto u = PeriodicPotential::zero(kTwoPi, 32);
  const auto p = bloch_pair(u, 1.0 / 16.0);
  EXPECT_LT(std::abs(p.rho - I), 1e-10);
  const auto x = u.grid().nodes();
  for (std::size_t j = 0; j < x.size(); ++j) {
    EXPECT_LT(std::abs(p.psi[j] / p.psi[0] - std::exp(I * x[j] / 4.0)), 1e-9);
    EXPECT_LT(std::abs(p.psi_star[j] / p.psi_star[0] - std::exp(-I * x[j] / 4.0)), 1e-9);
    EXPECT_LT(std::abs(p.product()[j] - 1.0), 1e-9);
  }
}

TEST(BlochPair, RealExponentialsInAGap) {
  const auto u = PeriodicPotential::zero(kTwoPi, 32);
  const auto p = bloch_pair(u, -1.0);
  const auto x = u.grid().nodes();
  for (std::size_t j = 0; j < x.size(); ++j) {
    EXPECT_LT(std::abs(p.psi[j] / p.psi[0] - std::exp(-x[j])), 1e-9);
    EXPECT_LT(std::abs(p.psi_star[j] / p.psi_star[0] - std::exp(x[j])), 1e-9 * std::exp(x[j]));
    EXPECT_LT(std::abs(p.product()[j] - 1.0), 1e-9);
  }
}

TEST(BlochPair, QuasiperiodicOverASecondPeriod) {
  const auto u = PeriodicPotential::cosine(2.0, kTwoPi, 64);
  for (double e : {-0.5, 0.6, 1.3}) {
    const auto p = bloch_pair(u, e);
    EXPECT_NEAR(mean(p.product()).real(), 1.0, 1e-12);
    EXPECT_LT(p.product().max_imag(), 1e-12);
    const auto second = propagate(u, e, p.psi_end);
    double worst = 0.0;
    for (std::size_t j = 0; j < second.size(); ++j)
      worst = std::max(worst, std::abs(second[j] - p.rho * p.psi[j]) / std::max(1.0, std::abs(p.psi[j])));
    EXPECT_LT(worst, 1e-7) << "E=" << e;
    const cplx rho_star = 1.0 / p.rho;
    const std::array<cplx, 2> star_end{rho_star * p.psi_star_initial[0], rho_star * p.psi_star_initial[1]};
    const auto star_second = propagate(u, e, star_end);
    double worst_star = 0.0;
    for (std::size_t j = 0; j < star_second.size(); ++j)
      worst_star = std::max(worst_star, std::abs(star_second[j] - rho_star * p.psi_star[j]) /
                                            std::max(1.0, std::abs(rho_star * p.psi_star[j])));
    EXPECT_LT(worst_star, 1e-7) << "E=" << e;
  }
}

TEST(BlochPair, RefusesBandEdges) {
  const auto u = PeriodicPotential::zero(kTwoPi, 16);
  EXPECT_THROW(bloch_pair(u, 0.25), DegenerateEnergy);
  EXPECT_THROW(bloch_pair(u, 1.0), DegenerateEnergy);
}

TEST(ScanDiscriminant, FreeValuesEmptyAndDeterministic) {
  const auto zero = PeriodicPotential::zero(kTwoPi);
  const std::vector<cplx> e{1.0 / 16.0, 0.25, 1.0};
  const auto s = scan_discriminant(zero, e);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_NEAR(s[0].delta.real(), 0.0, 1e-10);
  EXPECT_NEAR(s[1].delta.real(), -2.0, 1e-10);
  EXPECT_NEAR(s[2].delta.real(), 2.0, 1e-10);
  EXPECT_TRUE(scan_discriminant(zero, std::vector<cplx>{}).empty());

  const auto u = PeriodicPotential::cosine(2.0, kTwoPi);
  const auto grid = energy_grid(-2.0, 4.0, 512);
  const auto par = scan_discriminant(u, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto seq = discriminant(u, grid[i]);
    EXPECT_EQ(par[i].delta, seq.delta);
    EXPECT_EQ(par[i].rho_plus, seq.rho_plus);
  }
}

TEST(BandEdges, FreeOperatorHasClosedGaps) {
  const auto r = find_band_edges(PeriodicPotential::zero(kTwoPi), 0.01, 2.0);
  ASSERT_EQ(r.closed_gaps.size(), 2u);
  EXPECT_NEAR(r.closed_gaps[0], 0.25, 1e-9);
  EXPECT_NEAR(r.closed_gaps[1], 1.0, 1e-9);
  EXPECT_TRUE(r.open_gaps.empty());
  for (const auto& e : r.edges) {
    EXPECT_TRUE(e.double_root);
    EXPECT_LT(std::abs(e.delta_derivative), 1e-5);
    EXPECT_LT(e.identity_distance, 1e-5);
  }
}

TEST(BandEdges, CosinePotentialMatchesDenseEigenproblem) {
  const auto u = PeriodicPotential::cosine(2.0, kTwoPi);
  const auto r = find_band_edges(u, -2.0, 2.0);
  std::vector<double> oracle;
  for (double shift : {0.0, 0.5})
    for (double ev : mathieu_edges(shift, 40))
      if (ev > -2.0 && ev < 2.0) oracle.push_back(ev);
  std::sort(oracle.begin(), oracle.end());
  ASSERT_EQ(r.band_edges.size(), oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(r.band_edges[i], oracle[i], 1e-6);
  EXPECT_TRUE(r.closed_gaps.empty());
  ASSERT_FALSE(r.open_gaps.empty());
}

TEST(BandEdges, TinyPerturbationOpensANarrowGap) {
  const auto u = PeriodicPotential::cosine(2e-6, kTwoPi);
  const auto r = find_band_edges(u, 0.1, 0.4);
  EXPECT_TRUE(r.closed_gaps.empty());
  ASSERT_EQ(r.open_gaps.size(), 1u);
  const auto [a, b] = r.open_gaps.front();
  EXPECT_LT(b - a, 1e-4);
  EXPECT_GT(b - a, 0.0);
  EXPECT_NEAR(0.5 * (a + b), 0.25, 1e-4);
}

TEST(BandEdges, RejectsEmptyRange) {
  EXPECT_THROW(find_band_edges(PeriodicPotential::zero(kTwoPi), 1.0, 1.0), InvalidArgument);
}

TEST(DiscriminantDrift, IdentityTranslationAndShift) {
  const PeriodicGrid g(64, kTwoPi);
  auto f = [](double x) { return 0.3 * std::cos(x) + 0.1 * std::sin(2.0 * x); };
  const auto ua = PeriodicPotential::sample(g, f);
  const std::vector<cplx> probes{-0.3, 0.2, 0.7, 1.5, 4.0};
  EXPECT_EQ(discriminant_drift(ua, ua, probes), 0.0);
  const auto moved = PeriodicPotential::sample(g, [&](double x) { return f(x + 0.9); });
  EXPECT_LT(discriminant_drift(ua, moved, probes), 1e-9);
  const auto zero = PeriodicPotential::zero(kTwoPi);
  const auto lifted = PeriodicPotential::sample(PeriodicGrid(16, kTwoPi), [](double) { return 0.1; });
  const double bound = std::abs(2.0 * std::cos(kTwoPi * 2.0) - 2.0 * std::cos(kTwoPi * std::sqrt(3.9)));
  EXPECT_GE(discriminant_drift(zero, lifted, std::vector<cplx>{4.0}), bound - 1e-9);
  EXPECT_THROW(discriminant_drift(zero, PeriodicPotential::zero(3.0), probes), InvalidArgument);
}

TEST(DiscriminantCsv, HasDocumentedColumns) {
  const auto t = discriminant_table(scan_discriminant(PeriodicPotential::zero(kTwoPi), std::vector<cplx>{0.5}));
  const std::vector<std::string> cols{"E_re", "E_im", "delta_re", "delta_im", "rho_plus_re", "rho_plus_im", "mu_re", "mu_im"};
  EXPECT_EQ(t.columns(), cols);
  EXPECT_EQ(t.rows().size(), 1u);
}
