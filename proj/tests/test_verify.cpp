#include <gtest/gtest.h>

#include <cmath>

#include "fockbench/models.hpp"
#include "fockbench/verify.hpp"
#include "oracle.hpp"

using namespace fockbench;

namespace {

CMatrix random_matrix(SplitMix64& rng, std::size_t r, std::size_t c) {
  CMatrix m(r, c);
  for (auto& x : m.raw()) x = rng.normal_pair();
  return m;
}

CMatrix random_unitary(SplitMix64& rng, std::size_t d) {
  CMatrix h = random_matrix(rng, d, d);
  h = Complex(0.5) * (h + h.adjoint());
  return hermitian_function(h, [](double l) { return std::exp(Complex(0, l)); });
}

CVector mat_apply(const CMatrix& m, const CVector& v) { return m.apply(v); }

CVector embed(const BlockBandedOperator& op, std::size_t n, const CVector& phi) {
  CVector full(op.dimension());
  std::copy(phi.begin(), phi.end(), full.begin() + static_cast<std::ptrdiff_t>(op.block_offset(n)));
  return full;
}

BosonCoefficients random_boson(SplitMix64& rng, std::size_t d) {
  BosonCoefficients c;
  CMatrix g = random_matrix(rng, d, d);
  c.h0 = Complex(0.5) * (g.adjoint() * g);
  c.V1 = random_complex_vector(rng, d);
  for (auto& x : c.V1) x *= 0.2;
  CMatrix v2 = random_matrix(rng, d, d);
  c.V2 = Complex(0.1) * (v2 + v2.adjoint());
  CMatrix v3 = random_matrix(rng, d, d);
  c.V3 = Complex(0.1) * (v3 + v3.transpose());
  return c;
}

ModelSpec single_mode(CVector v1 = {}, CMatrix v2 = {}, CMatrix v3 = {}, CMatrix v4 = {}) {
  BosonCoefficients c;
  c.h0 = CMatrix::identity(1);
  c.V1 = std::move(v1);
  c.V2 = std::move(v2);
  c.V3 = std::move(v3);
  c.V4 = std::move(v4);
  return build_boson_model("single", c);
}

CMatrix one_by_one(double x) {
  CMatrix m(1, 1);
  m(0, 0) = x;
  return m;
}

std::vector<double> gammas(const std::vector<GammaRow>& rows) {
  std::vector<double> g;
  for (const auto& r : rows) g.push_back(r.gamma);
  return g;
}

}  // namespace

TEST(ScalingFit, ExactPowerLaw) {
  std::vector<double> x, y;
  for (int i = 1; i <= 10; ++i) {
    x.push_back(i);
    y.push_back(std::pow(i, 1.5));
  }
  const auto f = scaling_fit(x, y);
  EXPECT_NEAR(f.slope, 1.5, 1e-12);
  EXPECT_NEAR(f.intercept, 0.0, 1e-12);
  EXPECT_LE(f.residual, 1e-12);
}

TEST(ScalingFit, ConstantHasZeroSlope) {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 2, 2, 2};
  EXPECT_NEAR(scaling_fit(x, y).slope, 0.0, 1e-15);
}

TEST(ScalingFit, NoisySquareRoot) {
  SplitMix64 rng(11);
  std::vector<double> x, y;
  for (int i = 1; i <= 20; ++i) {
    x.push_back(i);
    y.push_back(3.0 * std::sqrt(i) * (1.0 + 0.01 * rng.normal()));
  }
  EXPECT_NEAR(scaling_fit(x, y).slope, 0.5, 0.05);
}

TEST(ScalingFit, RejectsBadInput) {
  EXPECT_THROW(scaling_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ValidationError);
  EXPECT_THROW(scaling_fit(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), ValidationError);
  EXPECT_THROW(scaling_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, 0, 3}), ValidationError);
}

TEST(SectorMetric, FreeSingleMode) {
  const ModelSpec m = single_mode();
  const CompiledModel c = compile(m, make_space(1, 6));
  for (std::size_t n = 0; n <= 6; ++n) {
    const auto g = sector_metric(m, c, n);
    EXPECT_EQ(g.G(0, 0), Complex(static_cast<double>(n + 1)));
  }
}

TEST(SectorMetric, TwoModesFirstSector) {
  BosonCoefficients co;
  co.h0 = CMatrix::diagonal(std::vector<double>{1.0, 2.0});
  const ModelSpec m = build_boson_model("two", co);
  const CompiledModel c = compile(m, make_space(2, 3));
  const auto g = sector_metric(m, c, 1);
  ASSERT_EQ(g.G.rows(), 2u);
  // revlex order: |1,0> then |0,1>
  EXPECT_EQ(g.G(0, 0), Complex(2.0));
  EXPECT_EQ(g.G(1, 1), Complex(3.0));
  EXPECT_EQ(g.G(0, 1), Complex{});
}

TEST(SectorMetric, BoundedBelowByIdentityOnPresets) {
  for (const auto& name : preset_names()) {
    PresetOptions o;
    if (name == "hda" || name == "hdaa") o.grid = 8;
    if (name == "nelson") o.modes = 3;
    const ModelSpec m = make_preset(name, o);
    const CompiledModel c = compile(m, make_space(m.d, 3));
    for (std::size_t n = 0; n <= 3; ++n) {
      const auto g = sector_metric(m, c, n);
      EXPECT_LE(g.G.hermiticity_defect(), 1e-12) << name;
      EXPECT_GE(eigvalsh(g.G).front(), 1.0 - 1e-10) << name << " n=" << n;
    }
  }
}

TEST(BandCheck, QuadraticPresetsSitInTheBand) {
  for (const char* name : {"boson", "pauli-fierz", "hda"}) {
    PresetOptions o;
    o.grid = 8;
    if (std::string(name) == "pauli-fierz") o.grid = 4;
    const ModelSpec m = make_preset(name, o);
    const CompiledModel c = compile(m, make_space(m.d, 5));
    const auto r = band_check(c.HI, 2);
    EXPECT_TRUE(r.ok) << name;
    EXPECT_EQ(r.max_offband, 0.0) << name;
    EXPECT_EQ(r.structural, 2u) << name;
  }
}

TEST(BandCheck, TrilinearNeedsThree) {
  const ModelSpec m = build_toy(ToyKind::H3);
  const CompiledModel c = compile(m, make_space(1, 8));
  const auto two = band_check(c.HI, 2);
  EXPECT_FALSE(two.ok);
  EXPECT_NEAR(two.max_offband, std::sqrt(6.0 * 7.0 * 8.0), 1e-12);
  EXPECT_TRUE(band_check(c.HI, 3).ok);
}

TEST(BandCheck, ComposedQuarticNeedsFour) {
  const auto sp = make_space(2, 8);
  const CMatrix g = CMatrix::identity(2);
  const auto pc = fock_operator(sp, {FockKind::PairCreate, {}, g, 1.0});
  const auto quartic = matmul(pc, pc);
  EXPECT_TRUE(band_check(quartic, 4).ok);
  EXPECT_FALSE(band_check(quartic, 3).ok);
  EXPECT_EQ(band_check(quartic, 4).structural, 4u);
}

TEST(GeneralizedEigenvalue, MatchesRayleighSearchFromBelow) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t dim = 2 + static_cast<std::size_t>(trial);
    const CMatrix a = random_matrix(rng, dim + 1, dim);
    const CMatrix g = random_matrix(rng, dim, dim);
    CMatrix b = g.adjoint() * g + CMatrix::identity(dim);
    const double lam = generalized_max_eigenvalue(a.adjoint() * a, b);
    double best = 0.0;
    for (int s = 0; s < 2000; ++s) {
      const CVector phi = random_complex_vector(rng, dim);
      const double q = std::pow(norm2(mat_apply(a, phi)), 2) / dot(phi, mat_apply(b, phi)).real();
      best = std::max(best, q);
    }
    EXPECT_LE(best, lam * (1.0 + 1e-12));
    EXPECT_GT(best, 0.0);
  }
}

TEST(GeneralizedEigenvalue, IterativePathAgreesWithDense) {
  // diagonal H0 blocks (boson) and a non-diagonal one (Coulomb, CG solves)
  const ModelSpec bos = boson_preset(3);
  const CompiledModel cb = compile(bos, make_space(3, 8));
  const ModelSpec cou = coulomb_preset(2);
  const CompiledModel cc = compile(cou, make_space(8, 3));
  for (auto [m, c, n] : {std::tuple{&bos, &cb, std::size_t{5}}, std::tuple{&cou, &cc, std::size_t{2}}}) {
    for (auto [a, b] : {std::pair{36.0, 6.0}, std::pair{0.0, 1.0}, std::pair{1.0, 0.0}}) {
      const double dense = sector_pencil_max(c->HI, *c, *m, n, a, b);
      const double iter = sector_pencil_max(c->HI, *c, *m, n, a, b, 0);
      EXPECT_NEAR(iter, dense, 1e-9 * std::max(1.0, dense)) << m->name << " a=" << a << " b=" << b;
    }
  }
}

TEST(Compliance, ZeroInteractionIsCompliant) {
  const ModelSpec m = single_mode();
  const CompiledModel c = compile(m, make_space(1, 10));
  const auto rep = verify_model(m, c, {0, 10}, Variant::Quadratic);
  for (double g : gammas(rep.gamma)) EXPECT_EQ(g, 0.0);
  EXPECT_FALSE(rep.fit.has_value());
  EXPECT_EQ(rep.verdict, Verdict::Compliant);
}

TEST(Compliance, TrilinearGrowsLikeSquareRoot) {
  const ModelSpec m = build_toy(ToyKind::H3);
  const CompiledModel c = compile(m, make_space(1, 28));
  const auto rep = verify_model(m, c, {4, 24}, Variant::Quadratic);
  ASSERT_TRUE(rep.fit.has_value());
  EXPECT_NEAR(rep.fit->slope, 0.5, 0.15);
  EXPECT_EQ(rep.verdict, Verdict::NonCompliant);
  EXPECT_FALSE(rep.band.ok);
}

TEST(Compliance, SingleModeGammaClosedForm) {
  // H = N + (a* + a): A restricted to sector n maps to n-1 and n+1 with weights sqrt(n), sqrt(n+1);
  // G_n = n + 1, so gamma^2 = (2n + 1) / ((n+1)^2 + (n+1)^2)
  const ModelSpec m = single_mode(CVector{1.0});
  const CompiledModel c = compile(m, make_space(1, 12));
  const auto rows = compliance_gamma(m, c, {0, 10}, Variant::Quadratic);
  for (const auto& r : rows) {
    const double n = static_cast<double>(r.n);
    EXPECT_NEAR(r.gamma * r.gamma, (2 * n + 1) / (2 * (n + 1) * (n + 1)), 1e-14);
  }
  const auto q = compliance_gamma(m, c, {0, 10}, Variant::Quartic);
  for (const auto& r : q) {
    const double n = static_cast<double>(r.n), p = n + 1;
    EXPECT_NEAR(r.gamma * r.gamma, (2 * n + 1) / (p * p * p * p + p * p * p), 1e-14);
  }
}

TEST(Compliance, RejectsSectorsNearTheCutoff) {
  const ModelSpec m = boson_preset(2);
  const CompiledModel c = compile(m, make_space(2, 10));
  EXPECT_THROW(compliance_gamma(m, c, {2, 9}, Variant::Quadratic), ValidationError);
  EXPECT_NO_THROW(compliance_gamma(m, c, {2, 8}, Variant::Quadratic));
  EXPECT_THROW(compliance_gamma(m, c, {5, 4}, Variant::Quadratic), ValidationError);
}

TEST(Compliance, InvariantUnderFieldRotation) {
  SplitMix64 rng(5);
  const std::size_t d = 3;
  const BosonCoefficients c = random_boson(rng, d);
  const CMatrix u = random_unitary(rng, d);
  BosonCoefficients r;
  r.h0 = u * c.h0 * u.adjoint();
  r.h0 = Complex(0.5) * (r.h0 + r.h0.adjoint());
  r.V1 = u.apply(c.V1);
  r.V2 = u * c.V2 * u.adjoint();
  r.V2 = Complex(0.5) * (r.V2 + r.V2.adjoint());
  r.V3 = u * c.V3 * u.transpose();
  r.V3 = Complex(0.5) * (r.V3 + r.V3.transpose());
  const ModelSpec m0 = build_boson_model("a", c), m1 = build_boson_model("b", r);
  const auto sp = make_space(d, 8);
  const auto g0 = compliance_gamma(m0, compile(m0, sp), {0, 6}, Variant::Quadratic);
  const auto g1 = compliance_gamma(m1, compile(m1, sp), {0, 6}, Variant::Quadratic);
  for (std::size_t i = 0; i < g0.size(); ++i) EXPECT_NEAR(g0[i].gamma, g1[i].gamma, 1e-8) << "n=" << g0[i].n;
}

TEST(Compliance, LinearUnderScaling) {
  SplitMix64 rng(6);
  const BosonCoefficients c = random_boson(rng, 2);
  BosonCoefficients s = c;
  const double k = -2.5;
  for (auto& x : s.V1) x *= k;
  s.V2 *= k;
  s.V3 *= k;
  const ModelSpec m0 = build_boson_model("a", c), m1 = build_boson_model("b", s);
  const auto sp = make_space(2, 10);
  const auto g0 = compliance_gamma(m0, compile(m0, sp), {0, 8}, Variant::Quadratic);
  const auto g1 = compliance_gamma(m1, compile(m1, sp), {0, 8}, Variant::Quadratic);
  for (std::size_t i = 0; i < g0.size(); ++i) EXPECT_NEAR(g1[i].gamma, std::abs(k) * g0[i].gamma, 1e-10 * g1[i].gamma);
}

TEST(Compliance, OptimalPsiSaturatesTheBound) {
  const ModelSpec m = boson_preset(3);
  const CompiledModel c = compile(m, make_space(3, 8));
  SplitMix64 rng(9);
  for (std::size_t n = 0; n <= 6; ++n) {
    const CVector phi = random_complex_vector(rng, c.HI.block_size(n));
    CVector hphi = c.HI.apply(embed(c.HI, n, phi));
    const double hn = norm2(hphi);
    CVector psi = hphi;
    for (auto& z : psi) z /= hn;
    const auto g = sector_metric(m, c, n);
    const auto [a, b] = compliance_weights(Variant::Quadratic, n);
    const double form = a * std::pow(norm2(phi), 2) + b * dot(phi, g.G.apply(phi)).real();
    EXPECT_NEAR(growth_bound_ratio(m, c, n, psi, phi), hn * hn / form, 1e-10 * hn * hn / form);
    const double gamma = compliance_gamma_at(m, c, n, Variant::Quadratic);
    EXPECT_LE(growth_bound_ratio(m, c, n, psi, phi), gamma * gamma * (1 + 1e-12));
    // a random psi does no better
    const CVector other = random_complex_vector(rng, c.HI.dimension());
    EXPECT_LE(growth_bound_ratio(m, c, n, other, phi), hn * hn / form * (1 + 1e-12));
  }
}

TEST(Split, LinearOnlyDecays) {
  const ModelSpec m = single_mode(CVector{0.5});
  const CompiledModel c = compile(m, make_space(1, 26));
  const auto s = split_compliance(m, c, {4, 24});
  ASSERT_TRUE(s.gamma2_fit);
  EXPECT_NEAR(s.gamma2_fit->slope, -0.5, 0.05);
  EXPECT_TRUE(s.structure_ok);
  EXPECT_TRUE(s.compliant);
}

TEST(Split, PairOnlyIsFlat) {
  const ModelSpec m = single_mode({}, {}, one_by_one(0.3));
  const CompiledModel c = compile(m, make_space(1, 26));
  const auto s = split_compliance(m, c, {4, 24});
  ASSERT_TRUE(s.gamma2_fit);
  EXPECT_NEAR(s.gamma2_fit->slope, 0.0, 0.1);
  EXPECT_TRUE(s.compliant);
  for (const auto& r : s.rows) EXPECT_LE(r.gamma2, std::sqrt(2.0) * 2 * 0.3 + 1e-12);
}

TEST(Split, QuarticOnlyHasNoOffDiagonalPart) {
  BosonCoefficients co;
  co.h0 = CMatrix::diagonal(std::vector<double>{1.0, 1.5});
  co.V4 = CMatrix(2, 2);
  co.V4(0, 0) = co.V4(1, 1) = 1.0;
  co.V4(0, 1) = co.V4(1, 0) = 0.5;
  const ModelSpec m = build_boson_model("v4", co);
  // n (n - 1) / sqrt(n) reaches its n^{3/2} regime only at large n
  const CompiledModel c = compile(m, make_space(2, 202));
  const auto s = split_compliance(m, c, {150, 200});
  EXPECT_EQ(c.H2.max_abs(), 0.0);
  EXPECT_TRUE(s.compliant);
  EXPECT_FALSE(s.gamma2_fit.has_value());
  ASSERT_TRUE(s.c_fit);
  EXPECT_NEAR(s.c_fit->slope, 1.5, 0.05);
}

TEST(Inequality, LinearSingleMode) {
  const ModelSpec m = single_mode(CVector{1.0});
  const CompiledModel c = compile(m, make_space(1, 6));
  const auto r = inequality_sampler(m, c, "eq36", 3, 1000, 42);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_LE(r.max_ratio, 1.0);
  EXPECT_GT(r.max_ratio, 0.0);
}

TEST(Inequality, NumberConservingPart) {
  const ModelSpec m = single_mode({}, CMatrix::identity(1));
  const CompiledModel c = compile(m, make_space(1, 8));
  const auto r = inequality_sampler(m, c, "eq35", 5, 1000, 42);
  EXPECT_EQ(r.violations, 0u);
  // d = 1: T phi_5 = 5 phi_5 and the right side is 5 |psi_5|, so every ratio is exactly 1
  EXPECT_NEAR(r.max_ratio, 1.0, 1e-12);
}

TEST(Inequality, ZeroOperatorGivesZeroRatio) {
  const ModelSpec m = single_mode(CVector{1.0});
  const CompiledModel c = compile(m, make_space(1, 6));
  EXPECT_EQ(inequality_sampler(m, c, "eq35", 3, 100, 1).max_ratio, 0.0);
}

TEST(Inequality, PresetsHoldOnAllInteriorSectors) {
  const ModelSpec m = boson_preset(3);
  const CompiledModel c = compile(m, make_space(3, 8));
  for (const char* b : {"eq35", "eq36"})
    for (std::size_t n = 0; n + 2 <= 8; ++n) EXPECT_EQ(inequality_sampler(m, c, b, n, 200, 42).violations, 0u) << b;
  const ModelSpec co = coulomb_preset(2);
  const CompiledModel cc = compile(co, make_space(8, 4));
  for (std::size_t n = 0; n + 2 <= 4; ++n) EXPECT_EQ(inequality_sampler(co, cc, "eq35", n, 200, 42).violations, 0u);
  const ModelSpec nel = nelson_preset(4, 4);
  const CompiledModel cn = compile(nel, make_space(4, 6));
  for (std::size_t n = 0; n + 2 <= 6; ++n) EXPECT_EQ(inequality_sampler(nel, cn, "eq13", n, 200, 42).violations, 0u);
  const ModelSpec pf = pauli_fierz_preset();
  const CompiledModel cp = compile(pf, make_space(pf.d, 5));
  for (std::size_t n = 0; n + 2 <= 5; ++n) EXPECT_EQ(inequality_sampler(pf, cp, "eq33", n, 200, 42).violations, 0u);
}

TEST(Inequality, Preconditions) {
  const ModelSpec m = boson_preset(2);
  const CompiledModel c = compile(m, make_space(2, 6));
  EXPECT_THROW(inequality_sampler(m, c, "eq13", 2, 10, 1), ValidationError);
  EXPECT_THROW(inequality_sampler(m, c, "eq99", 2, 10, 1), ValidationError);
  EXPECT_THROW(inequality_sampler(m, c, "eq36", 5, 10, 1), ValidationError);
}

TEST(Inequality, SeededAndReproducible) {
  const ModelSpec m = boson_preset(2);
  const CompiledModel c = compile(m, make_space(2, 8));
  const auto a = inequality_sampler(m, c, "eq36", 4, 300, 7);
  const auto b = inequality_sampler(m, c, "eq36", 4, 300, 7);
  const auto d = inequality_sampler(m, c, "eq36", 4, 300, 8);
  EXPECT_EQ(a.max_ratio, b.max_ratio);
  EXPECT_NE(a.max_ratio, d.max_ratio);
}

TEST(Inequality, ProjectedDrawHasGaussianMoments) {
  // E |<psi, w>|^2 = 2 |w|^2 and E |psi|^2 = 2 dim for i.i.d. complex normals with unit-variance parts
  SplitMix64 rng(21);
  const std::size_t dim = 6;
  std::vector<std::vector<CVector>> w(1, std::vector<CVector>(1));
  w[0][0] = CVector{1.0, Complex(0, 2), 0.0, 0.5, 0.0, 0.0};
  const double w2 = std::pow(norm2(w[0][0]), 2);
  double m_inner = 0.0, m_norm = 0.0;
  const int trials = 200000;
  for (int t = 0; t < trials; ++t) {
    const auto [inner, norm_sq] = detail::projected_gaussian(rng, w, 0, dim);
    m_inner += std::norm(inner[0]);
    m_norm += norm_sq;
  }
  EXPECT_NEAR(m_inner / trials, 2.0 * w2, 0.02 * 2.0 * w2);
  EXPECT_NEAR(m_norm / trials, 2.0 * dim, 0.01 * 2.0 * dim);
}

TEST(RelativeBound, ZeroInteraction) {
  const ModelSpec m = single_mode();
  const CompiledModel c = compile(m, make_space(1, 8));
  const auto r = relative_bound_fit(c);
  ASSERT_TRUE(r.epsilon_min.has_value());
  EXPECT_EQ(*r.epsilon_min, 0.0);
  EXPECT_EQ(r.c_at_eps, 0.0);
}

TEST(RelativeBound, SmallBosonCouplingIsStable) {
  const ModelSpec m = boson_preset(2);
  const CompiledModel c = compile(m, make_space(2, 10));
  const auto r = relative_bound_fit(c, 3, 500, 42);
  const auto it = std::find_if(r.rows.begin(), r.rows.end(), [](const auto& row) { return row.epsilon == 0.5; });
  ASSERT_NE(it, r.rows.end());
  EXPECT_TRUE(it->stable);
  EXPECT_TRUE(std::isfinite(it->c_full));
  ASSERT_TRUE(r.epsilon_min.has_value());
}

TEST(RelativeBound, TrilinearAcrossCutoffs) {
  const ModelSpec m = build_toy(ToyKind::H3);
  // |(a*^3 + a^3) phi_n| ~ n^{3/2}: not dominated by N, dominated by N^3
  const auto lin = relative_bound_scan(m, {12, 16, 20}, 0.5, 1, 200, 42);
  EXPECT_FALSE(lin.stable);
  EXPECT_LT(lin.rows[0].c, lin.rows[1].c);
  EXPECT_LT(lin.rows[1].c, lin.rows[2].c);
  const auto cubic = relative_bound_scan(m, {12, 16, 20}, 0.5, 3, 200, 42);
  EXPECT_TRUE(cubic.stable);
}

TEST(Spectrum, FreeFieldIsCutoffIndependent) {
  BosonCoefficients co;
  co.h0 = CMatrix::diagonal(std::vector<double>{1.0, 2.0});
  const ModelSpec m = build_boson_model("free", co);
  const auto rows = spectrum_drift(m, {4, 6, 8}, 5);
  for (const auto& r : rows) {
    const std::vector<double> expect{0, 1, 2, 2, 3};
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(r.levels[i], expect[i], 1e-12);
    for (double x : r.drift) EXPECT_NEAR(x, 0.0, 1e-12);
  }
}

TEST(Spectrum, DisplacedOscillator) {
  const ModelSpec m = single_mode(CVector{0.2});
  const auto rows = spectrum_drift(m, {10, 12}, 1);
  EXPECT_LE(std::abs(rows[1].drift[0]), 1e-6);
  EXPECT_NEAR(rows[1].levels[0], -0.04, 1e-6);
}

TEST(Spectrum, TrilinearGroundStateRunsAway) {
  const ModelSpec m = build_toy(ToyKind::H3);
  const auto rows = spectrum_drift(m, {8, 12, 16, 20}, 1);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].levels[0], rows[i - 1].levels[0]);
  for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_GE(std::abs(rows[i].drift[0]), std::abs(rows[i - 1].drift[0]));
}

TEST(Spectrum, RejectsBadCutoffs) {
  const ModelSpec m = single_mode(CVector{0.2});
  EXPECT_THROW(spectrum_drift(m, {6, 4}, 1), ValidationError);
  EXPECT_THROW(spectrum_drift(m, {2}, 5), ValidationError);
  EXPECT_THROW(spectrum_drift(nelson_preset(), {6}, 1), SizingError);
}

TEST(Report, JsonAndCsvShape) {
  const ModelSpec m = boson_preset(2);
  const CompiledModel c = compile(m, make_space(2, 10));
  ComplianceReport rep = verify_model(m, c, {2, 8}, Variant::Quadratic);
  rep.model_hash = "abc";
  const auto j = report_to_json(rep);
  EXPECT_EQ(j["header"]["basis_ordering"], kBasisOrderingTag);
  EXPECT_EQ(j["header"]["model_hash"], "abc");
  EXPECT_EQ(j["gamma"].size(), 7u);
  EXPECT_EQ(j["verdict"], "compliant");
  EXPECT_TRUE(j["band"]["ok"].get<bool>());
  for (const auto& g : j["gamma"]) EXPECT_GE(g["gamma"].get<double>(), 0.0);
  EXPECT_TRUE(j["fit"].contains("residual"));
  const std::string csv = report_to_csv(rep);
  EXPECT_NE(csv.find("n,gamma,gamma2,C_n\n"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5 + 7);
  EXPECT_EQ(report_to_json(verify_model(m, c, {2, 8}, Variant::Quadratic)).dump(),
            report_to_json(verify_model(m, c, {2, 8}, Variant::Quadratic)).dump());
}
