#include <gtest/gtest.h>

#include "fockbench/linalg.hpp"
#include "fockbench/random.hpp"

using namespace fockbench;

namespace {

CMatrix random_hermitian(SplitMix64& rng, std::size_t n) {
  CMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.normal_pair();
  return Complex(0.5) * (a + a.adjoint());
}

CMatrix random_matrix(SplitMix64& rng, std::size_t r, std::size_t c) {
  CMatrix a(r, c);
  for (auto& x : a.raw()) x = rng.normal_pair();
  return a;
}

}  // namespace

TEST(SplitMix64, ReferenceSequence) {
  // first outputs for seed 0 of the published SplitMix64 reference implementation
  SplitMix64 g(0);
  EXPECT_EQ(g.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(g.next(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(g.next(), 0x06C45D188009454FULL);
}

TEST(Jacobi, ReconstructsHermitianMatrix) {
  SplitMix64 rng(7);
  for (std::size_t n : {1, 2, 5, 17, 40}) {
    const CMatrix a = random_hermitian(rng, n);
    const auto es = jacobi_eigh(a);
    ASSERT_EQ(es.values.size(), n);
    for (std::size_t k = 1; k < n; ++k) EXPECT_LE(es.values[k - 1], es.values[k]);
    CMatrix lam = CMatrix::diagonal(std::span<const double>(es.values));
    const CMatrix rec = es.vectors * lam * es.vectors.adjoint();
    EXPECT_LT((rec - a).max_abs(), 1e-11) << "n=" << n;
    EXPECT_LT((es.vectors.adjoint() * es.vectors - CMatrix::identity(n)).max_abs(), 1e-12);
  }
}

TEST(Jacobi, DiagonalInputIsReturnedSorted) {
  const std::vector<double> d{3.0, -1.0, 2.0};
  const auto ev = eigvalsh(CMatrix::diagonal(std::span<const double>(d)));
  EXPECT_EQ(ev, (std::vector<double>{-1.0, 2.0, 3.0}));
}

TEST(Cholesky, FactorsPositiveDefinite) {
  SplitMix64 rng(11);
  const CMatrix x = random_matrix(rng, 12, 12);
  const CMatrix b = x.adjoint() * x + CMatrix::identity(12);
  const CMatrix l = cholesky(b);
  EXPECT_LT((l * l.adjoint() - b).max_abs(), 1e-11);
  CVector rhs = random_complex_vector(rng, 12);
  CVector y = rhs;
  solve_lower(l, y);
  solve_lower_adjoint(l, y);
  const CVector back = b.apply(y);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_LT(std::abs(back[i] - rhs[i]), 1e-10);
}

TEST(Cholesky, RejectsIndefinite) {
  const std::vector<double> d{1.0, -1.0};
  EXPECT_THROW(cholesky(CMatrix::diagonal(std::span<const double>(d))), NumericalError);
}

TEST(Lanczos, MatchesJacobiLargestEigenvalue) {
  SplitMix64 rng(3);
  const CMatrix x = random_matrix(rng, 60, 50);
  const CMatrix g = x.adjoint() * x;
  const double ref = eigvalsh(g).back();
  const double got = lanczos_max(50, [&](std::span<const Complex> in, std::span<Complex> out) { g.apply_add(in, out); });
  EXPECT_NEAR(got, ref, 1e-10 * ref);
}

TEST(Sparse, ProductAndAdjointMatchDense) {
  SplitMix64 rng(5);
  CMatrix a = random_matrix(rng, 7, 9), b = random_matrix(rng, 9, 4);
  for (std::size_t i = 0; i < 7; ++i) a(i, (i * 3) % 9) = 0.0;
  const auto sa = SparseMatrix::from_dense(a), sb = SparseMatrix::from_dense(b);
  EXPECT_LT(((sa * sb).to_dense() - a * b).max_abs(), 1e-12);
  EXPECT_LT((sa.adjoint().to_dense() - a.adjoint()).max_abs(), 0.0 + 1e-15);
  EXPECT_LT(((sa + sa).to_dense() - Complex(2.0) * a).max_abs(), 1e-15);
}

TEST(Kron, MixedProductProperty) {
  SplitMix64 rng(9);
  const CMatrix a = random_matrix(rng, 2, 3), b = random_matrix(rng, 3, 2);
  const CMatrix c = random_matrix(rng, 3, 2), d = random_matrix(rng, 2, 2);
  EXPECT_LT((kron(a, c) * kron(b, d) - kron(a * b, c * d)).max_abs(), 1e-12);
}

TEST(OperatorNorm, DiagonalMatrix) {
  const std::vector<double> d{0.5, -3.0, 2.0};
  EXPECT_NEAR(operator_norm(CMatrix::diagonal(std::span<const double>(d))), 3.0, 1e-13);
}
