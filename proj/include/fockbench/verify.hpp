#pragma once

// Numerical checks of the self-adjointness criterion's hypotheses on a compiled model:
// band structure, the per-sector compliance value gamma(n), the diagonal/off-diagonal split,
// sampling of the explicit model inequalities, a relative-bound diagnostic and spectra under
// growing cutoffs. All checks stay on interior sectors where the compression is exact.

#include <algorithm>
#include <array>
#include <cstdio>
#include <functional>
#include <limits>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fockbench/block_operator.hpp"
#include "fockbench/fock_space.hpp"
#include "fockbench/linalg.hpp"
#include "fockbench/model.hpp"
#include "fockbench/opdsl.hpp"
#include "fockbench/parallel.hpp"
#include "fockbench/random.hpp"

#ifndef FOCKBENCH_VERSION
#define FOCKBENCH_VERSION "0.0.0"
#endif

namespace fockbench {

inline constexpr double kBandTolerance = 1e-12;
inline constexpr double kViolationSlack = 1e-8;
inline constexpr const char* kTruncationConvention =
    "compression to sectors <= n_max; products drop blocks routed above the cutoff";

// ---------------------------------------------------------------------------------------------
// least squares on log-log data

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square deviation in log space
};

inline FitResult scaling_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ValidationError("xs and ys differ in length", "scaling_fit");
  if (xs.size() < 3) throw ValidationError("need at least 3 points", "scaling_fit");
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw ValidationError("log-log fit needs positive data", "scaling_fit");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 1e-24 * std::max(1.0, mx * mx)) throw ValidationError("degenerate x range", "scaling_fit");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

// ---------------------------------------------------------------------------------------------
// band structure

struct BandResult {
  std::size_t expected = 0;
  bool ok = true;
  double max_offband = 0.0;
  std::size_t structural = 0;
};

inline BandResult band_check(const BlockBandedOperator& op, std::size_t expected) {
  BandResult r;
  r.expected = expected;
  for (const auto& [k, b] : op.blocks()) {
    const std::size_t dist = k.first > k.second ? k.first - k.second : k.second - k.first;
    const double m = b.max_abs();
    if (m > kBandTolerance) r.structural = std::max(r.structural, dist);
    if (dist > expected) r.max_offband = std::max(r.max_offband, m);
  }
  r.ok = r.max_offband <= kBandTolerance;
  return r;
}

/// Blocks of `op` whose sector distance satisfies `keep`.
template <typename Pred>
BlockBandedOperator band_part(const BlockBandedOperator& op, Pred keep) {
  BlockBandedOperator r(op.space(), op.particle_dim(), op.bandwidth(), op.hermitian());
  for (const auto& [k, b] : op.blocks()) {
    const std::size_t dist = k.first > k.second ? k.first - k.second : k.second - k.first;
    if (keep(dist)) r.set_block(k.first, k.second, b);
  }
  return r;
}

// ---------------------------------------------------------------------------------------------
// sector metric and generalized eigenvalues

struct SectorMetric {
  std::size_t n = 0;
  CMatrix G;
};

inline double metric_shift(const ModelSpec& m) { return std::abs(m.M1) + std::abs(m.M2) + 1.0; }

/// Gram matrix of the X_n inner product on sector n: (H01 (x) 1 + 1 (x) H02) restricted to the
/// sector plus (|M1| + |M2| + 1) I. Throws NumericalError when it is not positive definite.
inline SectorMetric sector_metric(const ModelSpec& m, const CompiledModel& c, std::size_t n) {
  if (n > c.H0.space()->n_max()) throw ValidationError("sector beyond cutoff", "n");
  SectorMetric s;
  s.n = n;
  const std::size_t dim = c.H0.block_size(n);
  const Block* b = c.H0.block(n, n);
  s.G = b ? b->to_dense() : CMatrix(dim, dim);
  const double shift = metric_shift(m);
  for (std::size_t i = 0; i < dim; ++i) s.G(i, i) += shift;
  cholesky(s.G);
  return s;
}

namespace detail {

/// Column-sector restriction of a banded operator: the blocks (m, n) for fixed n.
struct ColumnRestriction {
  std::vector<const Block*> blocks;
  std::size_t cols = 0;

  ColumnRestriction(const BlockBandedOperator& op, std::size_t n) : cols(op.block_size(n)) {
    const std::size_t lo = n >= op.bandwidth() ? n - op.bandwidth() : 0;
    const std::size_t hi = std::min(op.space()->n_max(), n + op.bandwidth());
    for (std::size_t m = lo; m <= hi; ++m)
      if (const Block* b = op.block(m, n); b && b->max_abs() > 0.0) blocks.push_back(b);
  }

  bool empty() const { return blocks.empty(); }

  /// y += A^dagger A x
  void gram_apply(std::span<const Complex> x, std::span<Complex> y) const {
    for (const Block* b : blocks) {
      CVector t(b->rows());
      b->apply_add(x, t);
      b->apply_adjoint_add(t, y);
    }
  }

  double image_norm2(std::span<const Complex> x) const {
    double s = 0.0;
    for (const Block* b : blocks) {
      CVector t(b->rows());
      b->apply_add(x, t);
      s += std::pow(norm2(t), 2);
    }
    return s;
  }

  CMatrix gram_dense() const {
    CMatrix k(cols, cols);
    for (const Block* b : blocks) {
      const CMatrix d = b->to_dense();
      k += d.adjoint() * d;
    }
    return k;
  }
};

/// Solves L X = M column by column, returning X.
inline CMatrix solve_lower_columns(const CMatrix& l, const CMatrix& m) {
  CMatrix x(m.rows(), m.cols());
  CVector col(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    for (std::size_t i = 0; i < m.rows(); ++i) col[i] = m(i, j);
    solve_lower(l, col);
    for (std::size_t i = 0; i < m.rows(); ++i) x(i, j) = col[i];
  }
  return x;
}

inline bool is_diagonal(const Block& b) {
  bool diag = true;
  b.for_each_nonzero([&](std::size_t i, std::size_t j, Complex) {
    if (i != j) diag = false;
  });
  return diag;
}

}  // namespace detail

inline constexpr std::size_t kDensePencilLimit = 400;

/// lambda_max of K x = lambda B x for Hermitian K and positive definite B, by Cholesky
/// reduction B = R R^dagger and Jacobi on R^{-1} K R^{-dagger}.
inline double generalized_max_eigenvalue(const CMatrix& K, const CMatrix& B) {
  if (K.rows() != K.cols() || B.rows() != B.cols() || K.rows() != B.rows())
    throw ValidationError("K and B must be square of equal size", "pencil");
  if (K.rows() == 0) return 0.0;
  const CMatrix L = cholesky(B);
  const CMatrix Y = detail::solve_lower_columns(L, K);
  CMatrix C = detail::solve_lower_columns(L, Y.adjoint());
  C = Complex(0.5) * (C + C.adjoint());
  return eigvalsh(C).back();
}

/// Largest eigenvalue of the pencil (A^dagger A, a I + b G_n) where A is `op` restricted to
/// column sector n and G_n the sector metric. Dense Cholesky reduction plus Jacobi for small
/// sectors, Lanczos in the B inner product otherwise.
inline double sector_pencil_max(const BlockBandedOperator& op, const CompiledModel& c, const ModelSpec& m,
                                std::size_t n, double a, double b, std::size_t dense_limit = kDensePencilLimit) {
  detail::ColumnRestriction A(op, n);
  if (A.empty()) return 0.0;
  const std::size_t dim = A.cols;
  const double shift = metric_shift(m);
  const Block* h0 = c.H0.block(n, n);

  if (dim <= dense_limit) {
    CMatrix B = b != 0.0 && h0 ? Complex(b) * h0->to_dense() : CMatrix(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) B(i, i) += a + b * shift;
    return std::max(0.0, generalized_max_eigenvalue(A.gram_dense(), B));
  }

  LinearOperator k_op = [&](std::span<const Complex> x, std::span<Complex> y) { A.gram_apply(x, y); };
  if (b == 0.0 || !h0 || detail::is_diagonal(*h0)) {
    CVector diag(dim, Complex(a + b * shift));
    if (b != 0.0 && h0) h0->for_each_nonzero([&](std::size_t i, std::size_t, Complex v) { diag[i] += b * v; });
    LinearOperator b_op = [&](std::span<const Complex> x, std::span<Complex> y) {
      for (std::size_t i = 0; i < dim; ++i) y[i] += diag[i] * x[i];
    };
    auto solve = [&](std::span<Complex> x) {
      for (std::size_t i = 0; i < dim; ++i) x[i] /= diag[i];
    };
    return std::max(0.0, pencil_lanczos_max(dim, k_op, b_op, solve));
  }
  LinearOperator b_op = [&](std::span<const Complex> x, std::span<Complex> y) {
    h0->apply_add(x, y, b);
    for (std::size_t i = 0; i < dim; ++i) y[i] += (a + b * shift) * x[i];
  };
  auto solve = [&](std::span<Complex> x) {
    CVector rhs(x.begin(), x.end());
    for (std::size_t i = 0; i < dim; ++i) x[i] /= (a + b * shift);
    conjugate_gradient(b_op, rhs, x, 1e-14);
  };
  return std::max(0.0, pencil_lanczos_max(dim, k_op, b_op, solve));
}

// ---------------------------------------------------------------------------------------------
// compliance

enum class Variant { Quadratic, Quartic };

inline const char* to_string(Variant v) { return v == Variant::Quadratic ? "quadratic" : "quartic"; }

inline Variant parse_variant(const std::string& s) {
  if (s == "quadratic") return Variant::Quadratic;
  if (s == "quartic") return Variant::Quartic;
  throw ValidationError("expected 'quadratic' or 'quartic'", "variant");
}

inline std::size_t expected_bandwidth(Variant v) { return v == Variant::Quadratic ? 2 : 4; }

/// Weights (a, b) of B = a I + b G_n.
inline std::pair<double, double> compliance_weights(Variant v, std::size_t n) {
  const double p = static_cast<double>(n + 1);
  return v == Variant::Quadratic ? std::pair{p * p, p} : std::pair{p * p * p * p, p * p};
}

/// gamma(n) = sqrt(lambda_max(A^dagger A, B)): the optimal per-sector constant of the A_I bound.
inline double compliance_gamma_at(const ModelSpec& m, const CompiledModel& c, std::size_t n, Variant v) {
  const auto [a, b] = compliance_weights(v, n);
  return std::sqrt(sector_pencil_max(c.HI, c, m, n, a, b));
}

struct NRange {
  std::size_t from = 0;
  std::size_t to = 0;  // inclusive
};

inline void require_interior(const NRange& r, std::size_t n_max, std::size_t bandwidth) {
  if (r.from > r.to) throw ValidationError("empty range", "n_range");
  if (r.to + bandwidth > n_max)
    throw ValidationError("sector " + std::to_string(r.to) + " is within the bandwidth " + std::to_string(bandwidth) +
                              " of the cutoff " + std::to_string(n_max) + "; compression would bias the result",
                          "n_range");
}

struct GammaRow {
  std::size_t n = 0;
  double gamma = 0.0;
};

inline std::vector<GammaRow> compliance_gamma(const ModelSpec& m, const CompiledModel& c, NRange r, Variant v) {
  require_interior(r, c.HI.space()->n_max(), c.HI.bandwidth());
  std::vector<GammaRow> rows(r.to - r.from + 1);
  parallel_for(rows.size(), [&](std::size_t i) {
    rows[i].n = r.from + i;
    rows[i].gamma = compliance_gamma_at(m, c, r.from + i, v);
  });
  return rows;
}

/// Fit of log y against log(n+1) over the positive entries; nullopt with fewer than 3.
inline std::optional<FitResult> sector_fit(const std::vector<std::size_t>& ns, const std::vector<double>& ys) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < ns.size(); ++i)
    if (ys[i] > 0.0) {
      x.push_back(static_cast<double>(ns[i] + 1));
      y.push_back(ys[i]);
    }
  if (x.size() < 3) return std::nullopt;
  return scaling_fit(x, y);
}

struct SplitRow {
  std::size_t n = 0;
  double gamma2 = 0.0;  // |H2 restricted to sector n| / (n + 1)
  double c_n = 0.0;     // |Hdiag G_n^{-1/2}|
};

struct SplitResult {
  bool structure_ok = true;
  std::vector<SplitRow> rows;
  std::optional<FitResult> gamma2_fit;
  std::optional<FitResult> c_fit;
  bool compliant = true;
};

inline SplitResult split_compliance(const ModelSpec& m, const CompiledModel& c, NRange r, double threshold = 0.1) {
  require_interior(r, c.HI.space()->n_max(), c.HI.bandwidth());
  SplitResult s;
  s.structure_ok = band_check(c.Hdiag, 0).ok;
  for (const auto& [k, b] : c.H2.blocks())
    if (k.first == k.second && b.max_abs() > 0.0) s.structure_ok = false;
  s.rows.resize(r.to - r.from + 1);
  parallel_for(s.rows.size(), [&](std::size_t i) {
    const std::size_t n = r.from + i;
    s.rows[i].n = n;
    s.rows[i].gamma2 = std::sqrt(sector_pencil_max(c.H2, c, m, n, 1.0, 0.0)) / static_cast<double>(n + 1);
    s.rows[i].c_n = std::sqrt(sector_pencil_max(c.Hdiag, c, m, n, 0.0, 1.0));
  });
  std::vector<std::size_t> ns;
  std::vector<double> g2, cn;
  for (const auto& row : s.rows) {
    ns.push_back(row.n);
    g2.push_back(row.gamma2);
    cn.push_back(row.c_n);
  }
  s.gamma2_fit = sector_fit(ns, g2);
  s.c_fit = sector_fit(ns, cn);
  const bool all_zero = std::all_of(g2.begin(), g2.end(), [](double x) { return x == 0.0; });
  s.compliant = s.structure_ok && (all_zero || (s.gamma2_fit && s.gamma2_fit->slope <= threshold));
  return s;
}

// ---------------------------------------------------------------------------------------------
// inequality sampling

struct InequalityResult {
  std::string bound;
  std::size_t n = 0;
  std::size_t samples = 0;
  double max_ratio = 0.0;
  std::size_t violations = 0;
};

namespace detail {

/// <phi, (P (x) 1) phi> for phi in sector n laid out particle-major (x * dim + s).
inline double particle_form(const CMatrix& p, std::span<const Complex> phi, std::size_t L) {
  const std::size_t dim = phi.size() / L;
  double s = 0.0;
  for (std::size_t x = 0; x < L; ++x) {
    auto px = phi.subspan(x * dim, dim);
    for (std::size_t y = 0; y < L; ++y) {
      const Complex pxy = p(x, y);
      if (pxy == Complex{}) continue;
      s += (pxy * dot(px, phi.subspan(y * dim, dim))).real();
    }
  }
  return s;
}

inline double block_form(const Block* b, std::span<const Complex> phi) {
  if (!b) return 0.0;
  CVector t(phi.size());
  b->apply_add(phi, t);
  return dot(phi, t).real();
}

inline CMatrix inverse_sqrt_shifted(const CMatrix& h, double shift) {
  return hermitian_function(h, [&](double l) { return Complex(1.0 / std::sqrt(l + shift)); });
}

struct Line {
  const BlockBandedOperator* op;
  double lhs_factor;
  // right side given <phi, .> forms and sector norms of psi (index i + 2 for psi_{n+i})
  std::function<double(std::span<const Complex>, const std::array<double, 5>&)> rhs;
};

/// Draws psi_k, i.i.d. complex Gaussian on a sector of dimension `dim`, through the statistics
/// the inequalities see: <psi_k, w[l][k]> for every line l and |psi_k|^2. Gram-Schmidt on the
/// images gives an orthonormal set e_j; psi_k = sum g_j e_j + rest with g_j ~ CN(0, 2) and
/// |rest|^2 ~ chi-square with 2 (dim - r) degrees of freedom, which is the exact joint law of a
/// full draw at a fraction of the cost.
inline std::pair<std::vector<Complex>, double> projected_gaussian(SplitMix64& rng,
                                                                  const std::vector<std::vector<CVector>>& w,
                                                                  std::size_t k, std::size_t dim) {
  std::vector<CVector> basis;
  std::vector<std::vector<Complex>> coeff(w.size());  // <e_j, w_l>
  for (std::size_t l = 0; l < w.size(); ++l) {
    const CVector& v = w[l][k];
    if (v.empty()) continue;
    CVector r = v;
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const Complex p = dot(basis[j], r);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= p * basis[j][i];
    }
    const double rn = norm2(r);
    if (rn <= 1e-14 * norm2(v)) continue;
    for (auto& z : r) z /= rn;
    basis.push_back(std::move(r));
  }
  for (std::size_t l = 0; l < w.size(); ++l) {
    coeff[l].assign(basis.size(), Complex{});
    if (w[l][k].empty()) continue;
    for (std::size_t j = 0; j < basis.size(); ++j) coeff[l][j] = dot(basis[j], w[l][k]);
  }
  std::vector<Complex> g(basis.size());
  double norm_sq = 0.0;
  for (auto& x : g) {
    x = rng.normal_pair();
    norm_sq += std::norm(x);
  }
  norm_sq += rng.chi_square_complex(dim - basis.size());
  std::vector<Complex> inner(w.size());
  for (std::size_t l = 0; l < w.size(); ++l)
    for (std::size_t j = 0; j < basis.size(); ++j) inner[l] += std::conj(g[j]) * coeff[l][j];
  return {inner, norm_sq};
}

inline void require_family(const ModelSpec& m, const std::string& family, const std::string& bound) {
  if (m.family != family)
    throw ValidationError(bound + " applies to the " + family + " family, model '" + m.name + "' is '" + m.family + "'",
                          "bound");
}

}  // namespace detail

/// Draws (psi, phi_n) pairs and evaluates |<psi, T phi_n>| against the right side of the
/// model's inequality with constants computed from the discrete data. Both sides depend on psi
/// only through the sectors n-2..n+2; those are drawn via projected_gaussian, other sectors
/// cancel from the ratio. Sample s uses the stream derive_seed(seed, n, s).
inline InequalityResult inequality_sampler(const ModelSpec& m, const CompiledModel& c, const std::string& bound,
                                           std::size_t n, std::size_t samples, std::uint64_t seed) {
  const SpacePtr& space = c.HI.space();
  if (n + 2 > space->n_max())
    throw ValidationError("sector " + std::to_string(n) + " needs n + 2 <= n_max = " + std::to_string(space->n_max()), "n");
  const double nn = static_cast<double>(n);
  const std::size_t L = m.L;
  std::vector<detail::Line> lines;
  BlockBandedOperator odd = band_part(c.HI, [](std::size_t k) { return k % 2 == 1; });
  BlockBandedOperator even = band_part(c.HI, [](std::size_t k) { return k % 2 == 0; });
  auto sum_psi = [](const std::array<double, 5>& p, std::initializer_list<int> idx) {
    double s = 0.0;
    for (int i : idx) s += p[static_cast<std::size_t>(i + 2)];
    return s;
  };

  if (bound == "eq36") {
    detail::require_family(m, "boson", bound);
    const double v1 = m.has("V1") ? m.data.at("V1").values.frobenius() : 0.0;
    const double v3 = m.has("V3") ? m.data.at("V3").values.frobenius() : 0.0;
    lines.push_back({&c.H2, 1.0, [=](std::span<const Complex>, const std::array<double, 5>& p) {
                       return 2.0 * (std::sqrt(nn + 1.0) * v1 + (nn + 1.0) * v3) * sum_psi(p, {-2, -1, 1, 2});
                     }});
  } else if (bound == "eq35") {
    detail::require_family(m, "boson", bound);
    const double v2 = m.has("V2") ? m.data.at("V2").values.frobenius() : 0.0;
    double c4 = 0.0;
    if (m.has("V4")) {
      const CMatrix& w = m.data.at("V4").values;
      const CMatrix r = detail::inverse_sqrt_shifted(m.h02_matrix(), 1.0);
      for (std::size_t j = 0; j < m.d; ++j) {
        CMatrix dj(m.d, m.d);
        for (std::size_t i = 0; i < m.d; ++i) dj(i, i) = w(i, j);
        c4 = std::max(c4, operator_norm(dj * r));
      }
    }
    const Block* h0 = c.H0.block(n, n);
    lines.push_back({&c.Hdiag, 1.0, [=](std::span<const Complex> phi, const std::array<double, 5>& p) {
                       const double kin = std::sqrt(std::max(0.0, detail::block_form(h0, phi)));
                       return (nn * v2 + c4 * (std::pow(nn, 1.5) * kin + nn * nn)) * p[2];
                     }});
  } else if (bound == "eq13") {
    detail::require_family(m, "nelson", bound);
    const CMatrix& lap = m.array("laplacian", "bound").values;
    const CMatrix& v = m.array("v", "bound").values;
    const CMatrix r = detail::inverse_sqrt_shifted(lap, 1.0);
    double c1sq = 0.0;
    std::vector<double> vsq(L, 0.0);
    for (std::size_t k = 0; k < v.cols(); ++k) {
      CMatrix dk(L, L);
      for (std::size_t x = 0; x < L; ++x) {
        dk(x, x) = v(x, k);
        vsq[x] += std::norm(v(x, k));
      }
      c1sq += std::pow(operator_norm(dk * r), 2);
    }
    const double c1 = std::sqrt(c1sq);
    const double c2 = operator_norm(r * CMatrix::diagonal(std::span<const double>(vsq)) * r);
    lines.push_back({&c.HI, 1.0, [=, &lap](std::span<const Complex> phi, const std::array<double, 5>& p) {
                       const double grad = std::sqrt(std::max(0.0, detail::particle_form(lap, phi, L)));
                       return std::sqrt(2.0) * (2.0 * std::sqrt(nn) * c1 + std::sqrt(c2)) * (grad + 1.0) *
                              sum_psi(p, {-1, 1});
                     }});
  } else if (bound == "eq33") {
    detail::require_family(m, "pauli-fierz", bound);
    const CMatrix& lap = m.array("laplacian", "bound").values;
    const double chi = m.array("chi", "bound").values.frobenius();
    lines.push_back({&odd, 0.5, [=, &lap](std::span<const Complex> phi, const std::array<double, 5>& p) {
                       const double grad = std::sqrt(std::max(0.0, detail::particle_form(lap, phi, L)));
                       return std::sqrt(2.0) * chi * std::sqrt(nn + 1.0) * grad * sum_psi(p, {-1, 1});
                     }});
    lines.push_back({&even, 1.0, [=](std::span<const Complex>, const std::array<double, 5>& p) {
                       return 2.0 * chi * chi * (nn + 1.0) * sum_psi(p, {-2, -1, 0, 1, 2});
                     }});
  } else {
    throw ValidationError("unknown bound '" + bound + "' (expected eq13, eq33, eq35 or eq36)", "bound");
  }

  const std::size_t lo = n >= 2 ? n - 2 : 0;
  const std::size_t hi = std::min(space->n_max(), n + 2);
  const std::size_t cols = c.HI.block_size(n);
  std::vector<double> ratio(samples, 0.0);
  std::vector<std::size_t> bad(samples, 0);
  parallel_for(samples, [&](std::size_t s) {
    SplitMix64 rng(derive_seed(seed, n, s));
    CVector phi = random_complex_vector(rng, cols);
    const double pn = norm2(phi);
    for (auto& z : phi) z /= pn;
    // images T phi per line and band sector
    std::vector<std::vector<CVector>> w(lines.size(), std::vector<CVector>(hi - lo + 1));
    for (std::size_t l = 0; l < lines.size(); ++l)
      for (std::size_t k = lo; k <= hi; ++k)
        if (const Block* b = lines[l].op->block(k, n)) {
          w[l][k - lo].assign(b->rows(), Complex{});
          b->apply_add(phi, w[l][k - lo]);
        }
    std::vector<Complex> lhs(lines.size());
    std::array<double, 5> norms{};
    double total = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) {
      const auto [inner, norm_sq] = detail::projected_gaussian(rng, w, k - lo, c.HI.block_size(k));
      for (std::size_t l = 0; l < lines.size(); ++l) lhs[l] += inner[l];
      norms[k + 2 - n] = norm_sq;
      total += norm_sq;
    }
    total = std::sqrt(total);
    for (auto& x : norms) x = std::sqrt(x) / total;
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const double lv = lines[l].lhs_factor * std::abs(lhs[l]) / total;
      const double r = lines[l].rhs(phi, norms);
      double q;
      if (r > 0.0) q = lv / r;
      else q = lv > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      ratio[s] = std::max(ratio[s], q);
      if (q > 1.0 + kViolationSlack) ++bad[s];
    }
  });
  InequalityResult res;
  res.bound = bound;
  res.n = n;
  res.samples = samples;
  for (std::size_t s = 0; s < samples; ++s) {
    res.max_ratio = std::max(res.max_ratio, ratio[s]);
    res.violations += bad[s];
  }
  return res;
}

/// The inequalities that apply to a model family.
inline std::vector<std::string> matching_bounds(const ModelSpec& m) {
  if (m.family == "boson") return {"eq35", "eq36"};
  if (m.family == "nelson") return {"eq13"};
  if (m.family == "pauli-fierz") return {"eq33"};
  return {};
}

/// Left over right side of the A_I bound for given psi (full vector) and phi_n (sector vector):
/// |<psi, HI phi>|^2 / (sum_i |psi_{n+i}|^2 <phi, B phi>), band i = -b..b.
inline double growth_bound_ratio(const ModelSpec& m, const CompiledModel& c, std::size_t n, std::span<const Complex> psi,
                        std::span<const Complex> phi, Variant v = Variant::Quadratic) {
  const auto& op = c.HI;
  const std::size_t bw = op.bandwidth();
  const std::size_t lo = n >= bw ? n - bw : 0, hi = std::min(op.space()->n_max(), n + bw);
  Complex lhs{};
  double band = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) {
    auto pk = psi.subspan(op.block_offset(k), op.block_size(k));
    band += std::pow(norm2(pk), 2);
    if (const Block* b = op.block(k, n)) {
      CVector t(b->rows());
      b->apply_add(phi, t);
      lhs += dot(pk, t);
    }
  }
  const auto [a, bb] = compliance_weights(v, n);
  const double phin = std::pow(norm2(phi), 2);
  const double form = a * phin + bb * (detail::block_form(c.H0.block(n, n), phi) + metric_shift(m) * phin);
  return std::norm(lhs) / (band * form);
}

// ---------------------------------------------------------------------------------------------
// relative bound diagnostic

inline const std::vector<double>& epsilon_grid() {
  static const std::vector<double> g{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  return g;
}

struct RelativeBoundRow {
  double epsilon = 0.0;
  double c_half = 0.0;  // C(eps) over the first half of the samples
  double c_full = 0.0;  // C(eps) over all samples
  bool stable = false;
};

struct RelativeBoundResult {
  std::size_t exponent = 3;
  std::size_t samples = 0;
  std::vector<RelativeBoundRow> rows;
  std::optional<double> epsilon_min;
  double c_at_eps = 0.0;
};

namespace detail {

struct NormTriple {
  double hi, h0, k;  // |HI phi|, |H0 phi|, |K phi| + |phi|
};

inline std::vector<NormTriple> relative_samples(const CompiledModel& c, std::size_t exponent, std::size_t count,
                                                std::uint64_t seed) {
  const std::size_t n_max = c.HI.space()->n_max();
  const std::size_t bw = c.HI.bandwidth();
  const std::size_t top = n_max >= bw ? n_max - bw : 0;
  std::vector<NormTriple> out(count);
  parallel_for(count, [&](std::size_t s) {
    const std::size_t n = s % (top + 1);
    SplitMix64 rng(derive_seed(seed, n, s));
    CVector phi = random_complex_vector(rng, c.HI.block_size(n));
    const double pn = norm2(phi);
    for (auto& z : phi) z /= pn;
    ColumnRestriction a(c.HI, n);
    double h0 = 0.0;
    if (const Block* b = c.H0.block(n, n)) {
      CVector t(phi.size());
      b->apply_add(phi, t);
      h0 = norm2(t);
    }
    out[s] = {std::sqrt(a.image_norm2(phi)), h0, std::pow(static_cast<double>(n), static_cast<double>(exponent)) + 1.0};
  });
  return out;
}

inline double relative_constant(const std::vector<NormTriple>& t, std::size_t count, double eps) {
  double c = 0.0;
  for (std::size_t i = 0; i < count; ++i) c = std::max(c, std::max(0.0, t[i].hi - eps * t[i].h0) / t[i].k);
  return c;
}

inline bool stable_pair(double a, double b) {
  if (a == 0.0 && b == 0.0) return true;
  return std::abs(b - a) < 0.05 * std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

/// For each eps on the grid, C(eps) = max over samples of (|HI phi| - eps |H0 phi|)_+ / (|K phi| + |phi|)
/// with K = N^exponent, computed on `samples` and on 2 * `samples` sector-concentrated vectors.
/// eps_min is the least eps whose C changes by less than 5% under the doubling.
inline RelativeBoundResult relative_bound_fit(const CompiledModel& c, std::size_t exponent = 3,
                                              std::size_t samples = 1000, std::uint64_t seed = 42) {
  RelativeBoundResult r;
  r.exponent = exponent;
  r.samples = samples;
  if (c.HI.max_abs() == 0.0) {
    r.epsilon_min = 0.0;
    for (double e : epsilon_grid()) r.rows.push_back({e, 0.0, 0.0, true});
    return r;
  }
  const auto t = detail::relative_samples(c, exponent, 2 * samples, seed);
  for (double e : epsilon_grid()) {
    RelativeBoundRow row{e, detail::relative_constant(t, samples, e), detail::relative_constant(t, 2 * samples, e), false};
    row.stable = detail::stable_pair(row.c_half, row.c_full);
    if (row.stable && !r.epsilon_min) {
      r.epsilon_min = e;
      r.c_at_eps = row.c_full;
    }
    r.rows.push_back(row);
  }
  return r;
}

struct CutoffScanRow {
  std::size_t n_max = 0;
  double c = 0.0;
};

struct CutoffScan {
  double epsilon = 0.5;
  std::size_t exponent = 3;
  std::vector<CutoffScanRow> rows;
  bool stable = false;  // last two cutoffs agree within 5%
};

/// C(eps) at fixed eps across cutoffs.
inline CutoffScan relative_bound_scan(const ModelSpec& m, const std::vector<std::size_t>& cutoffs, double eps,
                                      std::size_t exponent = 3, std::size_t samples = 1000, std::uint64_t seed = 42) {
  CutoffScan s;
  s.epsilon = eps;
  s.exponent = exponent;
  for (std::size_t nm : cutoffs) {
    const CompiledModel c = compile(m, make_space(m.d, nm));
    double v = 0.0;
    if (c.HI.max_abs() > 0.0) {
      const auto t = detail::relative_samples(c, exponent, 2 * samples, seed);
      v = detail::relative_constant(t, 2 * samples, eps);
    }
    s.rows.push_back({nm, v});
  }
  s.stable = s.rows.size() >= 2 && detail::stable_pair(s.rows[s.rows.size() - 2].c, s.rows.back().c);
  return s;
}

// ---------------------------------------------------------------------------------------------
// spectra under growing cutoffs

struct SpectrumRow {
  std::size_t n_max = 0;
  std::vector<double> levels;
  std::vector<double> drift;  // level differences to the previous cutoff (empty for the first)
};

inline constexpr std::size_t kSpectrumDenseLimit = 4000;

/// Lowest k eigenvalues of H0 + HI at each cutoff. A diagnostic of truncation instability,
/// not a statement about self-adjointness.
inline std::vector<SpectrumRow> spectrum_drift(const ModelSpec& m, const std::vector<std::size_t>& cutoffs,
                                               std::size_t k) {
  for (std::size_t i = 1; i < cutoffs.size(); ++i)
    if (cutoffs[i] <= cutoffs[i - 1]) throw ValidationError("cutoffs must increase", "cutoffs");
  std::vector<SpectrumRow> rows;
  for (std::size_t nm : cutoffs) {
    const SpacePtr space = make_space(m.d, nm);
    const std::size_t dim = m.L * space->dimension();
    if (dim > kSpectrumDenseLimit)
      throw SizingError("spectrum: dimension " + std::to_string(dim) + " exceeds the dense limit " +
                        std::to_string(kSpectrumDenseLimit));
    if (k > dim) throw ValidationError("more levels requested than the dimension " + std::to_string(dim), "levels");
    const CompiledModel c = compile(m, space);
    CMatrix h = add(c.H0, c.HI).to_dense();
    h = Complex(0.5) * (h + h.adjoint());
    const auto ev = eigvalsh(h);
    SpectrumRow row;
    row.n_max = nm;
    row.levels.assign(ev.begin(), ev.begin() + static_cast<std::ptrdiff_t>(k));
    if (!rows.empty())
      for (std::size_t i = 0; i < k; ++i) row.drift.push_back(row.levels[i] - rows.back().levels[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------------------------
// reports

enum class Verdict { Compliant, NonCompliant, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Compliant: return "compliant";
    case Verdict::NonCompliant: return "non-compliant";
    default: return "inconclusive";
  }
}

struct ComplianceReport {
  std::string model;
  std::string model_hash;
  std::size_t n_max = 0;
  NRange n_range;
  Variant variant = Variant::Quadratic;
  double threshold = 0.1;
  std::vector<GammaRow> gamma;
  std::optional<FitResult> fit;
  double sup_gamma = 0.0;
  BandResult band;
  SplitResult split;
  std::vector<InequalityResult> inequalities;
  Verdict verdict = Verdict::Inconclusive;
};

/// band_check + compliance_gamma + split_compliance, with the verdict rule: compliant iff the
/// band holds and the fitted slope is at most `threshold` (all-zero gamma counts as bounded);
/// inconclusive when fewer than three gamma values are positive.
inline ComplianceReport verify_model(const ModelSpec& m, const CompiledModel& c, NRange r, Variant v,
                                     double threshold = 0.1) {
  ComplianceReport rep;
  rep.model = m.name;
  rep.n_max = c.HI.space()->n_max();
  rep.n_range = r;
  rep.variant = v;
  rep.threshold = threshold;
  rep.band = band_check(c.HI, expected_bandwidth(v));
  rep.gamma = compliance_gamma(m, c, r, v);
  rep.split = split_compliance(m, c, r, threshold);
  std::vector<std::size_t> ns;
  std::vector<double> gs;
  for (const auto& g : rep.gamma) {
    ns.push_back(g.n);
    gs.push_back(g.gamma);
    rep.sup_gamma = std::max(rep.sup_gamma, g.gamma);
  }
  rep.fit = sector_fit(ns, gs);
  const bool all_zero = std::all_of(gs.begin(), gs.end(), [](double x) { return x == 0.0; });
  if (!rep.band.ok) rep.verdict = Verdict::NonCompliant;
  else if (all_zero) rep.verdict = Verdict::Compliant;
  else if (!rep.fit) rep.verdict = Verdict::Inconclusive;
  else rep.verdict = rep.fit->slope <= threshold ? Verdict::Compliant : Verdict::NonCompliant;
  return rep;
}

inline nlohmann::json fit_to_json(const std::optional<FitResult>& f) {
  if (!f) return nullptr;
  return {{"slope", f->slope}, {"intercept", f->intercept}, {"residual", f->residual}};
}

inline nlohmann::json report_header(const std::string& model_hash) {
  return {{"tool", "fockbench"},
          {"version", FOCKBENCH_VERSION},
          {"basis_ordering", kBasisOrderingTag},
          {"model_hash", model_hash},
          {"truncation", kTruncationConvention}};
}

inline nlohmann::json inequality_to_json(const InequalityResult& r) {
  return {{"bound", r.bound}, {"n", r.n}, {"samples", r.samples}, {"max_ratio", r.max_ratio}, {"violations", r.violations}};
}

inline nlohmann::json report_to_json(const ComplianceReport& r) {
  nlohmann::json j;
  j["header"] = report_header(r.model_hash);
  j["model"] = r.model;
  j["n_max"] = r.n_max;
  j["n_range"] = {r.n_range.from, r.n_range.to};
  j["variant"] = to_string(r.variant);
  j["slope_threshold"] = r.threshold;
  nlohmann::json g = nlohmann::json::array();
  for (const auto& row : r.gamma) g.push_back({{"n", row.n}, {"gamma", row.gamma}});
  j["gamma"] = std::move(g);
  j["fit"] = fit_to_json(r.fit);
  j["sup_gamma"] = r.sup_gamma;
  j["band"] = {{"expected", r.band.expected},
               {"ok", r.band.ok},
               {"max_offband", r.band.max_offband},
               {"structural_bandwidth", r.band.structural}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.split.rows) rows.push_back({{"n", row.n}, {"gamma2", row.gamma2}, {"C_n", row.c_n}});
  j["split"] = {{"structure_ok", r.split.structure_ok},
                {"rows", std::move(rows)},
                {"gamma2_fit", fit_to_json(r.split.gamma2_fit)},
                {"C_n_fit", fit_to_json(r.split.c_fit)},
                {"compliant", r.split.compliant}};
  nlohmann::json ineq = nlohmann::json::array();
  for (const auto& x : r.inequalities) ineq.push_back(inequality_to_json(x));
  j["inequalities"] = std::move(ineq);
  j["verdict"] = to_string(r.verdict);
  return j;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One row per sector: n, gamma, gamma2, C_n. Header lines start with '#'.
inline std::string report_to_csv(const ComplianceReport& r) {
  std::ostringstream out;
  out << "# fockbench " << FOCKBENCH_VERSION << "\n";
  out << "# basis_ordering " << kBasisOrderingTag << "\n";
  out << "# model_hash " << r.model_hash << "\n";
  out << "# model " << r.model << ", n_max " << r.n_max << ", variant " << to_string(r.variant) << ", verdict "
      << to_string(r.verdict) << "\n";
  out << "n,gamma,gamma2,C_n\n";
  for (std::size_t i = 0; i < r.gamma.size(); ++i) {
    out << r.gamma[i].n << "," << format_number(r.gamma[i].gamma);
    if (i < r.split.rows.size())
      out << "," << format_number(r.split.rows[i].gamma2) << "," << format_number(r.split.rows[i].c_n);
    else out << ",,";
    out << "\n";
  }
  return out.str();
}

}  // namespace fockbench
