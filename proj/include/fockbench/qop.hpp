#pragma once

// Elementary second-quantized operators in the occupation basis.
//
// Conventions: a(f) = sum_i conj(f_i) a_i is antilinear in f, a*(f) = sum_i f_i a*_i,
// [a(f), a*(g)] = <f, g> with the inner product conjugate-linear in its first slot.
// Matrix elements come straight from sqrt(occupation) factors; creation out of the
// top sector is dropped (compression to sectors <= n_max).

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fockbench/block_operator.hpp"
#include "fockbench/errors.hpp"
#include "fockbench/fock_space.hpp"
#include "fockbench/linalg.hpp"
#include "fockbench/parallel.hpp"
#include "fockbench/random.hpp"

namespace fockbench {

/// Normal-ordered Fock monomials that the models are built from.
enum class FockKind {
  Identity,          // 1
  Number,            // N
  Create,            // sum_i f_i a*_i
  Annihilate,        // sum_i conj(f_i) a_i
  Quad,              // sum_ij M_ij a*_i a_j
  PairCreate,        // sum_ij M_ij a*_i a*_j
  PairAnnihilate,    // sum_ij conj(M_ij) a_i a_j
  Quartic,           // sum_ij W_ij a*_i a*_j a_i a_j
  Cubic3Create,      // c a*^3   (single mode)
  Cubic3Annihilate,  // conj(c) a^3
};

inline int sector_shift(FockKind k) {
  switch (k) {
    case FockKind::Create: return 1;
    case FockKind::Annihilate: return -1;
    case FockKind::PairCreate: return 2;
    case FockKind::PairAnnihilate: return -2;
    case FockKind::Cubic3Create: return 3;
    case FockKind::Cubic3Annihilate: return -3;
    default: return 0;
  }
}

inline FockKind adjoint_kind(FockKind k) {
  switch (k) {
    case FockKind::Create: return FockKind::Annihilate;
    case FockKind::Annihilate: return FockKind::Create;
    case FockKind::PairCreate: return FockKind::PairAnnihilate;
    case FockKind::PairAnnihilate: return FockKind::PairCreate;
    case FockKind::Cubic3Create: return FockKind::Cubic3Annihilate;
    case FockKind::Cubic3Annihilate: return FockKind::Cubic3Create;
    default: return k;
  }
}

/// One Fock monomial with its coefficient data. Only the field matching `kind` is read:
/// `vec` for Create/Annihilate, `mat` for Quad/Pair*/Quartic, `scalar` for Cubic3*.
struct FockTerm {
  FockKind kind = FockKind::Identity;
  CVector vec;
  CMatrix mat;
  Complex scalar = 1.0;
};

namespace detail {

inline std::uint32_t u32(std::size_t v) { return static_cast<std::uint32_t>(v); }

/// Triplets of the block (n + shift, n) of a Fock monomial. Returns false when the
/// target sector falls outside 0..n_max.
inline bool fock_block(const TruncatedFockSpace& sp, const FockTerm& t, std::size_t n, std::size_t& target,
                       std::vector<Triplet>& out) {
  const long tgt = static_cast<long>(n) + sector_shift(t.kind);
  if (tgt < 0 || tgt > static_cast<long>(sp.n_max())) return false;
  target = static_cast<std::size_t>(tgt);
  const std::size_t d = sp.modes();
  const std::size_t dim = sp.sector_dim(n);
  std::vector<Occupation> occ(d);

  for (std::size_t s = 0; s < dim; ++s) {
    auto view = sp.occupation_view(n, s);
    std::copy(view.begin(), view.end(), occ.begin());
    switch (t.kind) {
      case FockKind::Identity: out.push_back({u32(s), u32(s), 1.0}); break;
      case FockKind::Number: {
        if (n != 0) out.push_back({u32(s), u32(s), static_cast<double>(n)});
        break;
      }
      case FockKind::Create: {
        for (std::size_t i = 0; i < d; ++i) {
          if (t.vec[i] == Complex{}) continue;
          const double amp = std::sqrt(occ[i] + 1.0);
          ++occ[i];
          out.push_back({u32(sp.rank(occ)), u32(s), t.vec[i] * amp});
          --occ[i];
        }
        break;
      }
      case FockKind::Annihilate: {
        for (std::size_t i = 0; i < d; ++i) {
          if (occ[i] == 0 || t.vec[i] == Complex{}) continue;
          const double amp = std::sqrt(static_cast<double>(occ[i]));
          --occ[i];
          out.push_back({u32(sp.rank(occ)), u32(s), std::conj(t.vec[i]) * amp});
          ++occ[i];
        }
        break;
      }
      case FockKind::Quad: {
        for (std::size_t j = 0; j < d; ++j) {
          if (occ[j] == 0) continue;
          const double aj = std::sqrt(static_cast<double>(occ[j]));
          --occ[j];
          for (std::size_t i = 0; i < d; ++i) {
            const Complex m = t.mat(i, j);
            if (m == Complex{}) continue;
            // a*_j a_j is exactly occ_j; sqrt(k)*sqrt(k) is not always k in floating point
            const double amp = i == j ? occ[j] + 1.0 : std::sqrt(occ[i] + 1.0) * aj;
            ++occ[i];
            out.push_back({u32(sp.rank(occ)), u32(s), m * amp});
            --occ[i];
          }
          ++occ[j];
        }
        break;
      }
      case FockKind::PairCreate: {
        for (std::size_t j = 0; j < d; ++j) {
          const double aj = std::sqrt(occ[j] + 1.0);
          ++occ[j];
          for (std::size_t i = 0; i < d; ++i) {
            const Complex m = t.mat(i, j);
            if (m == Complex{}) continue;
            const double ai = std::sqrt(occ[i] + 1.0);
            ++occ[i];
            out.push_back({u32(sp.rank(occ)), u32(s), m * ai * aj});
            --occ[i];
          }
          --occ[j];
        }
        break;
      }
      case FockKind::PairAnnihilate: {
        for (std::size_t j = 0; j < d; ++j) {
          if (occ[j] == 0) continue;
          const double aj = std::sqrt(static_cast<double>(occ[j]));
          --occ[j];
          for (std::size_t i = 0; i < d; ++i) {
            const Complex m = t.mat(i, j);
            if (occ[i] == 0 || m == Complex{}) continue;
            const double ai = std::sqrt(static_cast<double>(occ[i]));
            --occ[i];
            out.push_back({u32(sp.rank(occ)), u32(s), std::conj(m) * ai * aj});
            ++occ[i];
          }
          ++occ[j];
        }
        break;
      }
      case FockKind::Quartic: {
        Complex v{};
        for (std::size_t i = 0; i < d; ++i) {
          if (occ[i] == 0) continue;
          for (std::size_t j = 0; j < d; ++j) {
            const double nij = static_cast<double>(occ[i]) * (static_cast<double>(occ[j]) - (i == j ? 1.0 : 0.0));
            if (nij != 0.0) v += t.mat(i, j) * nij;
          }
        }
        if (v != Complex{}) out.push_back({u32(s), u32(s), v});
        break;
      }
      case FockKind::Cubic3Create: {
        const double k = static_cast<double>(n);
        out.push_back({0, u32(s), t.scalar * std::sqrt((k + 1) * (k + 2) * (k + 3))});
        break;
      }
      case FockKind::Cubic3Annihilate: {
        const double k = static_cast<double>(n);
        out.push_back({0, u32(s), std::conj(t.scalar) * std::sqrt(k * (k - 1) * (k - 2))});
        break;
      }
    }
  }
  return true;
}

inline void validate_term(const TruncatedFockSpace& sp, const FockTerm& t) {
  const std::size_t d = sp.modes();
  switch (t.kind) {
    case FockKind::Create:
    case FockKind::Annihilate:
      if (t.vec.size() != d)
        throw SpaceMismatch("coefficient vector has length " + std::to_string(t.vec.size()) + ", space has " +
                            std::to_string(d) + " modes");
      break;
    case FockKind::Quad:
    case FockKind::PairCreate:
    case FockKind::PairAnnihilate:
    case FockKind::Quartic:
      if (t.mat.rows() != d || t.mat.cols() != d)
        throw SpaceMismatch("coefficient matrix is " + std::to_string(t.mat.rows()) + "x" +
                            std::to_string(t.mat.cols()) + ", space has " + std::to_string(d) + " modes");
      break;
    case FockKind::Cubic3Create:
    case FockKind::Cubic3Annihilate:
      if (d != 1) throw ValidationError("cubic3 is defined for a single mode only");
      break;
    default: break;
  }
}

}  // namespace detail

/// Sector-n column blocks of a Fock monomial, tensored with `particle` when it is non-empty.
/// Only columns in `columns` are assembled (all sectors when empty).
inline BlockBandedOperator fock_operator(const SpacePtr& space, const FockTerm& term, const CMatrix& particle = {},
                                         const std::vector<std::size_t>& columns = {}) {
  detail::validate_term(*space, term);
  const std::size_t L = particle.empty() ? 1 : particle.rows();
  if (!particle.empty() && !particle.is_square()) throw SpaceMismatch("particle factor must be square");
  const int shift = sector_shift(term.kind);
  BlockBandedOperator op(space, L, static_cast<std::size_t>(std::abs(shift)), false);

  std::vector<std::size_t> cols = columns;
  if (cols.empty())
    for (std::size_t n = 0; n <= space->n_max(); ++n) cols.push_back(n);

  std::vector<std::optional<std::pair<std::size_t, Block>>> built(cols.size());
  parallel_for(cols.size(), [&](std::size_t idx) {
    const std::size_t n = cols[idx];
    std::vector<Triplet> t;
    std::size_t target = 0;
    if (!detail::fock_block(*space, term, n, target, t)) return;
    Block b = Block::from_triplets(space->sector_dim(target), space->sector_dim(n), std::move(t));
    if (!particle.empty()) b = b.kron_left(particle);
    built[idx].emplace(target, std::move(b));
  });
  for (std::size_t idx = 0; idx < cols.size(); ++idx)
    if (built[idx]) op.set_block(built[idx]->first, cols[idx], std::move(built[idx]->second));
  return op;
}

/// a(f): lowers the particle number by one.
inline BlockBandedOperator annihilation_matrix(const SpacePtr& space, std::span<const Complex> f) {
  return fock_operator(space, {FockKind::Annihilate, CVector(f.begin(), f.end()), {}, 1.0});
}

/// a*(f): the adjoint of a(f), compressed to sectors <= n_max.
inline BlockBandedOperator creation_matrix(const SpacePtr& space, std::span<const Complex> f) {
  return fock_operator(space, {FockKind::Create, CVector(f.begin(), f.end()), {}, 1.0});
}

/// dGamma(h) for Hermitian h.
inline BlockBandedOperator second_quantization(const SpacePtr& space, const CMatrix& h) {
  if (h.rows() != space->modes() || !h.is_square())
    throw SpaceMismatch("second_quantization: h must be " + std::to_string(space->modes()) + "x" +
                        std::to_string(space->modes()));
  const double defect = h.hermiticity_defect();
  if (defect > 1e-12) throw ValidationError("second_quantization: h is not Hermitian (defect " + std::to_string(defect) + ")", "h");
  auto op = fock_operator(space, {FockKind::Quad, {}, h, 1.0});
  op.set_hermitian(true);
  // the empty vacuum block keeps the block map aligned with the number operator
  if (!op.block(0, 0)) op.set_block(0, 0, Block::zeros(1, 1));
  return op;
}

/// N = dGamma(1).
inline BlockBandedOperator number_operator(const SpacePtr& space) {
  return second_quantization(space, CMatrix::identity(space->modes()));
}

/// Gamma(u): restriction of u^{(x)n} to each symmetric sector. u must be unitary.
inline BlockBandedOperator gamma_unitary(const SpacePtr& space, const CMatrix& u) {
  const std::size_t d = space->modes();
  if (u.rows() != d || u.cols() != d) throw SpaceMismatch("gamma_unitary: u has the wrong shape");
  const double defect = (u.adjoint() * u - CMatrix::identity(d)).max_abs();
  if (defect > 1e-12) throw ValidationError("gamma_unitary: u is not unitary (defect " + std::to_string(defect) + ")", "u");

  // Gamma(u)|occ> = prod_i a*(u e_i)^{occ_i} / sqrt(occ_i!) |0>
  std::vector<BlockBandedOperator> raise;
  raise.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    CVector col(d);
    for (std::size_t j = 0; j < d; ++j) col[j] = u(j, i);
    raise.push_back(creation_matrix(space, col));
  }

  BlockBandedOperator op(space, 1, 0, false);
  for (std::size_t n = 0; n <= space->n_max(); ++n) {
    const std::size_t dim = space->sector_dim(n);
    CMatrix blk(dim, dim);
    for (std::size_t s = 0; s < dim; ++s) {
      auto occ = space->occupation_view(n, s);
      CVector v{1.0};
      std::size_t level = 0;
      double norm = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        for (Occupation k = 0; k < occ[i]; ++k) {
          const Block* b = raise[i].block(level + 1, level);
          CVector w(space->sector_dim(level + 1));
          b->apply_add(v, w);
          v = std::move(w);
          ++level;
          norm *= std::sqrt(static_cast<double>(k + 1));
        }
      }
      for (std::size_t r = 0; r < dim; ++r) blk(r, s) = v[r] / norm;
    }
    op.set_block(n, n, Block::from_dense(std::move(blk)));
  }
  return op;
}

/// P (x) F, block by block.
inline BlockBandedOperator kron_particle(const CMatrix& p, const BlockBandedOperator& f) {
  if (!p.is_square() || p.empty()) throw SpaceMismatch("kron_particle: particle factor must be square and non-empty");
  BlockBandedOperator r(f.space(), p.rows() * f.particle_dim(), f.bandwidth(), f.hermitian() && p.is_hermitian(1e-12));
  for (const auto& [k, blk] : f.blocks()) r.set_block(k.first, k.second, blk.kron_left(p));
  return r;
}

/// Component of v supported on sector n. Zero-padded to full length when `padded`.
inline CVector project_sector(const TruncatedFockSpace& space, std::span<const Complex> v, std::size_t n,
                              std::size_t particle_dim = 1, bool padded = true) {
  if (n > space.n_max())
    throw ValidationError("project_sector: sector " + std::to_string(n) + " beyond cutoff " + std::to_string(space.n_max()));
  if (v.size() != particle_dim * space.dimension()) throw SpaceMismatch("project_sector: vector length mismatch");
  const std::size_t off = particle_dim * space.sector_offset(n);
  const std::size_t len = particle_dim * space.sector_dim(n);
  if (!padded) return CVector(v.begin() + off, v.begin() + off + len);
  CVector out(v.size());
  std::copy(v.begin() + off, v.begin() + off + len, out.begin() + off);
  return out;
}

/// Component of v supported on sectors 0..n.
inline CVector project_upto(const TruncatedFockSpace& space, std::span<const Complex> v, std::size_t n,
                            std::size_t particle_dim = 1) {
  if (n > space.n_max())
    throw ValidationError("project_upto: sector " + std::to_string(n) + " beyond cutoff " + std::to_string(space.n_max()));
  if (v.size() != particle_dim * space.dimension()) throw SpaceMismatch("project_upto: vector length mismatch");
  CVector out(v.size());
  const std::size_t end = particle_dim * space.sector_offset(n) + particle_dim * space.sector_dim(n);
  std::copy(v.begin(), v.begin() + end, out.begin());
  return out;
}

struct CcrResult {
  double max_deviation = 0.0;    // interior sectors only; this is the figure of merit
  double boundary_defect = 0.0;  // top sector of [a, a*], a truncation artifact, not counted
};

/// Random checks of [a(f1), a*(f2)] = <f1, f2> on sectors <= n_max - 1 and
/// [a(f1), a(f2)] = 0 on sectors <= n_max - 2.
inline CcrResult ccr_selftest(const SpacePtr& space, std::size_t trials, std::uint64_t seed) {
  if (space->n_max() < 2) throw ValidationError("ccr_selftest: needs n_max >= 2", "n_max");
  const std::size_t d = space->modes();
  const std::size_t top = space->n_max();
  CcrResult res;
  for (std::size_t t = 0; t < trials; ++t) {
    SplitMix64 rng(derive_seed(seed, t));
    CVector f1 = random_complex_vector(rng, d);
    CVector f2 = random_complex_vector(rng, d);
    const double n1 = norm2(f1), n2 = norm2(f2);
    for (auto& x : f1) x /= n1;
    for (auto& x : f2) x /= n2;
    const Complex ip = dot(f1, f2);

    const auto a1 = annihilation_matrix(space, f1);
    const auto c2 = creation_matrix(space, f2);
    const auto a2 = annihilation_matrix(space, f2);
    const auto k = commutator(a1, c2);
    for (std::size_t n = 0; n <= top; ++n) {
      const Block* b = k.block(n, n);
      const std::size_t dim = space->sector_dim(n);
      CMatrix dev = b ? b->to_dense() : CMatrix(dim, dim);
      for (std::size_t i = 0; i < dim; ++i) dev(i, i) -= ip;
      const double m = dev.max_abs();
      if (n < top)
        res.max_deviation = std::max(res.max_deviation, m);
      else
        res.boundary_defect = std::max(res.boundary_defect, m);
    }
    const auto kk = commutator(a1, a2);
    for (const auto& [key, blk] : kk.blocks())
      if (key.second + 2 <= top) res.max_deviation = std::max(res.max_deviation, blk.max_abs());
  }
  return res;
}

}  // namespace fockbench
