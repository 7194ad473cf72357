#pragma once

// Sector-indexed block matrices on H_1 (x) truncated Fock space.
//
// Flattened layout: sectors in increasing n; inside sector n the index is
// x * dim(n) + s, with x the particle index (0..L-1) and s the occupation-basis offset.
// Products are compressions: whatever a factor routes above n_max is dropped.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fockbench/errors.hpp"
#include "fockbench/fock_space.hpp"
#include "fockbench/linalg.hpp"

namespace fockbench {

inline constexpr std::size_t kDenseBlockLimit = 512;

class Block {
public:
  Block() = default;
  explicit Block(CMatrix d) : rep_(std::move(d)) {}
  explicit Block(SparseMatrix s) : rep_(std::move(s)) {}

  static Block zeros(std::size_t rows, std::size_t cols) { return from_triplets(rows, cols, {}); }

  /// Storage is dense when both sides are at most kDenseBlockLimit, sparse otherwise.
  static Block from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
    if (rows <= kDenseBlockLimit && cols <= kDenseBlockLimit) {
      CMatrix d(rows, cols);
      for (const auto& e : t) d(e.row, e.col) += e.value;
      return Block(std::move(d));
    }
    return Block(SparseMatrix::from_triplets(rows, cols, std::move(t)));
  }

  static Block from_dense(CMatrix d) {
    if (d.rows() <= kDenseBlockLimit && d.cols() <= kDenseBlockLimit) return Block(std::move(d));
    return Block(SparseMatrix::from_dense(d));
  }

  static Block from_sparse(SparseMatrix s) {
    if (s.rows() <= kDenseBlockLimit && s.cols() <= kDenseBlockLimit) return Block(s.to_dense());
    return Block(std::move(s));
  }

  bool is_dense() const noexcept { return std::holds_alternative<CMatrix>(rep_); }
  const CMatrix& dense() const { return std::get<CMatrix>(rep_); }
  const SparseMatrix& sparse() const { return std::get<SparseMatrix>(rep_); }

  std::size_t rows() const {
    return std::visit([](const auto& m) { return m.rows(); }, rep_);
  }
  std::size_t cols() const {
    return std::visit([](const auto& m) { return m.cols(); }, rep_);
  }

  double max_abs() const {
    return std::visit([](const auto& m) { return m.max_abs(); }, rep_);
  }

  template <typename F>
  void for_each_nonzero(F&& f) const {
    if (is_dense()) {
      const auto& d = dense();
      for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t j = 0; j < d.cols(); ++j)
          if (d(i, j) != Complex{}) f(i, j, d(i, j));
    } else {
      sparse().for_each(f);
    }
  }

  void apply_add(std::span<const Complex> x, std::span<Complex> y, Complex alpha = 1.0) const {
    std::visit([&](const auto& m) { m.apply_add(x, y, alpha); }, rep_);
  }
  void apply_adjoint_add(std::span<const Complex> x, std::span<Complex> y, Complex alpha = 1.0) const {
    std::visit([&](const auto& m) { m.apply_adjoint_add(x, y, alpha); }, rep_);
  }

  CMatrix to_dense() const { return is_dense() ? dense() : sparse().to_dense(); }
  SparseMatrix to_sparse() const { return is_dense() ? SparseMatrix::from_dense(dense()) : sparse(); }

  Block adjoint() const {
    return std::visit([](const auto& m) { return Block(m.adjoint()); }, rep_);
  }

  Block scaled(Complex c) const {
    if (is_dense()) return Block(c * dense());
    return Block(sparse().scaled(c));
  }

  friend Block operator+(const Block& a, const Block& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw SpaceMismatch("block sum: shapes differ");
    if (a.is_dense() && b.is_dense()) return Block(a.dense() + b.dense());
    return from_sparse(a.to_sparse() + b.to_sparse());
  }

  friend Block operator*(const Block& a, const Block& b) {
    if (a.cols() != b.rows()) throw SpaceMismatch("block product: inner dimensions differ");
    if (a.is_dense() && b.is_dense()) return from_dense(a.dense() * b.dense());
    return from_sparse(a.to_sparse() * b.to_sparse());
  }

  /// p (x) this.
  Block kron_left(const CMatrix& p) const {
    const std::size_t r = rows(), c = cols();
    std::vector<Triplet> t;
    for_each_nonzero([&](std::size_t i, std::size_t j, Complex v) {
      for (std::size_t x = 0; x < p.rows(); ++x)
        for (std::size_t y = 0; y < p.cols(); ++y) {
          const Complex pv = p(x, y);
          if (pv == Complex{}) continue;
          t.push_back({static_cast<std::uint32_t>(x * r + i), static_cast<std::uint32_t>(y * c + j), pv * v});
        }
    });
    return from_triplets(p.rows() * r, p.cols() * c, std::move(t));
  }

private:
  std::variant<CMatrix, SparseMatrix> rep_;
};

class BlockBandedOperator {
public:
  using Key = std::pair<std::size_t, std::size_t>;

  BlockBandedOperator() = default;
  BlockBandedOperator(SpacePtr space, std::size_t particle_dim, std::size_t bandwidth, bool hermitian = false)
      : space_(std::move(space)), particle_dim_(particle_dim), bandwidth_(bandwidth), hermitian_(hermitian) {
    if (!space_) throw SpaceMismatch("BlockBandedOperator: null space");
    if (particle_dim_ == 0) throw SizingError("BlockBandedOperator: particle dimension must be positive");
  }

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t particle_dim() const noexcept { return particle_dim_; }
  std::size_t bandwidth() const noexcept { return bandwidth_; }
  bool hermitian() const noexcept { return hermitian_; }
  void set_hermitian(bool h) noexcept { hermitian_ = h; }
  const std::map<Key, Block>& blocks() const noexcept { return blocks_; }

  std::size_t sector_count() const { return space_->sector_count(); }
  std::size_t block_size(std::size_t n) const { return particle_dim_ * space_->sector_dim(n); }
  std::size_t block_offset(std::size_t n) const { return particle_dim_ * space_->sector_offset(n); }
  std::size_t dimension() const { return particle_dim_ * space_->dimension(); }

  const Block* block(std::size_t m, std::size_t n) const {
    auto it = blocks_.find({m, n});
    return it == blocks_.end() ? nullptr : &it->second;
  }

  void set_block(std::size_t m, std::size_t n, Block b) {
    check_key(m, n);
    if (b.rows() != block_size(m) || b.cols() != block_size(n))
      throw SpaceMismatch("set_block: block (" + std::to_string(m) + "," + std::to_string(n) + ") has shape " +
                          std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ", expected " +
                          std::to_string(block_size(m)) + "x" + std::to_string(block_size(n)));
    blocks_[{m, n}] = std::move(b);
  }

  void add_block(std::size_t m, std::size_t n, const Block& b) {
    auto it = blocks_.find({m, n});
    if (it == blocks_.end())
      set_block(m, n, b);
    else
      it->second = it->second + b;
  }

  /// Largest |m - n| over stored blocks that contain a nonzero entry.
  std::size_t structural_bandwidth() const {
    std::size_t b = 0;
    for (const auto& [k, blk] : blocks_)
      if (blk.max_abs() > 0.0) b = std::max(b, k.first > k.second ? k.first - k.second : k.second - k.first);
    return b;
  }

  /// y += alpha * A x over the flattened space.
  void apply_add(std::span<const Complex> x, std::span<Complex> y, Complex alpha = 1.0) const {
    for (const auto& [k, blk] : blocks_)
      blk.apply_add(x.subspan(block_offset(k.second), blk.cols()), y.subspan(block_offset(k.first), blk.rows()), alpha);
  }

  CVector apply(std::span<const Complex> x) const {
    if (x.size() != dimension()) throw SpaceMismatch("apply: vector length does not match operator dimension");
    CVector y(dimension());
    apply_add(x, y);
    return y;
  }

  CMatrix to_dense() const {
    CMatrix d(dimension(), dimension());
    for (const auto& [k, blk] : blocks_) {
      const std::size_t r0 = block_offset(k.first), c0 = block_offset(k.second);
      blk.for_each_nonzero([&](std::size_t i, std::size_t j, Complex v) { d(r0 + i, c0 + j) += v; });
    }
    return d;
  }

  /// Max |A_{mn} - A_{nm}^dagger| over all block pairs.
  double hermiticity_defect() const {
    double worst = 0.0;
    for (const auto& [k, blk] : blocks_) {
      const Block* t = block(k.second, k.first);
      if (!t) {
        worst = std::max(worst, blk.max_abs());
        continue;
      }
      const CMatrix a = blk.to_dense();
      const CMatrix b = t->to_dense();
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - std::conj(b(j, i))));
    }
    return worst;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& [k, blk] : blocks_) m = std::max(m, blk.max_abs());
    return m;
  }

  bool same_layout(const BlockBandedOperator& o) const {
    return space_ && o.space_ && *space_ == *o.space_ && particle_dim_ == o.particle_dim_;
  }

private:
  void check_key(std::size_t m, std::size_t n) const {
    if (m >= sector_count() || n >= sector_count())
      throw SpaceMismatch("block index (" + std::to_string(m) + "," + std::to_string(n) + ") beyond cutoff");
    const std::size_t gap = m > n ? m - n : n - m;
    if (gap > bandwidth_)
      throw SpaceMismatch("block (" + std::to_string(m) + "," + std::to_string(n) + ") lies outside bandwidth " +
                          std::to_string(bandwidth_));
  }

  SpacePtr space_;
  std::size_t particle_dim_ = 1;
  std::size_t bandwidth_ = 0;
  bool hermitian_ = false;
  std::map<Key, Block> blocks_;
};

inline void require_same_layout(const BlockBandedOperator& a, const BlockBandedOperator& b, const char* what) {
  if (!a.same_layout(b)) throw SpaceMismatch(std::string(what) + ": operators act on different spaces");
}

inline BlockBandedOperator add(const BlockBandedOperator& a, const BlockBandedOperator& b) {
  require_same_layout(a, b, "add");
  BlockBandedOperator r(a.space(), a.particle_dim(), std::max(a.bandwidth(), b.bandwidth()),
                        a.hermitian() && b.hermitian());
  for (const auto& [k, blk] : a.blocks()) r.add_block(k.first, k.second, blk);
  for (const auto& [k, blk] : b.blocks()) r.add_block(k.first, k.second, blk);
  return r;
}

inline BlockBandedOperator scale(Complex c, const BlockBandedOperator& a) {
  BlockBandedOperator r(a.space(), a.particle_dim(), a.bandwidth(), a.hermitian() && c.imag() == 0.0);
  for (const auto& [k, blk] : a.blocks()) r.set_block(k.first, k.second, blk.scaled(c));
  return r;
}

inline BlockBandedOperator subtract(const BlockBandedOperator& a, const BlockBandedOperator& b) {
  return add(a, scale(-1.0, b));
}

inline BlockBandedOperator adjoint(const BlockBandedOperator& a) {
  BlockBandedOperator r(a.space(), a.particle_dim(), a.bandwidth(), a.hermitian());
  for (const auto& [k, blk] : a.blocks()) r.set_block(k.second, k.first, blk.adjoint());
  return r;
}

/// Compressed product: intermediate sectors are limited to 0..n_max.
inline BlockBandedOperator matmul(const BlockBandedOperator& a, const BlockBandedOperator& b) {
  require_same_layout(a, b, "matmul");
  BlockBandedOperator r(a.space(), a.particle_dim(), a.bandwidth() + b.bandwidth(), false);
  for (const auto& [ka, ba] : a.blocks())
    for (const auto& [kb, bb] : b.blocks()) {
      if (ka.second != kb.first) continue;
      r.add_block(ka.first, kb.second, ba * bb);
    }
  return r;
}

inline BlockBandedOperator commutator(const BlockBandedOperator& a, const BlockBandedOperator& b) {
  return subtract(matmul(a, b), matmul(b, a));
}

/// Sector-diagonal part (bandwidth 0).
inline BlockBandedOperator diagonal_part(const BlockBandedOperator& a) {
  BlockBandedOperator r(a.space(), a.particle_dim(), 0, a.hermitian());
  for (const auto& [k, blk] : a.blocks())
    if (k.first == k.second) r.set_block(k.first, k.second, blk);
  return r;
}

/// Everything off the sector diagonal.
inline BlockBandedOperator off_diagonal_part(const BlockBandedOperator& a) {
  BlockBandedOperator r(a.space(), a.particle_dim(), a.bandwidth(), a.hermitian());
  for (const auto& [k, blk] : a.blocks())
    if (k.first != k.second) r.set_block(k.first, k.second, blk);
  return r;
}

inline BlockBandedOperator zero_operator(SpacePtr space, std::size_t particle_dim = 1) {
  return BlockBandedOperator(std::move(space), particle_dim, 0, true);
}

inline BlockBandedOperator identity_operator(SpacePtr space, std::size_t particle_dim = 1) {
  BlockBandedOperator r(space, particle_dim, 0, true);
  for (std::size_t n = 0; n < r.sector_count(); ++n) {
    const std::size_t m = r.block_size(n);
    std::vector<Triplet> t;
    t.reserve(m);
    for (std::size_t i = 0; i < m; ++i) t.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), 1.0});
    r.set_block(n, n, Block::from_triplets(m, m, std::move(t)));
  }
  return r;
}

}  // namespace fockbench
