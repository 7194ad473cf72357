#pragma once

// Occupation-number basis of the truncated symmetric Fock space over C^d:
//   sectors n = 0..n_max, each spanned by occupation vectors with entries summing to n.
// Within a sector the basis is ordered reverse-lexicographically, e.g. d=2, n=2:
//   (2,0), (1,1), (0,2).
// Sectors are concatenated in increasing n to give the flattened index.
// This ordering is part of the file-format contract (see kBasisOrderingTag).

#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fockbench/errors.hpp"

namespace fockbench {

inline constexpr const char* kBasisOrderingTag = "revlex-sector-major-v1";

using Occupation = std::uint16_t;

struct OccupationVector {
  std::vector<Occupation> counts;

  std::size_t modes() const noexcept { return counts.size(); }
  std::size_t total() const noexcept { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

  friend bool operator==(const OccupationVector&, const OccupationVector&) = default;
};

/// binom(n + d - 1, n): dimension of the n-particle symmetric sector over C^d.
inline std::size_t sector_dimension(std::size_t d, std::size_t n) {
  if (d == 0) throw SizingError("sector_dimension: d must be positive");
  unsigned __int128 r = 1;
  for (std::size_t k = 1; k < d; ++k) {
    r = r * (n + k) / k;
    if (r > std::numeric_limits<std::uint64_t>::max() / 2)
      throw SizingError("sector_dimension: binom(" + std::to_string(n + d - 1) + ", " + std::to_string(n) +
                        ") overflows");
  }
  return static_cast<std::size_t>(r);
}

/// All occupation vectors of length d summing to n, reverse-lexicographic.
inline std::vector<OccupationVector> enumerate_sector(std::size_t d, std::size_t n) {
  const std::size_t dim = sector_dimension(d, n);
  if (n > std::numeric_limits<Occupation>::max()) throw SizingError("enumerate_sector: n exceeds occupation range");
  std::vector<OccupationVector> out;
  out.reserve(dim);
  OccupationVector cur{std::vector<Occupation>(d, 0)};
  cur.counts[0] = static_cast<Occupation>(n);
  while (true) {
    out.push_back(cur);
    // Next in descending lex order: find rightmost position j < d-1 with a nonzero entry,
    // move one unit to j+1 and gather everything after j into j+1.
    std::size_t j = d - 1;
    while (j > 0 && cur.counts[j - 1] == 0) --j;
    if (j == 0) break;
    --j;
    if (cur.counts[j] == 0) break;
    std::size_t tail = 0;
    for (std::size_t k = j + 1; k < d; ++k) {
      tail += cur.counts[k];
      cur.counts[k] = 0;
    }
    --cur.counts[j];
    cur.counts[j + 1] = static_cast<Occupation>(tail + 1);
    if (d == 1) break;
  }
  return out;
}

/// Position of a basis state: its sector and the offset inside that sector.
struct StateIndex {
  std::size_t sector = 0;
  std::size_t offset = 0;
  friend bool operator==(const StateIndex&, const StateIndex&) = default;
};

class TruncatedFockSpace {
public:
  TruncatedFockSpace(std::size_t d, std::size_t n_max) : d_(d), n_max_(n_max) {
    if (d == 0) throw SizingError("TruncatedFockSpace: d must be positive");
    // compositions(m, k) = number of occupation vectors with k modes summing to m
    comp_.assign((n_max + 1) * (d + 1), 0);
    for (std::size_t m = 0; m <= n_max; ++m)
      for (std::size_t k = 1; k <= d; ++k) comp_[m * (d + 1) + k] = sector_dimension(k, m);

    offsets_.resize(n_max + 2, 0);
    for (std::size_t n = 0; n <= n_max; ++n) {
      const std::size_t dim = comp_[n * (d + 1) + d];
      if (offsets_[n] > std::numeric_limits<std::uint32_t>::max() - dim)
        throw SizingError("TruncatedFockSpace: total dimension exceeds 2^32");
      offsets_[n + 1] = offsets_[n] + dim;
    }
    sectors_.reserve(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
      auto states = enumerate_sector(d, n);
      std::vector<Occupation> flat;
      flat.reserve(states.size() * d);
      for (const auto& s : states) flat.insert(flat.end(), s.counts.begin(), s.counts.end());
      sectors_.push_back(std::move(flat));
    }
  }

  std::size_t modes() const noexcept { return d_; }
  std::size_t n_max() const noexcept { return n_max_; }
  std::size_t sector_count() const noexcept { return n_max_ + 1; }
  std::size_t dimension() const noexcept { return offsets_.back(); }
  std::size_t sector_dim(std::size_t n) const { return offsets_.at(n + 1) - offsets_.at(n); }
  std::size_t sector_offset(std::size_t n) const { return offsets_.at(n); }
  const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }

  /// Occupations of basis state `offset` of sector n, as a view into the stored basis.
  std::span<const Occupation> occupation_view(std::size_t n, std::size_t offset) const {
    return {sectors_.at(n).data() + offset * d_, d_};
  }

  OccupationVector occupation_at(std::size_t n, std::size_t offset) const {
    if (n > n_max_ || offset >= sector_dim(n)) throw ValidationError("occupation_at: index out of range");
    auto v = occupation_view(n, offset);
    return {std::vector<Occupation>(v.begin(), v.end())};
  }

  /// Offset of an occupation vector inside its sector (combinatorial rank, O(d)).
  std::size_t rank(std::span<const Occupation> occ) const {
    std::size_t remaining = 0;
    for (auto c : occ) remaining += c;
    std::size_t r = 0;
    for (std::size_t i = 0; i + 1 < d_; ++i) {
      const std::size_t c = occ[i];
      if (remaining > c) r += comp_[(remaining - c - 1) * (d_ + 1) + (d_ - i)];
      remaining -= c;
    }
    return r;
  }

  StateIndex state_index(const OccupationVector& occ) const {
    if (occ.modes() != d_)
      throw ValidationError("state_index: occupation has " + std::to_string(occ.modes()) + " modes, space has " +
                            std::to_string(d_));
    const std::size_t n = occ.total();
    if (n > n_max_)
      throw ValidationError("state_index: occupation with " + std::to_string(n) + " particles exceeds cutoff " +
                            std::to_string(n_max_));
    return {n, rank(occ.counts)};
  }

  std::size_t flat_index(const OccupationVector& occ) const {
    const auto s = state_index(occ);
    return offsets_[s.sector] + s.offset;
  }

  friend bool operator==(const TruncatedFockSpace& a, const TruncatedFockSpace& b) noexcept {
    return a.d_ == b.d_ && a.n_max_ == b.n_max_;
  }

private:
  std::size_t d_;
  std::size_t n_max_;
  std::vector<std::size_t> comp_;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<Occupation>> sectors_;
};

using SpacePtr = std::shared_ptr<const TruncatedFockSpace>;

inline SpacePtr make_space(std::size_t d, std::size_t n_max) {
  return std::make_shared<const TruncatedFockSpace>(d, n_max);
}

}  // namespace fockbench
