#pragma once

// Matrix Market coordinate export of assembled operators (complex general, or complex
// Hermitian storing the lower triangle) and a reader for the same subset.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fockbench/block_operator.hpp"
#include "fockbench/errors.hpp"

#ifndef FOCKBENCH_VERSION
#define FOCKBENCH_VERSION "0.0.0"
#endif

namespace fockbench {

struct MarketEntry {
  std::size_t row = 0;  // zero-based
  std::size_t col = 0;
  Complex value;
};

struct MarketMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool hermitian = false;
  std::vector<MarketEntry> entries;  // as stored; the Hermitian form holds row >= col only
};

/// Writes `text` to `path` through a temporary file in the same directory and a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

/// Entries in the flattened basis, sorted column-major like most Matrix Market writers.
inline std::vector<MarketEntry> market_entries(const BlockBandedOperator& op, bool lower_only) {
  std::vector<MarketEntry> out;
  for (const auto& [k, b] : op.blocks()) {
    const std::size_t r0 = op.block_offset(k.first), c0 = op.block_offset(k.second);
    b.for_each_nonzero([&](std::size_t i, std::size_t j, Complex v) {
      if (v == Complex{}) return;
      const std::size_t r = r0 + i, c = c0 + j;
      if (lower_only && r < c) return;
      out.push_back({r, c, v});
    });
  }
  std::sort(out.begin(), out.end(), [](const MarketEntry& a, const MarketEntry& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  return out;
}

inline std::string to_matrix_market(const BlockBandedOperator& op, const std::vector<std::string>& comments = {}) {
  const bool herm = op.hermitian();
  const auto entries = market_entries(op, herm);
  std::ostringstream out;
  out << "%%MatrixMarket matrix coordinate complex " << (herm ? "hermitian" : "general") << "\n";
  out << "% fockbench " << FOCKBENCH_VERSION << "\n";
  out << "% basis_ordering " << kBasisOrderingTag << "\n";
  for (const auto& c : comments) out << "% " << c << "\n";
  out << op.dimension() << " " << op.dimension() << " " << entries.size() << "\n";
  char buf[96];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%zu %zu %.17g %.17g\n", e.row + 1, e.col + 1, e.value.real(), e.value.imag());
    out << buf;
  }
  return out.str();
}

inline void write_matrix_market(const std::filesystem::path& path, const BlockBandedOperator& op,
                                const std::vector<std::string>& comments = {}) {
  write_file_atomic(path, to_matrix_market(op, comments));
}

inline MarketMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty input", "matrix market");
  std::istringstream head(line);
  std::string banner, object, format, field, symmetry;
  head >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate" || field != "complex")
    throw ValidationError("only complex coordinate matrices are supported", "matrix market");
  MarketMatrix m;
  if (symmetry == "hermitian") m.hermitian = true;
  else if (symmetry != "general") throw ValidationError("unsupported symmetry '" + symmetry + "'", "matrix market");
  while (std::getline(in, line) && !line.empty() && line[0] == '%') {
  }
  std::size_t nnz = 0;
  if (!(std::istringstream(line) >> m.rows >> m.cols >> nnz)) throw ValidationError("bad size line", "matrix market");
  m.entries.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    MarketEntry e;
    double re = 0.0, im = 0.0;
    if (!(in >> e.row >> e.col >> re >> im)) throw ValidationError("truncated entry list", "matrix market");
    if (e.row == 0 || e.col == 0 || e.row > m.rows || e.col > m.cols)
      throw ValidationError("entry index out of range", "matrix market");
    --e.row;
    --e.col;
    e.value = {re, im};
    m.entries.push_back(e);
  }
  return m;
}

inline MarketMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return parse_matrix_market(in);
}

/// Dense form, expanding the Hermitian storage.
inline CMatrix to_dense(const MarketMatrix& m) {
  CMatrix d(m.rows, m.cols);
  for (const auto& e : m.entries) {
    d(e.row, e.col) = e.value;
    if (m.hermitian && e.row != e.col) d(e.col, e.row) = std::conj(e.value);
  }
  return d;
}

}  // namespace fockbench
