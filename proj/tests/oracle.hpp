#pragma once

// Test-only reference implementations. They share no code path with the library's
// operator assembly: states are sparse maps keyed by occupation vectors and operators
// act by explicit ladder moves.

#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "fockbench/linalg.hpp"

namespace oracle {

using Complex = std::complex<double>;
using Occ = std::vector<int>;
using State = std::map<Occ, Complex>;

inline State basis(const Occ& o) { return State{{o, 1.0}}; }

inline State create(const State& s, int mode, Complex coeff = 1.0) {
  State r;
  for (const auto& [o, v] : s) {
    Occ p = o;
    p[mode] += 1;
    r[p] += coeff * std::sqrt(static_cast<double>(p[mode])) * v;
  }
  return r;
}

inline State annihilate(const State& s, int mode, Complex coeff = 1.0) {
  State r;
  for (const auto& [o, v] : s) {
    if (o[mode] == 0) continue;
    Occ p = o;
    r[p] += 0.0;
    p[mode] -= 1;
    r[p] += coeff * std::sqrt(static_cast<double>(o[mode])) * v;
  }
  State clean;
  for (const auto& [o, v] : r)
    if (v != Complex{}) clean[o] = v;
  return clean;
}

inline State add(State a, const State& b, Complex c = 1.0) {
  for (const auto& [o, v] : b) a[o] += c * v;
  return a;
}

inline Complex amplitude(const State& s, const Occ& o) {
  auto it = s.find(o);
  return it == s.end() ? Complex{} : it->second;
}

/// exp(A) by scaling and squaring with a degree-20 Taylor polynomial.
inline fockbench::CMatrix expm(const fockbench::CMatrix& a) {
  using fockbench::CMatrix;
  const double nrm = a.max_abs() * static_cast<double>(a.rows());
  int squarings = 0;
  double scale = 1.0;
  while (nrm * scale > 0.25) {
    scale *= 0.5;
    ++squarings;
  }
  CMatrix x = Complex(scale) * a;
  CMatrix result = CMatrix::identity(a.rows());
  CMatrix term = CMatrix::identity(a.rows());
  for (int k = 1; k <= 20; ++k) {
    term = Complex(1.0 / k) * (term * x);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

}  // namespace oracle
