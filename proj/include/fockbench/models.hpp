#pragma once

// Builders for the example Hamiltonians. Continuum spaces become periodic grids of length
// 2*pi with derivatives realized spectrally (diagonal in the discrete Fourier basis).

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fockbench/model.hpp"
#include "fockbench/opdsl.hpp"

namespace fockbench {

namespace grid {

/// Signed frequency of DFT index m on K points; the Nyquist index maps to -K/2.
inline long frequency(std::size_t m, std::size_t K) {
  return m < (K + 1) / 2 ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(K);
}

/// Unitary DFT, rows indexed by frequency slot m, columns by grid point j.
inline CMatrix dft_unitary(std::size_t K) {
  CMatrix u(K, K);
  const double s = 1.0 / std::sqrt(static_cast<double>(K));
  for (std::size_t m = 0; m < K; ++m)
    for (std::size_t j = 0; j < K; ++j) {
      const double ph = -2.0 * std::numbers::pi * static_cast<double>(m * j % K) / static_cast<double>(K);
      u(m, j) = std::polar(s, ph);
    }
  return u;
}

/// f(-i d/dx) on a periodic grid of K points and length 2*pi, in the position basis.
inline CMatrix spectral_1d(std::size_t K, const std::function<double(double)>& f) {
  const CMatrix u = dft_unitary(K);
  std::vector<double> diag(K);
  for (std::size_t m = 0; m < K; ++m) diag[m] = f(static_cast<double>(frequency(m, K)));
  return u.adjoint() * CMatrix::diagonal(std::span<const double>(diag)) * u;
}

inline CMatrix symmetrize(const CMatrix& a) { return Complex(0.5) * (a + a.adjoint()); }

inline CMatrix real_diagonal(const std::vector<double>& v) { return CMatrix::diagonal(std::span<const double>(v)); }

}  // namespace grid

namespace detail {

inline std::string join_terms(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) s += (s.empty() ? "" : " + ") + p;
  return s;
}

inline CMatrix unit_matrix(std::size_t d, std::size_t i, std::size_t j) {
  CMatrix e(d, d);
  e(i, j) = 1.0;
  return e;
}

inline CVector unit_vector(std::size_t d, std::size_t i) {
  CVector e(d);
  e[i] = 1.0;
  return e;
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// identical bosons

struct BosonCoefficients {
  CMatrix h0;   // d x d, Hermitian, >= 0
  CVector V1;   // d, empty for 0
  CMatrix V2;   // d x d Hermitian, empty for 0
  CMatrix V3;   // d x d symmetric, empty for 0
  CMatrix V4;   // d x d real symmetric pair kernel W_ij = V4(x_i - x_j), empty for 0
};

/// H = dGamma(h0) + a*(V1) + a(V1) + sum V2_ij a*_i a_j + sum (V3_ij a*_i a*_j + h.c.)
///     + 1/2 sum W_ij a*_i a*_j a_i a_j.
inline ModelSpec build_boson_model(const std::string& name, const BosonCoefficients& c) {
  const std::size_t d = c.h0.rows();
  if (d == 0 || !c.h0.is_square()) throw ValidationError("must be a non-empty square matrix", "h0");
  auto square = [&](const CMatrix& m, const char* field) {
    if (!m.empty() && (m.rows() != d || m.cols() != d))
      throw ValidationError("expected a " + std::to_string(d) + " x " + std::to_string(d) + " matrix", field);
  };
  square(c.V2, "V2");
  square(c.V3, "V3");
  square(c.V4, "V4");
  if (!c.V1.empty() && c.V1.size() != d) throw ValidationError("expected length " + std::to_string(d), "V1");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const std::string at = " (entry " + std::to_string(i) + "," + std::to_string(j) + ")";
      if (!c.V2.empty() && std::abs(c.V2(i, j) - std::conj(c.V2(j, i))) > detail::kSymmetryTol)
        throw ValidationError("matrix is not Hermitian" + at, "V2");
      if (!c.V3.empty() && std::abs(c.V3(i, j) - c.V3(j, i)) > detail::kSymmetryTol)
        throw ValidationError("matrix is not symmetric" + at, "V3");
      if (!c.V4.empty() && (c.V4(i, j).imag() != 0.0 || std::abs(c.V4(i, j) - c.V4(j, i)) > detail::kSymmetryTol))
        throw ValidationError("pair kernel must be real and even" + at, "V4");
    }

  ModelSpec m;
  m.name = name;
  m.family = "boson";
  m.L = 1;
  m.d = d;
  m.data["h0"] = DataArray::from_matrix(c.h0);
  m.h02 = "h0";
  std::vector<std::string> parts;
  if (!c.V1.empty() && max_abs(c.V1) > 0.0) {
    m.data["V1"] = DataArray::from_vector(c.V1);
    parts.push_back("hc(adag(V1))");
  }
  if (!c.V2.empty() && c.V2.max_abs() > 0.0) {
    m.data["V2"] = DataArray::from_matrix(c.V2);
    parts.push_back("quad2(V2)");
  }
  if (!c.V3.empty() && c.V3.max_abs() > 0.0) {
    m.data["V3"] = DataArray::from_matrix(c.V3);
    parts.push_back("hc(pairc(V3))");
  }
  if (!c.V4.empty() && c.V4.max_abs() > 0.0) {
    m.data["V4"] = DataArray::from_matrix(c.V4);
    parts.push_back("0.5 * quartic(V4)");
  }
  m.interaction = detail::join_terms(parts);
  m.parameters["d"] = static_cast<double>(d);
  bind_model(m);
  return m;
}

/// Gapped d-mode boson preset with linear, number-conserving and pair terms; no pair kernel,
/// so the interaction is quadratic.
inline ModelSpec boson_preset(std::size_t d = 4) {
  BosonCoefficients c;
  std::vector<double> e(d);
  for (std::size_t k = 0; k < d; ++k) e[k] = 1.0 + 0.5 * static_cast<double>(k);
  c.h0 = grid::real_diagonal(e);
  c.V1.resize(d);
  c.V2 = CMatrix(d, d);
  c.V3 = CMatrix(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    c.V1[i] = std::polar(0.3 / std::sqrt(static_cast<double>(d)), 0.7 * static_cast<double>(i));
    for (std::size_t j = 0; j < d; ++j) {
      const double gap = 1.0 + std::abs(static_cast<double>(i) - static_cast<double>(j));
      c.V2(i, j) = std::polar(0.1 / gap, 0.3 * (static_cast<double>(i) - static_cast<double>(j)));
      c.V3(i, j) = std::polar(0.05 / gap, 0.2 * static_cast<double>(i + j));
    }
  }
  ModelSpec m = build_boson_model("boson", c);
  return m;
}

/// Bosons on a periodic K x K x K lattice (unit spacing) with h0 = -Laplacian (spectral) and
/// the pair kernel sign / |x_i - x_j| (minimum image); W_ii = 1 / (half the lattice spacing).
inline ModelSpec coulomb_preset(std::size_t K = 2, double sign = 1.0) {
  if (K < 2) throw ValidationError("lattice needs at least 2 points per axis", "grid");
  const std::size_t d = K * K * K;
  const double length = static_cast<double>(K);  // unit spacing
  const double kscale = 2.0 * std::numbers::pi / length;
  const CMatrix u1 = grid::dft_unitary(K);
  const CMatrix u = kron(kron(u1, u1), u1);
  std::vector<double> k2(d);
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = 0; b < K; ++b)
      for (std::size_t c = 0; c < K; ++c) {
        const double ka = kscale * static_cast<double>(grid::frequency(a, K));
        const double kb = kscale * static_cast<double>(grid::frequency(b, K));
        const double kc = kscale * static_cast<double>(grid::frequency(c, K));
        k2[(a * K + b) * K + c] = ka * ka + kb * kb + kc * kc;
      }
  BosonCoefficients co;
  co.h0 = grid::symmetrize(u.adjoint() * grid::real_diagonal(k2) * u);
  co.V4 = CMatrix(d, d);
  auto coord = [&](std::size_t i) {
    return std::array<long, 3>{static_cast<long>(i / (K * K)), static_cast<long>(i / K % K), static_cast<long>(i % K)};
  };
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) {
        co.V4(i, j) = sign * 2.0;
        continue;
      }
      const auto xi = coord(i), xj = coord(j);
      double r2 = 0.0;
      for (int ax = 0; ax < 3; ++ax) {
        long dx = std::labs(xi[ax] - xj[ax]);
        dx = std::min<long>(dx, static_cast<long>(K) - dx);
        r2 += static_cast<double>(dx * dx);
      }
      co.V4(i, j) = sign / std::sqrt(r2);
    }
  ModelSpec m = build_boson_model("coulomb", co);
  m.parameters["grid"] = static_cast<double>(K);
  m.parameters["sign"] = sign;
  return m;
}

// ---------------------------------------------------------------------------------------------
// toy models

enum class ToyKind { H3, Hda, Hdaa };

/// H3 = a*a + a*^3 + a^3 (single mode); Hda and Hdaa on a periodic grid of K points for the
/// particle, with -i d/dx and -d^2/dx^2 spectral.
inline ModelSpec build_toy(ToyKind kind, std::size_t K = 64) {
  ModelSpec m;
  m.family = "toy";
  m.d = 1;
  CMatrix one(1, 1);
  one(0, 0) = 1.0;
  m.data["one"] = DataArray::from_matrix(one);
  m.h02 = "one";
  if (kind == ToyKind::H3) {
    m.name = "h3";
    m.L = 1;
    m.data["c"] = DataArray::from_vector(CVector{1.0});
    m.interaction = "hc(cubic3(c))";
  } else {
    if (K < 4) throw ValidationError("spectral derivative needs at least 4 grid points", "grid");
    m.L = K;
    m.data["lap"] = DataArray::from_matrix(grid::symmetrize(grid::spectral_1d(K, [](double k) { return k * k; })));
    m.data["D"] = DataArray::from_matrix(grid::symmetrize(grid::spectral_1d(K, [](double k) { return k; })));
    m.h01 = "lap";
    m.parameters["grid"] = static_cast<double>(K);
    if (kind == ToyKind::Hda) {
      m.name = "hda";
      m.data["e"] = DataArray::from_vector(CVector{1.0});
      m.interaction = "hc(kron(D, adag(e))) + hc(pairc(one))";
    } else {
      m.name = "hdaa";
      m.interaction = "hc(kron(D, pairc(one)))";
    }
  }
  bind_model(m);
  return m;
}

// ---------------------------------------------------------------------------------------------
// Nelson

/// One particle on a periodic grid of L points (length 2*pi) coupled linearly to d field modes:
/// H = (-Laplacian + Vext) (x) 1 + 1 (x) dGamma(diag(omega)) + sum_x |x><x| (x) (a*(v(x,.)) + a(v(x,.))).
/// `v` is L x d.
inline ModelSpec build_nelson(const std::vector<double>& omega, const std::vector<double>& vext, const CMatrix& v) {
  const std::size_t L = vext.size(), d = omega.size();
  if (L == 0) throw ValidationError("particle grid is empty", "Vext");
  if (d == 0) throw ValidationError("no field modes", "omega");
  for (std::size_t k = 0; k < d; ++k)
    if (!(omega[k] >= 0.0)) throw ValidationError("dispersion must be non-negative (mode " + std::to_string(k) + ")", "omega");
  for (std::size_t x = 0; x < L; ++x)
    if (!(vext[x] >= 0.0)) throw ValidationError("external potential must be non-negative (point " + std::to_string(x) + ")", "Vext");
  if (v.rows() != L || v.cols() != d)
    throw ValidationError("coupling must be L x d = " + std::to_string(L) + " x " + std::to_string(d), "v");

  ModelSpec m;
  m.name = "nelson";
  m.family = "nelson";
  m.L = L;
  m.d = d;
  const CMatrix lap = L == 1 ? CMatrix(1, 1) : grid::symmetrize(grid::spectral_1d(L, [](double k) { return k * k; }));
  m.data["laplacian"] = DataArray::from_matrix(lap);
  m.data["H01"] = DataArray::from_matrix(lap + grid::real_diagonal(vext));
  m.data["omega"] = DataArray::from_matrix(grid::real_diagonal(omega));
  m.data["v"] = DataArray::from_matrix(v);
  m.h01 = "H01";
  m.h02 = "omega";
  std::vector<std::string> parts;
  for (std::size_t k = 0; k < d; ++k) {
    CVector col(L);
    for (std::size_t x = 0; x < L; ++x) col[x] = v(x, k);
    if (max_abs(col) == 0.0) continue;
    const std::string p = "P" + std::to_string(k), e = "e" + std::to_string(k);
    m.data[p] = DataArray::from_matrix(CMatrix::diagonal(std::span<const Complex>(col)));
    m.data[e] = DataArray::from_vector(detail::unit_vector(d, k));
    parts.push_back("hc(kron(" + p + ", adag(" + e + ")))");
  }
  m.interaction = detail::join_terms(parts);
  bind_model(m);
  return m;
}

/// Cut-off coupling v(x,k) = lambda (2 pi)^{-1/2} (2 omega(k))^{-1/2} e^{-ikx} [|k| <= sigma],
/// omega(k) = sqrt(k^2 + mu^2), field momenta k in {-d/2, ..., d/2 - 1}, external potential
/// 0.5 (1 - cos x).
inline ModelSpec nelson_preset(std::size_t L = 8, std::size_t d = 8, double lambda = 1.0, double mu = 1.0,
                               double sigma = 4.0) {
  std::vector<double> omega(d), vext(L);
  CMatrix v(L, d);
  for (std::size_t x = 0; x < L; ++x) {
    const double pos = 2.0 * std::numbers::pi * static_cast<double>(x) / static_cast<double>(L);
    vext[x] = 0.5 * (1.0 - std::cos(pos));
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double k = static_cast<double>(j) - static_cast<double>(d / 2);
    omega[j] = std::sqrt(k * k + mu * mu);
    if (std::abs(k) > sigma || omega[j] == 0.0) continue;
    const double amp = lambda / std::sqrt(2.0 * std::numbers::pi) / std::sqrt(2.0 * omega[j]);
    for (std::size_t x = 0; x < L; ++x) {
      const double pos = 2.0 * std::numbers::pi * static_cast<double>(x) / static_cast<double>(L);
      v(x, j) = std::polar(amp, -k * pos);
    }
  }
  ModelSpec m = build_nelson(omega, vext, v);
  m.parameters = {{"L", static_cast<double>(L)}, {"d", static_cast<double>(d)}, {"lambda", lambda},
                  {"mu", mu},                    {"sigma", sigma}};
  return m;
}

// ---------------------------------------------------------------------------------------------
// Pauli-Fierz (two space dimensions, one polarization)

namespace pf {

/// Momentum q = (q1, q2) of particle basis state p on a K x K grid of length 2*pi, q_i in
/// {-K/2, ..., K/2 - 1}.
inline std::array<long, 2> momentum(std::size_t p, std::size_t K) {
  const long h = static_cast<long>(K / 2);
  return {static_cast<long>(p / K) - h, static_cast<long>(p % K) - h};
}

inline std::optional<std::size_t> index_of(std::array<long, 2> q, std::size_t K) {
  const long h = static_cast<long>(K / 2);
  const long a = q[0] + h, b = q[1] + h;
  if (a < 0 || b < 0 || a >= static_cast<long>(K) || b >= static_cast<long>(K)) return std::nullopt;
  return static_cast<std::size_t>(a) * K + static_cast<std::size_t>(b);
}

/// Multiplication by e^{ik.x} in the momentum basis: |q> -> |q + k>, dropped when q + k leaves
/// the grid, so that S_k^dagger = S_{-k} and [P, S_k] = k S_k hold exactly.
inline CMatrix shift(std::array<long, 2> k, std::size_t K) {
  CMatrix s(K * K, K * K);
  for (std::size_t p = 0; p < K * K; ++p) {
    const auto q = momentum(p, K);
    if (auto t = index_of({q[0] + k[0], q[1] + k[1]}, K)) s(*t, p) = 1.0;
  }
  return s;
}

/// Polarization e(k) = (-k2, k1) / |k|, orthogonal to k.
inline std::array<double, 2> polarization(std::array<long, 2> k) {
  const double r = std::hypot(static_cast<double>(k[0]), static_cast<double>(k[1]));
  return {-static_cast<double>(k[1]) / r, static_cast<double>(k[0]) / r};
}

/// Field modes: the grid momenta k != 0 with chi(k) != 0, in grid order.
inline std::vector<std::size_t> coupled_modes(const CVector& chi, std::size_t K) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < K * K; ++p)
    if (chi[p] != Complex{}) out.push_back(p);
  return out;
}

inline void check_modes(const std::vector<std::size_t>& modes, const CVector& chi, std::size_t K) {
  std::vector<bool> in(K * K, false);
  for (std::size_t p : modes) {
    if (p >= K * K) throw ValidationError("mode index " + std::to_string(p) + " outside the grid", "modes");
    const auto k = momentum(p, K);
    if (k[0] == 0 && k[1] == 0) throw ValidationError("k = 0 has no polarization and cannot be a field mode", "chi");
    in[p] = true;
  }
  for (std::size_t p = 0; p < K * K; ++p)
    if (!in[p] && chi[p] != Complex{}) {
      const auto k = momentum(p, K);
      if (k[0] == 0 && k[1] == 0) throw ValidationError("chi assigns weight to k = 0, where the polarization is undefined", "chi");
      throw ValidationError("chi assigns weight to momentum index " + std::to_string(p) + " outside the field modes", "chi");
    }
}

}  // namespace pf

/// H = (-Laplacian + Vext) (x) 1 + 1 (x) dGamma(|k|) + 2i A(x).grad + A(x)^2 with
/// A(x) = sum_k e(k) (chi(k) e^{ikx} a*_k + conj(chi(k)) e^{-ikx} a_k).
/// The particle lives in the momentum basis of a K x K grid; `chi` and `vext` have K*K entries
/// (chi indexed like the particle momenta, vext by position (j1, j2) -> j1*K + j2). The field
/// modes default to the support of chi.
inline ModelSpec build_pauli_fierz(std::size_t K, const CVector& chi, const std::vector<double>& vext,
                                   std::optional<std::vector<std::size_t>> field_modes = std::nullopt) {
  if (K < 2) throw ValidationError("grid needs at least 2 points per axis", "grid");
  const std::size_t L = K * K;
  if (chi.size() != L) throw ValidationError("expected " + std::to_string(L) + " entries", "chi");
  if (vext.size() != L) throw ValidationError("expected " + std::to_string(L) + " entries", "Vext");
  for (std::size_t x = 0; x < L; ++x)
    if (!(vext[x] >= 0.0)) throw ValidationError("external potential must be non-negative (point " + std::to_string(x) + ")", "Vext");
  const auto modes = field_modes ? *field_modes : pf::coupled_modes(chi, K);
  pf::check_modes(modes, chi, K);
  const std::size_t d = modes.size();
  if (d == 0) throw ValidationError("no field modes", "chi");

  // particle part: diag |q|^2 plus the potential transformed to momentum space
  std::vector<double> q2(L), qa(L);
  for (std::size_t p = 0; p < L; ++p) {
    const auto q = pf::momentum(p, K);
    q2[p] = static_cast<double>(q[0] * q[0] + q[1] * q[1]);
    qa[p] = std::sqrt(q2[p]);
  }
  CMatrix f(L, L);  // momentum <- position
  for (std::size_t p = 0; p < L; ++p)
    for (std::size_t x = 0; x < L; ++x) {
      const auto q = pf::momentum(p, K);
      const double ph = -2.0 * std::numbers::pi *
                        (static_cast<double>(q[0]) * static_cast<double>(x / K) + static_cast<double>(q[1]) * static_cast<double>(x % K)) /
                        static_cast<double>(K);
      f(p, x) = std::polar(1.0 / static_cast<double>(K), ph);
    }
  const CMatrix vhat = grid::symmetrize(f * grid::real_diagonal(vext) * f.adjoint());

  ModelSpec m;
  m.name = "pauli-fierz";
  m.family = "pauli-fierz";
  m.L = L;
  m.d = d;
  m.data["laplacian"] = DataArray::from_matrix(grid::real_diagonal(q2));
  m.data["absgrad"] = DataArray::from_matrix(grid::real_diagonal(qa));
  m.data["H01"] = DataArray::from_matrix(grid::real_diagonal(q2) + vhat);
  std::vector<double> omega(d);
  CVector chis(d);
  std::vector<std::array<long, 2>> ks(d);
  for (std::size_t a = 0; a < d; ++a) {
    ks[a] = pf::momentum(modes[a], K);
    omega[a] = std::hypot(static_cast<double>(ks[a][0]), static_cast<double>(ks[a][1]));
    chis[a] = chi[modes[a]];
  }
  m.data["omega"] = DataArray::from_matrix(grid::real_diagonal(omega));
  m.data["chi"] = DataArray::from_vector(chis);
  m.h01 = "H01";
  m.h02 = "omega";

  std::vector<CMatrix> s_plus(d), s_minus(d);
  for (std::size_t a = 0; a < d; ++a) {
    s_plus[a] = pf::shift(ks[a], K);
    s_minus[a] = pf::shift({-ks[a][0], -ks[a][1]}, K);
  }
  auto edot = [&](std::size_t a, std::size_t b) {
    const auto ea = pf::polarization(ks[a]), eb = pf::polarization(ks[b]);
    return ea[0] * eb[0] + ea[1] * eb[1];
  };
  std::vector<std::string> linear, quadratic;
  // 2i A.grad with grad = i q: the creation part is -2 chi_k S_k diag(e(k).q)
  for (std::size_t a = 0; a < d; ++a) {
    const auto e = pf::polarization(ks[a]);
    std::vector<double> eq(L);
    for (std::size_t p = 0; p < L; ++p) {
      const auto q = pf::momentum(p, K);
      eq[p] = e[0] * static_cast<double>(q[0]) + e[1] * static_cast<double>(q[1]);
    }
    const std::string lin = "lin" + std::to_string(a), ev = "e" + std::to_string(a);
    m.data[lin] = DataArray::from_matrix(Complex(-2.0) * chis[a] * s_plus[a] * grid::real_diagonal(eq));
    m.data[ev] = DataArray::from_vector(detail::unit_vector(d, a));
    linear.push_back("hc(kron(" + lin + ", adag(" + ev + ")))");
  }
  // A^2 in normal order: pair creation (+ h.c.), number-conserving part and the commutator term
  CMatrix contraction(L, L);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      const std::string ab = std::to_string(a) + "_" + std::to_string(b);
      const double ee = edot(a, b);
      if (ee == 0.0) continue;
      m.data["E" + ab] = DataArray::from_matrix(detail::unit_matrix(d, a, b));
      m.data["pp" + ab] = DataArray::from_matrix(Complex(ee) * chis[a] * chis[b] * (s_plus[a] * s_plus[b]));
      quadratic.push_back("hc(kron(pp" + ab + ", pairc(E" + ab + ")))");
      if (b < a) continue;
      const CMatrix q = Complex(ee) * chis[a] * std::conj(chis[b]) * (s_plus[a] * s_minus[b] + s_minus[b] * s_plus[a]);
      m.data["pm" + ab] = DataArray::from_matrix(a == b ? grid::symmetrize(q) : q);
      quadratic.push_back(a == b ? "kron(pm" + ab + ", quad2(E" + ab + "))" : "hc(kron(pm" + ab + ", quad2(E" + ab + ")))");
    }
    contraction += Complex(std::norm(chis[a])) * (s_minus[a] * s_plus[a]);
  }
  m.data["contraction"] = DataArray::from_matrix(contraction);
  quadratic.push_back("kron(contraction, I)");

  std::vector<std::string> all = linear;
  all.insert(all.end(), quadratic.begin(), quadratic.end());
  m.interaction = detail::join_terms(all);
  m.parameters["grid"] = static_cast<double>(K);
  bind_model(m);
  return m;
}

/// K x K grid, chi = coupling on the momenta with 0 < |k| <= cutoff, Vext = 0.5 (2 - cos x1 - cos x2).
inline ModelSpec pauli_fierz_preset(std::size_t K = 4, double coupling = 0.5, double cutoff = 1.0) {
  const std::size_t L = K * K;
  CVector chi(L);
  std::vector<double> vext(L);
  std::vector<std::size_t> modes;
  for (std::size_t p = 0; p < L; ++p) {
    const auto k = pf::momentum(p, K);
    const double r = std::hypot(static_cast<double>(k[0]), static_cast<double>(k[1]));
    if (r > 0.0 && r <= cutoff) {
      chi[p] = coupling;
      modes.push_back(p);
    }
    const double x1 = 2.0 * std::numbers::pi * static_cast<double>(p / K) / static_cast<double>(K);
    const double x2 = 2.0 * std::numbers::pi * static_cast<double>(p % K) / static_cast<double>(K);
    vext[p] = 0.5 * (2.0 - std::cos(x1) - std::cos(x2));
  }
  ModelSpec m = build_pauli_fierz(K, chi, vext, modes);
  m.parameters["coupling"] = coupling;
  m.parameters["cutoff"] = cutoff;
  return m;
}

// ---------------------------------------------------------------------------------------------
// registry

struct PresetOptions {
  std::optional<std::size_t> grid;   // toy grid K, lattice size, Pauli-Fierz K, Nelson L
  std::optional<std::size_t> modes;  // boson d, Nelson d
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"boson", "boson-demo", "coulomb", "h3", "hda", "hdaa", "nelson", "pauli-fierz"};
  return names;
}

inline bool is_preset(const std::string& name) {
  const auto& n = preset_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

inline ModelSpec make_preset(const std::string& name, const PresetOptions& o = {}) {
  if (name == "boson" || name == "boson-demo") return boson_preset(o.modes.value_or(4));
  if (name == "coulomb") return coulomb_preset(o.grid.value_or(2));
  if (name == "h3") return build_toy(ToyKind::H3);
  if (name == "hda") return build_toy(ToyKind::Hda, o.grid.value_or(64));
  if (name == "hdaa") return build_toy(ToyKind::Hdaa, o.grid.value_or(64));
  if (name == "nelson") return nelson_preset(o.grid.value_or(8), o.modes.value_or(8));
  if (name == "pauli-fierz") return pauli_fierz_preset(o.grid.value_or(4));
  throw ValidationError("unknown preset '" + name + "'", "model");
}

}  // namespace fockbench
