#pragma once

// Small dense/sparse complex linear algebra: just what the Fock-space operators need.
// Dense matrices are row-major. Sparse matrices are CSR with sorted column indices.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fockbench/errors.hpp"
#include "fockbench/random.hpp"

namespace fockbench {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

inline double norm2(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

inline Complex dot(std::span<const Complex> a, std::span<const Complex> b) {
  // conjugate-linear in the first argument
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double max_abs(std::span<const Complex> v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

class CMatrix {
public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static CMatrix diagonal(std::span<const Complex> d) {
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  static CMatrix diagonal(std::span<const double> d) {
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<Complex> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const Complex> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<Complex>& raw() noexcept { return data_; }
  const std::vector<Complex>& raw() const noexcept { return data_; }

  CMatrix adjoint() const {
    CMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  CMatrix transpose() const {
    CMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  double max_abs() const { return fockbench::max_abs(data_); }

  double frobenius() const { return norm2(data_); }

  /// max |A - A^dagger| entry.
  double hermiticity_defect() const {
    if (!is_square()) return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i; j < cols_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
  }

  bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() <= tol; }

  /// y += alpha * A x
  void apply_add(std::span<const Complex> x, std::span<Complex> y, Complex alpha = 1.0) const {
    for (std::size_t i = 0; i < rows_; ++i) {
      Complex s{};
      const Complex* r = data_.data() + i * cols_;
      for (std::size_t j = 0; j < cols_; ++j) s += r[j] * x[j];
      y[i] += alpha * s;
    }
  }

  /// y += alpha * A^dagger x
  void apply_adjoint_add(std::span<const Complex> x, std::span<Complex> y, Complex alpha = 1.0) const {
    for (std::size_t i = 0; i < rows_; ++i) {
      const Complex xi = alpha * x[i];
      if (xi == Complex{}) continue;
      const Complex* r = data_.data() + i * cols_;
      for (std::size_t j = 0; j < cols_; ++j) y[j] += std::conj(r[j]) * xi;
    }
  }

  CVector apply(std::span<const Complex> x) const {
    CVector y(rows_);
    apply_add(x, y);
    return y;
  }

  CMatrix& operator+=(const CMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  CMatrix& operator*=(Complex c) {
    for (auto& x : data_) x *= c;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(Complex c, CMatrix a) { return a *= c; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_) throw SpaceMismatch("matrix product: inner dimensions differ");
    CMatrix r(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      Complex* ri = r.data_.data() + i * r.cols_;
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex{}) continue;
        const Complex* bk = b.data_.data() + k * b.cols_;
        for (std::size_t j = 0; j < b.cols_; ++j) ri[j] += aik * bk[j];
      }
    }
    return r;
  }

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

private:
  void require_same_shape(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw SpaceMismatch("matrix shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Kronecker product a (x) b.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex{}) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return r;
}

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  Complex value;
};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Duplicates are summed; exact zeros are dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(rows, cols);
    m.col_.reserve(t.size());
    m.val_.reserve(t.size());
    std::size_t i = 0;
    while (i < t.size()) {
      const auto r = t[i].row;
      const auto c = t[i].col;
      Complex v{};
      while (i < t.size() && t[i].row == r && t[i].col == c) v += t[i++].value;
      if (v == Complex{}) continue;
      m.col_.push_back(c);
      m.val_.push_back(v);
      ++m.row_ptr_[r + 1];
    }
    std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
    return m;
  }

  static SparseMatrix from_dense(const CMatrix& d) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j)
        if (d(i, j) != Complex{})
          t.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), d(i, j)});
    return from_triplets(d.rows(), d.cols(), std::move(t));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return val_.size(); }

  const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<std::uint32_t>& col_index() const noexcept { return col_; }
  const std::vector<Complex>& values() const noexcept { return val_; }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) f(i, static_cast<std::size_t>(col_[p]), val_[p]);
  }

  void apply_add(std::span<const Complex> x, std::span<Complex> y, Complex alpha = 1.0) const {
    for (std::size_t i = 0; i < rows_; ++i) {
      Complex s{};
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += val_[p] * x[col_[p]];
      y[i] += alpha * s;
    }
  }

  void apply_adjoint_add(std::span<const Complex> x, std::span<Complex> y, Complex alpha = 1.0) const {
    for (std::size_t i = 0; i < rows_; ++i) {
      const Complex xi = alpha * x[i];
      if (xi == Complex{}) continue;
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) y[col_[p]] += std::conj(val_[p]) * xi;
    }
  }

  SparseMatrix adjoint() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for_each([&](std::size_t i, std::size_t j, Complex v) {
      t.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i), std::conj(v)});
    });
    return from_triplets(cols_, rows_, std::move(t));
  }

  CMatrix to_dense() const {
    CMatrix d(rows_, cols_);
    for_each([&](std::size_t i, std::size_t j, Complex v) { d(i, j) += v; });
    return d;
  }

  double max_abs() const { return fockbench::max_abs(val_); }

  SparseMatrix scaled(Complex c) const {
    SparseMatrix r = *this;
    for (auto& v : r.val_) v *= c;
    if (c == Complex{}) return SparseMatrix(rows_, cols_);
    return r;
  }

  friend SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw SpaceMismatch("sparse sum: shapes differ");
    std::vector<Triplet> t;
    t.reserve(a.nnz() + b.nnz());
    auto push = [&](std::size_t i, std::size_t j, Complex v) {
      t.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), v});
    };
    a.for_each(push);
    b.for_each(push);
    return from_triplets(a.rows_, a.cols_, std::move(t));
  }

  /// Gustavson row-by-row product.
  friend SparseMatrix operator*(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols_ != b.rows_) throw SpaceMismatch("sparse product: inner dimensions differ");
    std::vector<Triplet> t;
    std::vector<Complex> acc(b.cols_);
    std::vector<char> used(b.cols_, 0);
    std::vector<std::uint32_t> touched;
    for (std::size_t i = 0; i < a.rows_; ++i) {
      touched.clear();
      for (std::size_t p = a.row_ptr_[i]; p < a.row_ptr_[i + 1]; ++p) {
        const Complex av = a.val_[p];
        const std::size_t k = a.col_[p];
        for (std::size_t q = b.row_ptr_[k]; q < b.row_ptr_[k + 1]; ++q) {
          const auto j = b.col_[q];
          if (!used[j]) {
            used[j] = 1;
            touched.push_back(j);
          }
          acc[j] += av * b.val_[q];
        }
      }
      for (auto j : touched) {
        t.push_back({static_cast<std::uint32_t>(i), j, acc[j]});
        acc[j] = Complex{};
        used[j] = 0;
      }
    }
    return from_triplets(a.rows_, b.cols_, std::move(t));
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_;
  std::vector<Complex> val_;
};

/// Lower-triangular Cholesky factor L with B = L L^dagger. Throws NumericalError when B is
/// not (numerically) positive definite.
inline CMatrix cholesky(const CMatrix& b) {
  if (!b.is_square()) throw SpaceMismatch("cholesky: matrix is not square");
  const std::size_t n = b.rows();
  CMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = b(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0) || !std::isfinite(d))
      throw NumericalError("cholesky: matrix is not positive definite (pivot " + std::to_string(j) + ")");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex s = b(i, j);
      const Complex* li = &l(i, 0);
      const Complex* lj = &l(j, 0);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * std::conj(lj[k]);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

/// Solves L y = x in place (L lower triangular).
inline void solve_lower(const CMatrix& l, std::span<Complex> x) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    Complex s = x[i];
    const Complex* li = &l(i, 0);
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * x[k];
    x[i] = s / li[i];
  }
}

/// Solves L^dagger y = x in place (L lower triangular).
inline void solve_lower_adjoint(const CMatrix& l, std::span<Complex> x) {
  const std::size_t n = l.rows();
  for (std::size_t ii = n; ii-- > 0;) {
    Complex s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l(k, ii)) * x[k];
    x[ii] = s / std::conj(l(ii, ii));
  }
}

struct Eigensystem {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // column k is the eigenvector of values[k]
};

/// Cyclic Jacobi diagonalization of a Hermitian matrix. Sweeps until the off-diagonal
/// Frobenius norm drops below `tol` times the full Frobenius norm.
inline Eigensystem jacobi_eigh(CMatrix a, bool want_vectors = true, double tol = 1e-14, int max_sweeps = 100) {
  if (!a.is_square()) throw SpaceMismatch("jacobi_eigh: matrix is not square");
  const std::size_t n = a.rows();
  CMatrix v = want_vectors ? CMatrix::identity(n) : CMatrix();
  for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();
  const double scale = std::max(a.frobenius(), std::numeric_limits<double>::min());

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * std::norm(a(i, j));
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= tol * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= std::numeric_limits<double>::min() * 16) continue;
        const Complex phase = apq / mag;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Q acts on columns p,q:  col_p = c e_p - s e^{-i phi} e_q,  col_q = s e_p + c e^{-i phi} e_q
        const Complex qpp = c;
        const Complex qqp = -s * std::conj(phase);
        const Complex qpq = s;
        const Complex qqq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {  // A <- A Q
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = akp * qpp + akq * qqp;
          a(k, q) = akp * qpq + akq * qqq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // A <- Q^dagger A
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = std::conj(qpp) * apk + std::conj(qqp) * aqk;
          a(q, k) = std::conj(qpq) * apk + std::conj(qqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        if (want_vectors) {
          for (std::size_t k = 0; k < n; ++k) {
            const Complex vkp = v(k, p);
            const Complex vkq = v(k, q);
            v(k, p) = vkp * qpp + vkq * qqp;
            v(k, q) = vkp * qpq + vkq * qqq;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  Eigensystem es;
  es.values.resize(n);
  if (want_vectors) es.vectors = CMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    es.values[k] = a(order[k], order[k]).real();
    if (want_vectors)
      for (std::size_t i = 0; i < n; ++i) es.vectors(i, k) = v(i, order[k]);
  }
  return es;
}

inline std::vector<double> eigvalsh(const CMatrix& a) { return jacobi_eigh(a, false).values; }

/// f(A) for Hermitian A by spectral decomposition.
inline CMatrix hermitian_function(const CMatrix& a, const std::function<Complex(double)>& f) {
  const auto es = jacobi_eigh(a);
  const std::size_t n = a.rows();
  CMatrix r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex fk = f(es.values[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex vik = es.vectors(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) r(i, j) += vik * std::conj(es.vectors(j, k));
    }
  }
  return r;
}

/// Spectral norm of an arbitrary dense matrix.
inline double operator_norm(const CMatrix& a) {
  if (a.empty()) return 0.0;
  const CMatrix g = a.rows() >= a.cols() ? a.adjoint() * a : a * a.adjoint();
  const auto ev = eigvalsh(g);
  return std::sqrt(std::max(0.0, ev.back()));
}

/// Largest eigenvalue of a Hermitian positive semi-definite operator given only through its
/// action, by Lanczos with full reorthogonalization. The start vector comes from a fixed
/// SplitMix64 stream, so the result is deterministic.
inline double lanczos_max(std::size_t dim, const std::function<void(std::span<const Complex>, std::span<Complex>)>& op,
                          double rel_tol = 1e-13, std::size_t max_iter = 300, std::uint64_t seed = 0x5EEDULL) {
  if (dim == 0) return 0.0;
  SplitMix64 rng(seed);
  std::vector<CVector> basis;
  CVector q = random_complex_vector(rng, dim);
  double nq = norm2(q);
  for (auto& x : q) x /= nq;
  std::vector<double> alpha, beta;
  CVector w(dim);
  double last = -std::numeric_limits<double>::infinity();
  const std::size_t limit = std::min(dim, max_iter);

  auto ritz_max = [&] {
    const std::size_t k = alpha.size();
    CMatrix t(k, k);
    for (std::size_t i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    return eigvalsh(t).back();
  };

  for (std::size_t it = 0; it < limit; ++it) {
    basis.push_back(q);
    std::fill(w.begin(), w.end(), Complex{});
    op(q, w);
    const double a = dot(q, w).real();
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const Complex c = dot(b, w);
        for (std::size_t i = 0; i < dim; ++i) w[i] -= c * b[i];
      }
    }
    const double bnorm = norm2(w);
    const bool exhausted = bnorm <= 1e-14 * std::max(1.0, std::abs(a)) || it + 1 == limit;
    if (exhausted || (it + 1) % 8 == 0) {
      const double cur = ritz_max();
      if (exhausted || std::abs(cur - last) <= rel_tol * std::max(std::abs(cur), 1e-300)) return cur;
      last = cur;
    }
    beta.push_back(bnorm);
    for (std::size_t i = 0; i < dim; ++i) q[i] = w[i] / bnorm;
  }
  return ritz_max();
}

using LinearOperator = std::function<void(std::span<const Complex>, std::span<Complex>)>;

/// Solves B x = b for Hermitian positive definite B by conjugate gradients. `x` holds the
/// starting guess on entry.
inline std::size_t conjugate_gradient(const LinearOperator& b_op, std::span<const Complex> b, std::span<Complex> x,
                                      double rel_tol = 1e-14, std::size_t max_iter = 2000) {
  const std::size_t n = b.size();
  CVector r(b.begin(), b.end()), p(n), ap(n);
  b_op(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] -= ap[i];
  const double bn = norm2(b);
  if (bn == 0.0) {
    std::fill(x.begin(), x.end(), Complex{});
    return 0;
  }
  p = r;
  double rr = std::pow(norm2(r), 2);
  std::size_t it = 0;
  for (; it < max_iter && std::sqrt(rr) > rel_tol * bn; ++it) {
    std::fill(ap.begin(), ap.end(), Complex{});
    b_op(p, ap);
    const double pap = dot(p, ap).real();
    if (!(pap > 0.0)) throw NumericalError("conjugate_gradient: operator is not positive definite");
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_new = std::pow(norm2(r), 2);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  return it;
}

/// Largest eigenvalue of the pencil (K, B): K Hermitian positive semi-definite, B Hermitian
/// positive definite. Lanczos on B^{-1}K in the B inner product with full reorthogonalization;
/// `b_solve` overwrites its argument with B^{-1} times it.
inline double pencil_lanczos_max(std::size_t dim, const LinearOperator& k_op, const LinearOperator& b_op,
                                 const std::function<void(std::span<Complex>)>& b_solve, double rel_tol = 1e-12,
                                 std::size_t max_iter = 300, std::uint64_t seed = 0x5EEDULL) {
  if (dim == 0) return 0.0;
  SplitMix64 rng(seed);
  CVector q = random_complex_vector(rng, dim);
  CVector bq(dim);
  b_op(q, bq);
  const double nq = std::sqrt(dot(q, bq).real());
  for (std::size_t i = 0; i < dim; ++i) {
    q[i] /= nq;
    bq[i] /= nq;
  }
  std::vector<CVector> qs, bqs;
  std::vector<double> alpha, beta;
  CVector w(dim), bw(dim);
  double last = -std::numeric_limits<double>::infinity();
  const std::size_t limit = std::min(dim, max_iter);

  auto ritz_max = [&] {
    const std::size_t k = alpha.size();
    CMatrix t(k, k);
    for (std::size_t i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    return eigvalsh(t).back();
  };

  for (std::size_t it = 0; it < limit; ++it) {
    qs.push_back(q);
    bqs.push_back(bq);
    std::fill(w.begin(), w.end(), Complex{});
    k_op(q, w);
    const double a = dot(q, w).real();
    alpha.push_back(a);
    b_solve(w);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < qs.size(); ++j) {
        const Complex c = dot(bqs[j], w);
        for (std::size_t i = 0; i < dim; ++i) w[i] -= c * qs[j][i];
      }
    std::fill(bw.begin(), bw.end(), Complex{});
    b_op(w, bw);
    const double bnorm = std::sqrt(std::max(0.0, dot(w, bw).real()));
    const bool exhausted = bnorm <= 1e-14 * std::max(1.0, std::abs(a)) || it + 1 == limit;
    if (exhausted || (it + 1) % 8 == 0) {
      const double cur = ritz_max();
      if (exhausted || std::abs(cur - last) <= rel_tol * std::max(std::abs(cur), 1e-300)) return cur;
      last = cur;
    }
    beta.push_back(bnorm);
    for (std::size_t i = 0; i < dim; ++i) {
      q[i] = w[i] / bnorm;
      bq[i] = bw[i] / bnorm;
    }
  }
  return ritz_max();
}

}  // namespace fockbench
