#pragma once

// ModelSpec: H = H01 (x) 1 + 1 (x) dGamma(h02) + H_I, with H_I given as an operator expression
// over named coefficient arrays. The expression is bound to the data by opdsl.hpp.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fockbench/errors.hpp"
#include "fockbench/linalg.hpp"
#include "fockbench/qop.hpp"

namespace fockbench {

/// A named coefficient array. Vectors keep their one-dimensional shape so that documents
/// round-trip exactly; values are stored as an n x 1 matrix in that case.
struct DataArray {
  CMatrix values;
  bool vector = false;

  static DataArray from_vector(std::span<const Complex> v) {
    DataArray a;
    a.values = CMatrix(v.size(), 1);
    std::copy(v.begin(), v.end(), a.values.raw().begin());
    a.vector = true;
    return a;
  }
  static DataArray from_matrix(CMatrix m) { return {std::move(m), false}; }

  CVector as_vector() const { return values.raw(); }
  std::size_t size() const { return values.raw().size(); }

  friend bool operator==(const DataArray&, const DataArray&) = default;
};

/// One bound interaction term: scalar * (P (x) monomial), plus its adjoint when `closure` is set.
struct Term {
  FockKind kind = FockKind::Identity;
  std::string ref;           // coefficient array ("" for N and I)
  std::string particle_ref;  // particle factor ("" = identity)
  Complex scalar = 1.0;
  bool closure = false;
  FockTerm fock;             // coefficient data resolved from `ref`
  CMatrix particle;          // resolved particle factor, empty for identity
};

struct ModelSpec {
  std::string name;
  std::string family;  // boson, nelson, pauli-fierz, toy or custom; selects the matching bounds
  std::size_t L = 1;
  std::size_t d = 1;
  std::map<std::string, DataArray> data;
  std::string h01;  // ref to an L x L matrix, empty for H01 = 0
  std::string h02;  // ref to a d x d matrix
  std::string interaction;
  std::map<std::string, double> parameters;  // grid sizes, couplings; informational

  // filled by bind_model()
  std::vector<Term> terms;
  double M1 = 0.0;
  double M2 = 0.0;

  const DataArray& array(const std::string& ref, const std::string& field) const {
    auto it = data.find(ref);
    if (it == data.end()) throw ValidationError("unknown reference '" + ref + "'", field);
    return it->second;
  }
  bool has(const std::string& ref) const { return data.count(ref) != 0; }

  CMatrix h01_matrix() const { return h01.empty() ? CMatrix(L, L) : array(h01, "h01").values; }
  CMatrix h02_matrix() const { return array(h02, "h02").values; }

  /// Same document: name, shapes, data (entrywise), references and expression text.
  bool same_document(const ModelSpec& o) const {
    return name == o.name && family == o.family && L == o.L && d == o.d && data == o.data && h01 == o.h01 &&
           h02 == o.h02 && interaction == o.interaction && parameters == o.parameters;
  }
};

/// Lower bounds in the convention H01 >= -M1, H02 >= -M2 with M >= 0.
struct LowerBounds {
  double M1 = 0.0;
  double M2 = 0.0;
};

/// M1 = max(0, -lambda_min(H01)); M2 = max(0, -n_max * lambda_min(h02)) which is 0 for h02 >= 0.
/// `n_max` only matters for an indefinite h02, which bind_model rejects.
inline LowerBounds lower_bounds(const ModelSpec& m, std::size_t n_max = 0) {
  LowerBounds r;
  const CMatrix h01 = m.h01_matrix();
  if (h01.max_abs() > 0.0) r.M1 = std::max(0.0, -eigvalsh(h01).front());
  const CMatrix h02 = m.h02_matrix();
  if (h02.max_abs() > 0.0) r.M2 = std::max(0.0, -static_cast<double>(n_max) * eigvalsh(h02).front());
  return r;
}

}  // namespace fockbench
