#pragma once

// Operator expressions and model documents.
//
//   expr      := [sign] term (sign term)*
//   term      := [scalar '*'] primitive
//   scalar    := real | imag | 'i' | '(' [sign] real [sign imag] ')' | '(' [sign] imag ')'
//   primitive := 'N' | 'I' | op '(' ident ')' | 'kron' '(' ident ',' expr ')' | 'hc' '(' expr ')'
//   op        := dGamma | a | adag | quad2 | pairc | paira | quartic | cubic3
//
// See docs/grammar.md for the full grammar and the meaning of each primitive.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fockbench/block_operator.hpp"
#include "fockbench/model.hpp"
#include "fockbench/qop.hpp"

namespace fockbench {

class ParseError : public ValidationError {
public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column, std::string token)
      : ValidationError(msg + " at line " + std::to_string(line) + ", column " + std::to_string(column) +
                        (token.empty() ? std::string(" (end of input)") : " near '" + token + "'")),
        line_(line), column_(column), token_(std::move(token)) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& token() const noexcept { return token_; }

private:
  std::size_t line_, column_;
  std::string token_;
};

struct Expr;

struct Primitive {
  std::string op;  // N, I, dGamma, a, adag, quad2, pairc, paira, quartic, cubic3, kron, hc
  std::string ref;
  std::shared_ptr<Expr> sub;  // kron and hc
  std::size_t line = 0, column = 0;
};

struct Summand {
  Complex scalar = 1.0;
  Primitive prim;
};

struct Expr {
  std::vector<Summand> terms;
};

inline bool structurally_equal(const Expr& a, const Expr& b);

inline bool structurally_equal(const Primitive& a, const Primitive& b) {
  if (a.op != b.op || a.ref != b.ref || static_cast<bool>(a.sub) != static_cast<bool>(b.sub)) return false;
  return !a.sub || structurally_equal(*a.sub, *b.sub);
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.terms.size() != b.terms.size()) return false;
  for (std::size_t i = 0; i < a.terms.size(); ++i)
    if (a.terms[i].scalar != b.terms[i].scalar || !structurally_equal(a.terms[i].prim, b.terms[i].prim)) return false;
  return true;
}

namespace detail {

enum class Tok { Ident, Real, Imag, LParen, RParen, Comma, Plus, Minus, Star, End };

struct Token {
  Tok kind;
  std::string text;
  double value = 0.0;
  std::size_t line = 1, column = 1;
};

inline std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t{Tok::End, {}, 0.0, line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = s.substr(i, j - i);
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && s[j] == '.') {
        ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
          j = k;
        }
      }
      t.text = s.substr(i, j - i);
      if (t.text == ".") throw ParseError("malformed number", line, col, t.text);
      t.value = std::stod(t.text);
      t.kind = Tok::Real;
      if (j < s.size() && s[j] == 'i' && (j + 1 >= s.size() || !(std::isalnum(static_cast<unsigned char>(s[j + 1])) || s[j + 1] == '_'))) {
        t.kind = Tok::Imag;
        t.text += 'i';
        ++j;
      }
      advance(j - i);
    } else {
      switch (c) {
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case ',': t.kind = Tok::Comma; break;
        case '+': t.kind = Tok::Plus; break;
        case '-': t.kind = Tok::Minus; break;
        case '*': t.kind = Tok::Star; break;
        default: throw ParseError("unexpected character", line, col, std::string(1, c));
      }
      t.text = std::string(1, c);
      advance(1);
    }
    out.push_back(std::move(t));
  }
  out.push_back({Tok::End, {}, 0.0, line, col});
  return out;
}

inline bool is_ref_primitive(const std::string& op) {
  return op == "dGamma" || op == "a" || op == "adag" || op == "quad2" || op == "pairc" || op == "paira" ||
         op == "quartic" || op == "cubic3";
}

class Parser {
public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  Expr parse() {
    Expr e = expr(0);
    if (peek().kind != Tok::End) fail("unexpected token");
    return e;
  }

private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(msg, t.line, t.column, t.text);
  }
  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    next();
  }

  Expr expr(int depth) {
    Expr e;
    double sign = 1.0;
    if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) sign = next().kind == Tok::Minus ? -1.0 : 1.0;
    e.terms.push_back(term(sign, depth));
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      sign = next().kind == Tok::Minus ? -1.0 : 1.0;
      e.terms.push_back(term(sign, depth));
    }
    return e;
  }

  // scalar '*' if one is present, otherwise nullopt with the position unchanged
  std::optional<Complex> scalar() {
    const Token& t = peek();
    if (t.kind == Tok::Real || t.kind == Tok::Imag) {
      next();
      expect(Tok::Star, "'*' after scalar");
      return t.kind == Tok::Real ? Complex(t.value, 0.0) : Complex(0.0, t.value);
    }
    if (t.kind == Tok::Ident && t.text == "i" && peek(1).kind == Tok::Star) {
      next();
      next();
      return Complex(0.0, 1.0);
    }
    if (t.kind == Tok::LParen) {
      next();
      double s = 1.0;
      if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) s = next().kind == Tok::Minus ? -1.0 : 1.0;
      const Token& first = peek();
      Complex z;
      if (first.kind == Tok::Real) {
        next();
        z = s * first.value;
        if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
          const double s2 = next().kind == Tok::Minus ? -1.0 : 1.0;
          if (peek().kind != Tok::Imag) fail("expected imaginary part");
          z += Complex(0.0, s2 * next().value);
        }
      } else if (first.kind == Tok::Imag) {
        next();
        z = Complex(0.0, s * first.value);
      } else {
        fail("expected number");
      }
      expect(Tok::RParen, "')'");
      expect(Tok::Star, "'*' after scalar");
      return z;
    }
    return std::nullopt;
  }

  Summand term(double sign, int depth) {
    Summand s;
    if (auto c = scalar()) s.scalar = *c;
    s.scalar *= sign;
    s.prim = primitive(depth);
    return s;
  }

  Primitive primitive(int depth) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail("expected primitive");
    Primitive p;
    p.op = t.text;
    p.line = t.line;
    p.column = t.column;
    if (p.op == "N" || p.op == "I") {
      next();
      return p;
    }
    if (is_ref_primitive(p.op)) {
      next();
      expect(Tok::LParen, "'('");
      if (peek().kind != Tok::Ident) fail("expected reference name");
      p.ref = next().text;
      expect(Tok::RParen, "')'");
      return p;
    }
    if (p.op == "kron") {
      next();
      expect(Tok::LParen, "'('");
      if (peek().kind != Tok::Ident) fail("expected particle reference");
      p.ref = next().text;
      expect(Tok::Comma, "','");
      p.sub = std::make_shared<Expr>(expr(depth + 1));
      expect(Tok::RParen, "')'");
      return p;
    }
    if (p.op == "hc") {
      next();
      expect(Tok::LParen, "'('");
      p.sub = std::make_shared<Expr>(expr(depth + 1));
      expect(Tok::RParen, "')'");
      return p;
    }
    fail("unknown primitive");
  }
};

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // keep a form the lexer reads back as one number token
  if (s == "inf" || s == "-inf" || s == "nan" || s == "-nan") throw ValidationError("non-finite scalar in expression");
  return s;
}

}  // namespace detail

inline Expr parse_expression(const std::string& text) { return detail::Parser(text).parse(); }

inline std::string pretty_print(const Expr& e);

inline std::string pretty_print(const Primitive& p) {
  if (p.op == "N" || p.op == "I") return p.op;
  if (p.op == "kron") return "kron(" + p.ref + ", " + pretty_print(*p.sub) + ")";
  if (p.op == "hc") return "hc(" + pretty_print(*p.sub) + ")";
  return p.op + "(" + p.ref + ")";
}

/// Canonical text: "1 *" dropped, -1 rendered as a minus sign, reals with 17 significant digits.
inline std::string pretty_print(const Expr& e) {
  std::string out;
  for (std::size_t k = 0; k < e.terms.size(); ++k) {
    Complex c = e.terms[k].scalar;
    bool negative = false;
    if (c.imag() == 0.0 && std::signbit(c.real())) {
      negative = true;
      c = -c;
    }
    if (k > 0) out += negative ? " - " : " + ";
    else if (negative) out += "-";
    if (c.imag() == 0.0) {
      if (c.real() != 1.0) out += detail::format_real(c.real()) + " * ";
    } else if (c.real() == 0.0 && !std::signbit(c.imag())) {
      out += detail::format_real(c.imag()) + "i * ";
    } else {
      const double im = c.imag();
      out += "(" + detail::format_real(c.real()) + (std::signbit(im) ? " - " : " + ") + detail::format_real(std::abs(im)) +
             "i) * ";
    }
    out += pretty_print(e.terms[k].prim);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// binding

namespace detail {

inline FockKind primitive_kind(const std::string& op) {
  if (op == "I") return FockKind::Identity;
  if (op == "N") return FockKind::Number;
  if (op == "a") return FockKind::Annihilate;
  if (op == "adag") return FockKind::Create;
  if (op == "dGamma" || op == "quad2") return FockKind::Quad;
  if (op == "pairc") return FockKind::PairCreate;
  if (op == "paira") return FockKind::PairAnnihilate;
  if (op == "quartic") return FockKind::Quartic;
  if (op == "cubic3") return FockKind::Cubic3Create;
  throw ValidationError("unknown primitive '" + op + "'");
}

inline bool is_self_adjoint_kind(FockKind k) {
  return k == FockKind::Identity || k == FockKind::Number || k == FockKind::Quad || k == FockKind::Quartic;
}

inline constexpr double kSymmetryTol = 1e-12;

inline void bind_into(const Expr& e, const ModelSpec& m, Complex scale, bool closure, const std::string& particle_ref,
                      std::vector<Term>& out, bool strict = true) {
  for (const auto& s : e.terms) {
    const Primitive& p = s.prim;
    const Complex c = scale * s.scalar;
    if (p.op == "hc") {
      if (closure) throw ValidationError("hc nested inside hc", p.ref.empty() ? "interaction" : p.ref);
      bind_into(*p.sub, m, c, true, particle_ref, out, strict);
      continue;
    }
    if (p.op == "kron") {
      if (!particle_ref.empty()) throw ValidationError("kron nested inside kron", p.ref);
      const DataArray& a = m.array(p.ref, p.ref);
      if (a.vector || a.values.rows() != m.L || a.values.cols() != m.L)
        throw ValidationError("particle factor must be an L x L matrix with L = " + std::to_string(m.L), p.ref);
      bind_into(*p.sub, m, c, closure, p.ref, out, strict);
      continue;
    }
    Term t;
    t.kind = primitive_kind(p.op);
    t.ref = p.ref;
    t.particle_ref = particle_ref;
    t.scalar = c;
    t.closure = closure;
    t.fock.kind = t.kind;
    if (!particle_ref.empty()) t.particle = m.data.at(particle_ref).values;
    if (!p.ref.empty()) {
      const DataArray& a = m.array(p.ref, p.ref);
      switch (t.kind) {
        case FockKind::Create:
        case FockKind::Annihilate:
          if (!a.vector || a.size() != m.d)
            throw ValidationError("expected a vector of length d = " + std::to_string(m.d), p.ref);
          t.fock.vec = a.as_vector();
          break;
        case FockKind::Cubic3Create:
          if (m.d != 1) throw ValidationError("cubic3 requires d = 1", p.ref);
          if (a.size() != 1) throw ValidationError("cubic3 expects a single coefficient", p.ref);
          t.fock.scalar = a.values.raw()[0];
          break;
        default:
          if (a.vector || a.values.rows() != m.d || a.values.cols() != m.d)
            throw ValidationError("expected a d x d matrix with d = " + std::to_string(m.d), p.ref);
          t.fock.mat = a.values;
          break;
      }
      if (p.op == "dGamma" && !a.values.is_hermitian(kSymmetryTol))
        throw ValidationError("dGamma requires a Hermitian matrix", p.ref);
      if (t.kind == FockKind::Quartic) {
        const CMatrix& w = a.values;
        for (std::size_t i = 0; i < w.rows(); ++i)
          for (std::size_t j = 0; j < w.cols(); ++j)
            if (w(i, j).imag() != 0.0 || std::abs(w(i, j) - w(j, i)) > kSymmetryTol)
              throw ValidationError("quartic kernel must be real symmetric (entry " + std::to_string(i) + "," +
                                        std::to_string(j) + ")",
                                    p.ref);
      }
    }
    // outside hc every term must be self-adjoint on its own
    if (!closure && strict) {
      const std::string where = p.ref.empty() ? (particle_ref.empty() ? std::string("interaction") : particle_ref) : p.ref;
      if (!is_self_adjoint_kind(t.kind))
        throw ValidationError(p.op + " is not self-adjoint; wrap it in hc(...)", where);
      if (c.imag() != 0.0) throw ValidationError("complex scalar on a term outside hc", where);
      if (t.kind == FockKind::Quad && !t.fock.mat.is_hermitian(kSymmetryTol)) {
        const CMatrix& mm = t.fock.mat;
        for (std::size_t i = 0; i < mm.rows(); ++i)
          for (std::size_t j = i; j < mm.cols(); ++j)
            if (std::abs(mm(i, j) - std::conj(mm(j, i))) > kSymmetryTol)
              throw ValidationError("matrix is not Hermitian (entry " + std::to_string(i) + "," + std::to_string(j) +
                                        ")",
                                    p.ref);
      }
      if (!particle_ref.empty() && !t.particle.is_hermitian(kSymmetryTol))
        throw ValidationError("particle factor is not Hermitian", particle_ref);
    }
    out.push_back(std::move(t));
  }
}

}  // namespace detail

/// Parses the interaction, resolves every reference and checks shapes and symmetries.
/// Fills model.terms, model.M1 and model.M2. Errors name the offending field.
inline void bind_model(ModelSpec& m) {
  if (m.L == 0) throw ValidationError("must be positive", "L");
  if (m.d == 0) throw ValidationError("must be positive", "d");
  for (const auto& [name, a] : m.data) {
    for (const auto& z : a.values.raw())
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ValidationError("non-finite entry", name);
  }
  if (!m.h01.empty()) {
    const DataArray& a = m.array(m.h01, "h01");
    if (a.vector || a.values.rows() != m.L || a.values.cols() != m.L)
      throw ValidationError("expected an L x L matrix with L = " + std::to_string(m.L), m.h01);
    if (!a.values.is_hermitian(detail::kSymmetryTol)) throw ValidationError("matrix is not Hermitian", m.h01);
  }
  if (m.h02.empty()) throw ValidationError("missing", "h02");
  {
    const DataArray& a = m.array(m.h02, "h02");
    if (a.vector || a.values.rows() != m.d || a.values.cols() != m.d)
      throw ValidationError("expected a d x d matrix with d = " + std::to_string(m.d), m.h02);
    if (!a.values.is_hermitian(detail::kSymmetryTol)) throw ValidationError("matrix is not Hermitian", m.h02);
    if (a.values.max_abs() > 0.0 && eigvalsh(a.values).front() < -1e-10 * std::max(1.0, a.values.max_abs()))
      throw ValidationError("one-particle Hamiltonian must be positive semi-definite", m.h02);
  }
  m.terms.clear();
  std::string text = m.interaction;
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
    const Expr e = parse_expression(text);
    detail::bind_into(e, m, 1.0, false, {}, m.terms);
  }
  const LowerBounds lb = lower_bounds(m);
  m.M1 = lb.M1;
  m.M2 = lb.M2;
}

// ---------------------------------------------------------------------------------------------
// compilation

/// Operator of a single bound term, including its adjoint when the term is closed by hc.
inline BlockBandedOperator compile_term(const SpacePtr& space, std::size_t L, const Term& t) {
  CMatrix particle = t.particle;
  if (particle.empty() && L > 1) particle = CMatrix::identity(L);
  BlockBandedOperator op = fock_operator(space, t.fock, particle);
  if (t.scalar != Complex(1.0)) op = scale(t.scalar, op);
  if (t.closure) op = add(op, adjoint(op));
  return op;
}

struct CompiledModel {
  BlockBandedOperator H0;
  BlockBandedOperator HI;
  BlockBandedOperator Hdiag;
  BlockBandedOperator H2;
  std::vector<std::string> warnings;
};

inline std::size_t interaction_bandwidth(const ModelSpec& m) {
  std::size_t b = 0;
  for (const auto& t : m.terms) b = std::max<std::size_t>(b, static_cast<std::size_t>(std::abs(sector_shift(t.kind))));
  return b;
}

/// H0 = H01 (x) 1 + 1 (x) dGamma(h02); HI from the bound terms; Hdiag and H2 its band-0 and
/// off-diagonal parts, so Hdiag + H2 = HI exactly.
inline CompiledModel compile(const ModelSpec& m, const SpacePtr& space) {
  if (space->modes() != m.d)
    throw SpaceMismatch("model has d = " + std::to_string(m.d) + ", space has " + std::to_string(space->modes()) +
                        " modes");
  const std::size_t L = m.L;
  BlockBandedOperator h0 = kron_particle(CMatrix::identity(L), second_quantization(space, m.h02_matrix()));
  const CMatrix h01 = m.h01_matrix();
  if (h01.max_abs() > 0.0) h0 = add(h0, kron_particle(h01, identity_operator(space)));
  h0.set_hermitian(true);

  const std::size_t bw = interaction_bandwidth(m);
  BlockBandedOperator hi(space, L, bw, true);
  for (const auto& t : m.terms) {
    const BlockBandedOperator op = compile_term(space, L, t);
    for (const auto& [key, b] : op.blocks()) hi.add_block(key.first, key.second, b);
  }
  CompiledModel r{h0, hi, diagonal_part(hi), off_diagonal_part(hi), {}};
  if (bw > 0 && space->n_max() < bw)
    r.warnings.push_back("cutoff " + std::to_string(space->n_max()) + " is below the interaction bandwidth " +
                         std::to_string(bw) + "; no off-diagonal band fits");
  return r;
}

/// Compiles a bare expression against the model's data without the self-adjointness rules.
/// Used for cross-checks of individual primitives.
inline BlockBandedOperator compile_expression(const std::string& text, const ModelSpec& m, const SpacePtr& space) {
  std::vector<Term> terms;
  detail::bind_into(parse_expression(text), m, 1.0, false, {}, terms, false);
  std::size_t bw = 0;
  for (const auto& t : terms) bw = std::max<std::size_t>(bw, static_cast<std::size_t>(std::abs(sector_shift(t.kind))));
  BlockBandedOperator r(space, m.L, bw, false);
  for (const auto& t : terms) {
    const BlockBandedOperator op = compile_term(space, m.L, t);
    for (const auto& [key, b] : op.blocks()) r.add_block(key.first, key.second, b);
  }
  return r;
}

// ---------------------------------------------------------------------------------------------
// JSON documents

inline constexpr const char* kModelFormatTag = "fockbench-model-v1";

inline nlohmann::json array_to_json(const DataArray& a) {
  nlohmann::json j;
  if (a.vector) j["shape"] = {a.values.rows()};
  else j["shape"] = {a.values.rows(), a.values.cols()};
  nlohmann::json vals = nlohmann::json::array();
  for (const auto& z : a.values.raw()) vals.push_back({z.real(), z.imag()});
  j["values"] = std::move(vals);
  return j;
}

inline DataArray array_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("values"))
    throw ValidationError("array needs 'shape' and 'values'", field);
  const auto& shape = j.at("shape");
  if (!shape.is_array() || shape.empty() || shape.size() > 2) throw ValidationError("shape must have 1 or 2 entries", field);
  for (const auto& s : shape)
    if (!s.is_number_integer() || s.get<long long>() < 0)
      throw ValidationError("shape entries must be non-negative integers", field);
  const std::size_t r = shape[0].get<std::size_t>();
  const std::size_t c = shape.size() == 2 ? shape[1].get<std::size_t>() : 1;
  const auto& vals = j.at("values");
  if (!vals.is_array() || vals.size() != r * c)
    throw ValidationError("expected " + std::to_string(r * c) + " values, found " +
                              std::to_string(vals.is_array() ? vals.size() : 0),
                          field);
  DataArray a;
  a.vector = shape.size() == 1;
  a.values = CMatrix(r, c);
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const auto& z = vals[k];
    if (z.is_number()) {
      a.values.raw()[k] = z.get<double>();
    } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
      a.values.raw()[k] = Complex(z[0].get<double>(), z[1].get<double>());
    } else {
      throw ValidationError("value " + std::to_string(k) + " is not a number or [re, im] pair", field);
    }
  }
  return a;
}

inline nlohmann::json model_to_json(const ModelSpec& m) {
  nlohmann::json j;
  j["format"] = kModelFormatTag;
  j["name"] = m.name;
  if (!m.family.empty()) j["family"] = m.family;
  j["L"] = m.L;
  j["d"] = m.d;
  nlohmann::json data = nlohmann::json::object();
  for (const auto& [k, v] : m.data) data[k] = array_to_json(v);
  j["data"] = std::move(data);
  if (m.h01.empty()) j["h01"] = nullptr;
  else j["h01"] = m.h01;
  j["h02"] = m.h02;
  j["interaction"] = m.interaction;
  if (!m.parameters.empty()) j["parameters"] = m.parameters;
  return j;
}

/// Loads and binds a model document. Every error names the offending field.
inline ModelSpec load_model_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("model document must be a JSON object");
  if (j.contains("format") && j.at("format") != kModelFormatTag)
    throw ValidationError("unsupported format tag", "format");
  auto get_size = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long long>() <= 0)
      throw ValidationError("must be a positive integer", key);
    return j.at(key).get<std::size_t>();
  };
  ModelSpec m;
  if (!j.contains("name") || !j.at("name").is_string()) throw ValidationError("must be a string", "name");
  m.name = j.at("name").get<std::string>();
  if (j.contains("family")) {
    if (!j.at("family").is_string()) throw ValidationError("must be a string", "family");
    m.family = j.at("family").get<std::string>();
  }
  m.L = get_size("L");
  m.d = get_size("d");
  if (!j.contains("data") || !j.at("data").is_object()) throw ValidationError("must be an object", "data");
  for (const auto& [k, v] : j.at("data").items()) m.data[k] = array_from_json(v, k);
  if (j.contains("h01") && !j.at("h01").is_null()) {
    if (!j.at("h01").is_string()) throw ValidationError("must be a reference name or null", "h01");
    m.h01 = j.at("h01").get<std::string>();
  }
  if (!j.contains("h02") || !j.at("h02").is_string()) throw ValidationError("must be a reference name", "h02");
  m.h02 = j.at("h02").get<std::string>();
  if (j.contains("interaction")) {
    if (!j.at("interaction").is_string()) throw ValidationError("must be an expression string", "interaction");
    m.interaction = j.at("interaction").get<std::string>();
  }
  if (j.contains("parameters")) {
    if (!j.at("parameters").is_object()) throw ValidationError("must be an object of numbers", "parameters");
    for (const auto& [k, v] : j.at("parameters").items()) {
      if (!v.is_number()) throw ValidationError("must be a number", "parameters." + k);
      m.parameters[k] = v.get<double>();
    }
  }
  for (const auto& [k, v] : j.items()) {
    static const char* known[] = {"format", "name", "family", "L", "d", "data", "h01", "h02", "interaction", "parameters"};
    if (std::find(std::begin(known), std::end(known), k) == std::end(known))
      throw ValidationError("unknown field", k);
  }
  bind_model(m);
  return m;
}

inline ModelSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file '" + path + "'", "model");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what(), "model");
  }
  return load_model_json(j);
}

}  // namespace fockbench
