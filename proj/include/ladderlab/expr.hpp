#pragma once

// Symbolic expression core.
//
// A tiny immutable AST over one spatial variable `x` and named scalar
// parameters.  Nodes: Constant, Var, Param, Sum, Product, Power, Exp, Sin,
// Cos, Neg.  Construction normalizes: sums/products are flattened, constants
// folded, Neg pulled out of products.  No trigonometric or exponential
// rewriting is ever attempted; expression equivalence is decided numerically
// by approx_equal on randomized sample points (deterministic under a fixed
// seed).
//
// The parameter name "ENERGY" is reserved: it stands for the eigenvalue slot
// of a Hamiltonian acting on the state an operator is applied to.  Plain
// expression evaluation treats it like any other parameter; the operator
// layer (diffop.hpp) enforces that it is bound before an operator is applied
// to a concrete function.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ladderlab {

inline constexpr const char* kEnergyParam = "ENERGY";

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& what, double at)
      : std::runtime_error(what), at_(at) {}
  double at() const { return at_; }

 private:
  double at_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class BindingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Name -> value map for parameters.  Rejects duplicate names so a binding can
// never silently shadow an earlier value.
class ParamBinding {
 public:
  ParamBinding() = default;

  ParamBinding& set(const std::string& name, double value) {
    auto [it, inserted] = values_.emplace(name, value);
    (void)it;
    if (!inserted)
      throw BindingError("duplicate parameter binding '" + name + "'");
    return *this;
  }

  bool has(const std::string& name) const { return values_.count(name) != 0; }

  std::optional<double> lookup(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  double at(const std::string& name) const {
    auto v = lookup(name);
    if (!v) throw BindingError("parameter '" + name + "' is not bound");
    return *v;
  }

  double get_or(const std::string& name, double fallback) const {
    auto v = lookup(name);
    return v ? *v : fallback;
  }

  ParamBinding with(const std::string& name, double value) const {
    ParamBinding out = *this;
    out.set(name, value);
    return out;
  }

  const std::map<std::string, double>& entries() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

enum class ExprKind { Constant, Var, Param, Sum, Product, Power, Exp, Sin, Cos, Neg };

class Expr;
Expr constant(double v);
Expr var();
Expr param(const std::string& name);
Expr sum(std::vector<Expr> kids);
Expr product(std::vector<Expr> kids);
Expr power(const Expr& base, const Expr& exponent);
Expr exp_(const Expr& e);
Expr sin_(const Expr& e);
Expr cos_(const Expr& e);
Expr neg(const Expr& e);

class Expr {
 public:
  // Default-constructs the constant 0.
  Expr() : Expr(make_constant(0.0)) {}

  ExprKind kind() const { return node_->kind; }
  double constant_value() const { return node_->value; }
  const std::string& param_name() const { return node_->name; }
  const std::vector<Expr>& operands() const { return node_->kids; }

  bool is_constant() const { return node_->kind == ExprKind::Constant; }
  bool is_constant(double v) const { return is_constant() && node_->value == v; }

  bool depends_on_var() const {
    if (node_->kind == ExprKind::Var) return true;
    for (const auto& k : node_->kids)
      if (k.depends_on_var()) return true;
    return false;
  }

  bool depends_on_param(const std::string& name) const {
    if (node_->kind == ExprKind::Param && node_->name == name) return true;
    for (const auto& k : node_->kids)
      if (k.depends_on_param(name)) return true;
    return false;
  }

  bool same_structure(const Expr& o) const {
    if (node_ == o.node_) return true;
    if (node_->kind != o.node_->kind) return false;
    switch (node_->kind) {
      case ExprKind::Constant:
        return node_->value == o.node_->value;
      case ExprKind::Var:
        return true;
      case ExprKind::Param:
        return node_->name == o.node_->name;
      default: {
        if (node_->kids.size() != o.node_->kids.size()) return false;
        for (std::size_t i = 0; i < node_->kids.size(); ++i)
          if (!node_->kids[i].same_structure(o.node_->kids[i])) return false;
        return true;
      }
    }
  }

  double eval(double x) const { return eval(x, ParamBinding{}); }

  double eval(double x, const ParamBinding& binding) const {
    switch (node_->kind) {
      case ExprKind::Constant:
        return node_->value;
      case ExprKind::Var:
        return x;
      case ExprKind::Param: {
        auto v = binding.lookup(node_->name);
        if (!v) throw EvalError("unbound parameter '" + node_->name + "'", x);
        return *v;
      }
      case ExprKind::Sum: {
        double s = 0;
        for (const auto& k : node_->kids) s += k.eval(x, binding);
        return s;
      }
      case ExprKind::Product: {
        double p = 1;
        for (const auto& k : node_->kids) p *= k.eval(x, binding);
        return p;
      }
      case ExprKind::Power: {
        double b = node_->kids[0].eval(x, binding);
        double e = node_->kids[1].eval(x, binding);
        return eval_pow(b, e, x);
      }
      case ExprKind::Exp:
        return std::exp(node_->kids[0].eval(x, binding));
      case ExprKind::Sin:
        return std::sin(node_->kids[0].eval(x, binding));
      case ExprKind::Cos:
        return std::cos(node_->kids[0].eval(x, binding));
      case ExprKind::Neg:
        return -node_->kids[0].eval(x, binding);
    }
    throw ExprError("corrupt expression node");
  }

  Expr diff() const {
    switch (node_->kind) {
      case ExprKind::Constant:
      case ExprKind::Param:
        return constant(0.0);
      case ExprKind::Var:
        return constant(1.0);
      case ExprKind::Sum: {
        std::vector<Expr> out;
        out.reserve(node_->kids.size());
        for (const auto& k : node_->kids) out.push_back(k.diff());
        return sum(std::move(out));
      }
      case ExprKind::Product: {
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < node_->kids.size(); ++i) {
          std::vector<Expr> factors;
          factors.reserve(node_->kids.size());
          for (std::size_t j = 0; j < node_->kids.size(); ++j)
            factors.push_back(j == i ? node_->kids[j].diff() : node_->kids[j]);
          terms.push_back(product(std::move(factors)));
        }
        return sum(std::move(terms));
      }
      case ExprKind::Power: {
        // Exponent is Var-free by construction, so d/dx b^s = s*b^(s-1)*b'.
        const Expr& b = node_->kids[0];
        const Expr& s = node_->kids[1];
        Expr sm1 = s.is_constant() ? constant(s.constant_value() - 1.0)
                                   : sum({s, constant(-1.0)});
        return product({s, power(b, sm1), b.diff()});
      }
      case ExprKind::Exp:
        return product({node_->kids[0].diff(), exp_(node_->kids[0])});
      case ExprKind::Sin:
        return product({node_->kids[0].diff(), cos_(node_->kids[0])});
      case ExprKind::Cos:
        return neg(product({node_->kids[0].diff(), sin_(node_->kids[0])}));
      case ExprKind::Neg:
        return neg(node_->kids[0].diff());
    }
    throw ExprError("corrupt expression node");
  }

  Expr substitute_param(const std::string& name, const Expr& replacement) const {
    switch (node_->kind) {
      case ExprKind::Constant:
      case ExprKind::Var:
        return *this;
      case ExprKind::Param:
        return node_->name == name ? replacement : *this;
      case ExprKind::Sum:
      case ExprKind::Product: {
        std::vector<Expr> out;
        out.reserve(node_->kids.size());
        for (const auto& k : node_->kids)
          out.push_back(k.substitute_param(name, replacement));
        return node_->kind == ExprKind::Sum ? sum(std::move(out))
                                            : product(std::move(out));
      }
      case ExprKind::Power:
        return power(node_->kids[0].substitute_param(name, replacement),
                     node_->kids[1].substitute_param(name, replacement));
      case ExprKind::Exp:
        return exp_(node_->kids[0].substitute_param(name, replacement));
      case ExprKind::Sin:
        return sin_(node_->kids[0].substitute_param(name, replacement));
      case ExprKind::Cos:
        return cos_(node_->kids[0].substitute_param(name, replacement));
      case ExprKind::Neg:
        return neg(node_->kids[0].substitute_param(name, replacement));
    }
    throw ExprError("corrupt expression node");
  }

  std::string str() const {
    std::string out;
    print(out, 0);
    return out;
  }

  friend Expr constant(double v);
  friend Expr var();
  friend Expr param(const std::string& name);
  friend Expr sum(std::vector<Expr> kids);
  friend Expr product(std::vector<Expr> kids);
  friend Expr power(const Expr& base, const Expr& exponent);
  friend Expr exp_(const Expr& e);
  friend Expr sin_(const Expr& e);
  friend Expr cos_(const Expr& e);
  friend Expr neg(const Expr& e);

 private:
  struct Node {
    ExprKind kind;
    double value = 0.0;
    std::string name;
    std::vector<Expr> kids;
  };

  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Expr make_constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Constant;
    n->value = v;
    return Expr(std::move(n));
  }
  static Expr make_node(ExprKind k, std::vector<Expr> kids,
                        const std::string& name = {}) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->kids = std::move(kids);
    n->name = name;
    return Expr(std::move(n));
  }

  static double eval_pow(double b, double e, double x) {
    if (b == 0.0) {
      if (e > 0) return 0.0;
      if (e == 0) return 1.0;
      throw EvalError("zero raised to non-positive power", x);
    }
    if (b < 0) {
      double r = std::nearbyint(e);
      if (std::abs(e - r) > 1e-9)
        throw EvalError("negative base with non-integer exponent", x);
      return std::pow(b, r);
    }
    return std::pow(b, e);
  }

  static std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }

  // Precedence levels: 0 = sum context, 1 = product context, 2 = power
  // context, 3 = atom context (power base/exponent).  A node parenthesizes
  // itself when its own level is below the context's.
  void print(std::string& out, int context) const {
    switch (node_->kind) {
      case ExprKind::Constant: {
        std::string t = format_double(node_->value);
        bool negative = !t.empty() && t[0] == '-';
        bool parens = negative ? context >= 1 : false;
        if (parens) out += '(';
        out += t;
        if (parens) out += ')';
        return;
      }
      case ExprKind::Var:
        out += 'x';
        return;
      case ExprKind::Param:
        out += node_->name;
        return;
      case ExprKind::Sum: {
        bool parens = context >= 1;
        if (parens) out += '(';
        for (std::size_t i = 0; i < node_->kids.size(); ++i) {
          const Expr& k = node_->kids[i];
          if (i == 0) {
            k.print(out, 0);
          } else if (k.kind() == ExprKind::Neg) {
            out += " - ";
            k.operands()[0].print(out, 1);
          } else if (k.kind() == ExprKind::Constant && k.constant_value() < 0) {
            out += " - ";
            out += format_double(-k.constant_value());
          } else {
            out += " + ";
            k.print(out, 1);
          }
        }
        if (parens) out += ')';
        return;
      }
      case ExprKind::Product: {
        bool parens = context >= 2;
        if (parens) out += '(';
        for (std::size_t i = 0; i < node_->kids.size(); ++i) {
          if (i) out += '*';
          node_->kids[i].print(out, 1);
        }
        if (parens) out += ')';
        return;
      }
      case ExprKind::Power: {
        bool parens = context >= 3;
        if (parens) out += '(';
        node_->kids[0].print(out, 3);
        out += '^';
        node_->kids[1].print(out, 3);
        if (parens) out += ')';
        return;
      }
      case ExprKind::Exp:
      case ExprKind::Sin:
      case ExprKind::Cos: {
        out += node_->kind == ExprKind::Exp   ? "exp"
               : node_->kind == ExprKind::Sin ? "sin"
                                              : "cos";
        out += '(';
        node_->kids[0].print(out, 0);
        out += ')';
        return;
      }
      case ExprKind::Neg: {
        bool parens = context >= 1;
        if (parens) out += '(';
        out += '-';
        node_->kids[0].print(out, 1);
        if (parens) out += ')';
        return;
      }
    }
  }

  std::shared_ptr<const Node> node_;
};

inline Expr constant(double v) { return Expr::make_constant(v); }
inline Expr var() { return Expr::make_node(ExprKind::Var, {}); }

inline Expr param(const std::string& name) {
  if (name.empty()) throw ExprError("empty parameter name");
  if (name == "x") throw ExprError("'x' is the spatial variable, not a parameter");
  return Expr::make_node(ExprKind::Param, {}, name);
}

inline Expr sum(std::vector<Expr> kids) {
  std::vector<Expr> flat;
  double c = 0.0;
  auto absorb = [&](auto&& self, const Expr& e) -> void {
    if (e.kind() == ExprKind::Sum) {
      for (const auto& k : e.operands()) self(self, k);
    } else if (e.is_constant()) {
      c += e.constant_value();
    } else {
      flat.push_back(e);
    }
  };
  for (const auto& k : kids) absorb(absorb, k);
  if (c != 0.0 || flat.empty()) flat.insert(flat.begin(), constant(c));
  if (flat.size() == 1) return flat[0];
  return Expr::make_node(ExprKind::Sum, std::move(flat));
}

inline Expr neg(const Expr& e) {
  if (e.is_constant()) return constant(-e.constant_value());
  if (e.kind() == ExprKind::Neg) return e.operands()[0];
  return Expr::make_node(ExprKind::Neg, {e});
}

inline Expr product(std::vector<Expr> kids) {
  std::vector<Expr> flat;
  double c = 1.0;
  bool flip = false;
  auto absorb = [&](auto&& self, const Expr& e) -> void {
    if (e.kind() == ExprKind::Product) {
      for (const auto& k : e.operands()) self(self, k);
    } else if (e.kind() == ExprKind::Neg) {
      flip = !flip;
      self(self, e.operands()[0]);
    } else if (e.is_constant()) {
      c *= e.constant_value();
    } else {
      flat.push_back(e);
    }
  };
  for (const auto& k : kids) absorb(absorb, k);
  if (c < 0) {
    flip = !flip;
    c = -c;
  }
  if (c == 0.0) return constant(0.0);
  if (c != 1.0 || flat.empty()) flat.insert(flat.begin(), constant(c));
  Expr out = flat.size() == 1 ? flat[0]
                              : Expr::make_node(ExprKind::Product, std::move(flat));
  return flip ? neg(out) : out;
}

inline Expr power(const Expr& base, const Expr& exponent) {
  if (exponent.depends_on_var())
    throw ExprError("power exponent must not contain the variable x");
  if (exponent.is_constant()) {
    double e = exponent.constant_value();
    if (e == 1.0) return base;
    if (e == 0.0) return constant(1.0);
    if (base.is_constant()) {
      double b = base.constant_value();
      bool ok = b > 0 || (b != 0 && std::abs(e - std::nearbyint(e)) <= 1e-9) ||
                (b == 0 && e > 0);
      if (ok) {
        double v = b == 0 ? 0.0 : std::pow(b, b < 0 ? std::nearbyint(e) : e);
        return constant(v);
      }
    }
  }
  return Expr::make_node(ExprKind::Power, {base, exponent});
}

inline Expr exp_(const Expr& e) {
  if (e.is_constant()) return constant(std::exp(e.constant_value()));
  return Expr::make_node(ExprKind::Exp, {e});
}
inline Expr sin_(const Expr& e) {
  if (e.is_constant()) return constant(std::sin(e.constant_value()));
  return Expr::make_node(ExprKind::Sin, {e});
}
inline Expr cos_(const Expr& e) {
  if (e.is_constant()) return constant(std::cos(e.constant_value()));
  return Expr::make_node(ExprKind::Cos, {e});
}

inline Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) { return sum({a, neg(b)}); }
inline Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) {
  return product({a, power(b, constant(-1.0))});
}
inline Expr operator-(const Expr& a) { return neg(a); }
inline Expr operator+(double a, const Expr& b) { return constant(a) + b; }
inline Expr operator+(const Expr& a, double b) { return a + constant(b); }
inline Expr operator-(double a, const Expr& b) { return constant(a) - b; }
inline Expr operator-(const Expr& a, double b) { return a - constant(b); }
inline Expr operator*(double a, const Expr& b) { return constant(a) * b; }
inline Expr operator*(const Expr& a, double b) { return a * constant(b); }
inline Expr operator/(double a, const Expr& b) { return constant(a) / b; }
inline Expr operator/(const Expr& a, double b) { return a / constant(b); }

inline Expr sqrt_(const Expr& e) { return power(e, constant(0.5)); }

// ---------------------------------------------------------------------------
// Parser.  Grammar:
//   expr   := ('+'|'-')? term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' atom)?
//   atom   := number | ident | '(' expr ')' | ident '(' expr ')'
// Functions: exp, sin, cos.  The identifier "x" is the variable; every other
// identifier is a parameter.  Whitespace is insignificant.  Numbers are
// unsigned decimals with optional fractional part and exponent; a leading
// sign is handled by the unary rule at expression level.  Division builds
// Product(a, Power(b, -1)); subtraction builds Sum(a, Neg(b)).
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr run() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r'))
      ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) throw ParseError(std::string("expected ") + what, pos_);
  }

  Expr parse_expr() {
    skip_ws();
    bool negate = false;
    if (accept('-'))
      negate = true;
    else
      accept('+');
    Expr acc = parse_term();
    if (negate) acc = neg(acc);
    for (;;) {
      if (accept('+')) {
        acc = acc + parse_term();
      } else if (accept('-')) {
        acc = acc - parse_term();
      } else {
        return acc;
      }
    }
  }

  Expr parse_term() {
    Expr acc = parse_factor();
    for (;;) {
      if (accept('*')) {
        acc = acc * parse_factor();
      } else if (accept('/')) {
        acc = acc / parse_factor();
      } else {
        return acc;
      }
    }
  }

  Expr parse_factor() {
    Expr base = parse_atom();
    if (accept('^')) {
      std::size_t at = pos_;
      Expr expo = parse_atom();
      if (expo.depends_on_var())
        throw ParseError("power exponent must not contain x", at);
      return power(base, expo);
    }
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')', "')'");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_')
      return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
    }
    if (pos_ == start ||
        (pos_ == start + 1 && text_[start] == '.'))
      throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9')
          ++pos_;
      } else {
        pos_ = mark;  // not an exponent; leave 'e' for the caller (error later)
      }
    }
    std::string token(text_.substr(start, pos_ - start));
    return constant(std::strtod(token.c_str(), nullptr));
  }

  Expr parse_ident() {
    std::size_t start = pos_;
    auto ident_char = [](char c) {
      return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
             (c >= '0' && c <= '9') || c == '_';
    };
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (name == "exp" || name == "sin" || name == "cos") {
      expect('(', "'(' after function name");
      Expr arg = parse_expr();
      expect(')', "')'");
      return name == "exp" ? exp_(arg) : name == "sin" ? sin_(arg) : cos_(arg);
    }
    if (name == "x") return var();
    return param(name);
  }
};

}  // namespace detail

inline Expr parse(std::string_view text) { return detail::Parser(text).run(); }

// ---------------------------------------------------------------------------
// Numeric expression comparison on randomized sample points.
// ---------------------------------------------------------------------------

struct Interval {
  double a;
  double b;
};

struct ExcludedPoint {
  double center;
  double radius;
};

struct SampleSpec {
  Interval domain{-1.0, 1.0};
  std::vector<ExcludedPoint> exclude{};
  int samples = 50;
  double tol = 1e-10;
  std::uint64_t seed = 0;
};

struct PointIssue {
  double x;
  std::string what;
};

struct ApproxReport {
  bool equal = false;
  double max_residual = 0.0;   // max of |v1-v2| / (1 + max(|v1|,|v2|))
  double worst_x = 0.0;
  int conclusive = 0;
  std::vector<PointIssue> inconclusive{};
  explicit operator bool() const { return equal; }
};

namespace detail {

// Minimal deterministic xorshift-style generator.  Not std::mt19937 because
// uniform_real_distribution is implementation-defined and the library
// promises byte-identical behaviour for a fixed seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

 private:
  std::uint64_t state_;
};

}  // namespace detail

inline ApproxReport approx_equal(const Expr& e1, const Expr& e2,
                                 const SampleSpec& spec,
                                 const ParamBinding& binding = {}) {
  detail::SplitMix64 rng(spec.seed);
  ApproxReport rep;
  rep.worst_x = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < spec.samples; ++i) {
    double x = 0;
    bool found = false;
    for (int tries = 0; tries < 64 && !found; ++tries) {
      x = rng.uniform(spec.domain.a, spec.domain.b);
      found = true;
      for (const auto& ex : spec.exclude)
        if (std::abs(x - ex.center) < ex.radius) found = false;
    }
    if (!found) {
      rep.inconclusive.push_back({x, "no sample point outside excluded regions"});
      continue;
    }
    double v1, v2;
    try {
      v1 = e1.eval(x, binding);
      v2 = e2.eval(x, binding);
    } catch (const EvalError& err) {
      rep.inconclusive.push_back({x, err.what()});
      continue;
    }
    if (!std::isfinite(v1) || !std::isfinite(v2)) {
      rep.inconclusive.push_back({x, "non-finite value"});
      continue;
    }
    ++rep.conclusive;
    double scale = 1.0 + std::max(std::abs(v1), std::abs(v2));
    double resid = std::abs(v1 - v2) / scale;
    if (resid > rep.max_residual || rep.conclusive == 1) {
      rep.max_residual = resid;
      rep.worst_x = x;
    }
  }
  rep.equal = rep.conclusive > 0 && rep.max_residual <= spec.tol;
  return rep;
}

}  // namespace ladderlab
