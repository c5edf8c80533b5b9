#pragma once

// Linear ordinary differential operators with symbolic coefficients:
//     A = sum_k  c_k(x) * D^k,          D = d/dx.
//
// Supported algebra: addition, left multiplication by an expression or
// scalar, operator composition (Leibniz rule), and commutators.  Operators
// whose coefficients contain the reserved parameter ENERGY describe maps
// whose action depends on the eigenvalue of the state they are applied to;
// such operators must have ENERGY bound (bind_energy or substitute_param)
// before being applied to a concrete function.

#include "ladderlab/expr.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ladderlab {

class DiffOp {
 public:
  // Zero operator.
  DiffOp() = default;

  // coeffs[k] multiplies D^k.
  explicit DiffOp(std::vector<Expr> coeffs) : c_(std::move(coeffs)) { trim(); }

  static DiffOp multiplication(const Expr& f) { return DiffOp({f}); }

  static DiffOp derivative(int k = 1) {
    if (k < 0) throw ExprError("derivative order must be non-negative");
    std::vector<Expr> c(static_cast<std::size_t>(k) + 1, constant(0.0));
    c.back() = constant(1.0);
    return DiffOp(std::move(c));
  }

  // Highest retained derivative order; -1 for the zero operator.
  int order() const { return static_cast<int>(c_.size()) - 1; }

  const Expr& coeff(int k) const {
    static const Expr zero = constant(0.0);
    if (k < 0 || k >= static_cast<int>(c_.size())) return zero;
    return c_[static_cast<std::size_t>(k)];
  }

  bool is_structurally_zero() const { return c_.empty(); }

  bool depends_on_energy() const {
    for (const auto& e : c_)
      if (e.depends_on_param(kEnergyParam)) return true;
    return false;
  }

  // (A f)(x), with f and the result as expressions.
  Expr apply(const Expr& f) const {
    if (depends_on_energy())
      throw BindingError(
          "operator depends on ENERGY; bind it before applying to a function");
    std::vector<Expr> terms;
    Expr fk = f;
    for (std::size_t k = 0; k < c_.size(); ++k) {
      if (k > 0) fk = fk.diff();
      if (!c_[k].is_constant(0.0)) terms.push_back(c_[k] * fk);
    }
    return sum(std::move(terms));
  }

  DiffOp bind_energy(double e) const {
    return substitute_param(kEnergyParam, constant(e));
  }

  DiffOp substitute_param(const std::string& name, const Expr& replacement) const {
    std::vector<Expr> out;
    out.reserve(c_.size());
    for (const auto& e : c_) out.push_back(e.substitute_param(name, replacement));
    return DiffOp(std::move(out));
  }

  std::string str() const {
    if (c_.empty()) return "0";
    std::string out;
    for (int k = order(); k >= 0; --k) {
      const Expr& e = c_[static_cast<std::size_t>(k)];
      if (e.is_constant(0.0)) continue;
      if (!out.empty()) out += " + ";
      out += '(';
      out += e.str();
      out += ')';
      if (k == 1)
        out += "*D";
      else if (k > 1)
        out += "*D^" + std::to_string(k);
    }
    return out.empty() ? "0" : out;
  }

  friend DiffOp operator+(const DiffOp& a, const DiffOp& b) {
    std::vector<Expr> out(std::max(a.c_.size(), b.c_.size()), constant(0.0));
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] = a.coeff(static_cast<int>(k)) + b.coeff(static_cast<int>(k));
    return DiffOp(std::move(out));
  }

  friend DiffOp operator-(const DiffOp& a, const DiffOp& b) { return a + (-b); }

  friend DiffOp operator-(const DiffOp& a) {
    std::vector<Expr> out;
    out.reserve(a.c_.size());
    for (const auto& e : a.c_) out.push_back(neg(e));
    return DiffOp(std::move(out));
  }

  // Left multiplication by a function (or scalar): (f*A) g = f * (A g).
  friend DiffOp operator*(const Expr& f, const DiffOp& a) {
    std::vector<Expr> out;
    out.reserve(a.c_.size());
    for (const auto& e : a.c_) out.push_back(f * e);
    return DiffOp(std::move(out));
  }
  friend DiffOp operator*(double s, const DiffOp& a) { return constant(s) * a; }

  // Operator composition: (compose(A, B)) f = A (B f).
  friend DiffOp compose(const DiffOp& a, const DiffOp& b) {
    if (a.c_.empty() || b.c_.empty()) return DiffOp();
    std::vector<Expr> out(a.c_.size() + b.c_.size() - 1, constant(0.0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      if (a.c_[i].is_constant(0.0)) continue;
      for (std::size_t j = 0; j < b.c_.size(); ++j) {
        if (b.c_[j].is_constant(0.0)) continue;
        // D^i (b_j g^(j)) = sum_m C(i,m) b_j^(i-m) g^(j+m)
        Expr bd = b.c_[j];
        std::vector<Expr> derivs{bd};  // derivs[d] = b_j^(d)
        for (std::size_t d = 1; d <= i; ++d) {
          bd = bd.diff();
          derivs.push_back(bd);
        }
        double binom = 1.0;
        for (std::size_t m = 0; m <= i; ++m) {
          if (m > 0) binom = binom * static_cast<double>(i - m + 1) / static_cast<double>(m);
          out[j + m] = out[j + m] + constant(binom) * a.c_[i] * derivs[i - m];
        }
      }
    }
    return DiffOp(std::move(out));
  }

  friend DiffOp commutator(const DiffOp& a, const DiffOp& b) {
    return compose(a, b) - compose(b, a);
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back().is_constant(0.0)) c_.pop_back();
  }

  std::vector<Expr> c_;
};

// True when each coefficient of `a` numerically agrees with the matching
// coefficient of `b` on the sample spec.
struct OpCompareReport {
  bool equal = true;
  double max_residual = 0.0;
  int worst_order = -1;
};

inline OpCompareReport approx_equal_ops(const DiffOp& a, const DiffOp& b,
                                        const SampleSpec& spec,
                                        const ParamBinding& binding = {}) {
  OpCompareReport rep;
  int top = std::max(a.order(), b.order());
  for (int k = 0; k <= top; ++k) {
    auto r = approx_equal(a.coeff(k), b.coeff(k), spec, binding);
    if (r.max_residual > rep.max_residual) {
      rep.max_residual = r.max_residual;
      rep.worst_order = k;
    }
    if (!r.equal) rep.equal = false;
  }
  return rep;
}

}  // namespace ladderlab
