#pragma once

// Shift-operator systems for second-order Hamiltonians
//
//     H = X(x) D^2 + V(x),      D = d/dx.
//
// A system bundles H with a first-order operator P = Y D + Z and a
// multiplication operator Q such that the pair closes under commutation:
//
//     [H, P] = Q (beta H + 1) + alpha P + gamma H
//     [H, Q] = 2 lambda P + nu Q + tau
//
// with scalar structure constants (alpha, beta, gamma, lambda, nu, tau).
// Those operator relations are equivalent to five pointwise identities in
// the coefficient functions:
//
//     (c1)  X (Y'' + 2 Z') = alpha Y
//     (c2)  2 X Y' - X' Y  = (beta Q + gamma) X
//     (c3)  Q (1 + beta V) = X Z'' - gamma V - alpha Z - Y V'
//     (c4)  X Q'           = lambda Y
//     (c5)  -2 lambda Z + X Q'' = nu Q + tau
//
// From Q and P one builds energy-dependent combinations S1 (lowering) and
// S2 (raising) that map an eigenstate of H to eigenstates at shifted
// energies.  The shift sizes are the eigenvalues of the 2x2 closure matrix
//
//     M(E) = [ nu      1 + beta E ]
//            [ 2 lambda    alpha  ]
//
// evaluated at the incoming state's energy E.  Throughout, the reserved
// parameter ENERGY denotes that incoming energy.
//
// The built-in catalog covers six families for which the constraints admit
// closed-form solutions, together with their ground states and the closed
// form of the ladder commutator [S1, S2].

#include "ladderlab/diffop.hpp"
#include "ladderlab/expr.hpp"
#include "ladderlab/jsonout.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace ladderlab {

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StructureConstants {
  double alpha = 0;
  double beta = 0;
  double gamma = 0;
  double lambda = 0;
  double nu = 0;
  double tau = 0;
};

// Linear (beta == 0): the closure matrix is energy-independent and H, P, Q
// close into a finite-dimensional commutator algebra.  Quadratic
// (beta != 0): the raising/lowering gaps depend on the energy of the state
// acted on.
enum class ClosureClass { Linear, Quadratic };

struct ShiftSystem {
  Expr X, V;  // H = X D^2 + V
  Expr Y, Z;  // P = Y D + Z
  Expr Q;     // multiplication operator
  StructureConstants k;

  Interval domain{-10.0, 10.0};            // region used for numeric checks
  Interval core{-10.0, 10.0};              // sub-region where coefficient
                                           // magnitudes stay moderate; used
                                           // for cancellation-sensitive checks
  std::vector<ExcludedPoint> exclude{};    // singularities inside the domain

  int case_id = 0;          // 1..6 for catalog systems, 0 for custom ones
  ParamBinding constants;   // named constants the system was built from
};

inline ClosureClass closure_class(const ShiftSystem& sys) {
  return sys.k.beta != 0.0 ? ClosureClass::Quadratic : ClosureClass::Linear;
}

inline const char* closure_class_name(ClosureClass c) {
  return c == ClosureClass::Quadratic ? "quadratic" : "linear";
}

inline DiffOp hamiltonian(const ShiftSystem& sys) {
  return DiffOp({sys.V, constant(0.0), sys.X});
}

inline DiffOp shift_p(const ShiftSystem& sys) { return DiffOp({sys.Z, sys.Y}); }

inline DiffOp mult_q(const ShiftSystem& sys) { return DiffOp::multiplication(sys.Q); }

inline DiffOp identity_op() { return DiffOp::multiplication(constant(1.0)); }

// Sampling region for numeric identity checks: the system's domain shrunk by
// a small margin so boundary singularities are never evaluated.
inline SampleSpec system_spec(const ShiftSystem& sys) {
  SampleSpec spec;
  double w = sys.domain.b - sys.domain.a;
  spec.domain = {sys.domain.a + 1e-6 * w, sys.domain.b - 1e-6 * w};
  spec.exclude = sys.exclude;
  return spec;
}

inline SampleSpec core_spec(const ShiftSystem& sys) {
  SampleSpec spec;
  spec.domain = sys.core;
  spec.exclude = sys.exclude;
  return spec;
}

// ---------------------------------------------------------------------------
// Constraint and closure checks.
// ---------------------------------------------------------------------------

struct ConstraintReport {
  std::array<double, 5> residual{};  // scaled max residual per identity
  std::array<double, 5> worst_x{};
  bool within(double tol) const {
    for (double r : residual)
      if (!(r <= tol)) return false;
    return true;
  }
  double max() const {
    double m = 0;
    for (double r : residual) m = std::max(m, r);
    return m;
  }
};

inline ConstraintReport check_constraints(const ShiftSystem& sys,
                                          const SampleSpec& spec) {
  const Expr& X = sys.X;
  const Expr& Y = sys.Y;
  const Expr& Z = sys.Z;
  const Expr& Q = sys.Q;
  const Expr& V = sys.V;
  const auto& k = sys.k;
  std::pair<Expr, Expr> ident[5] = {
      {X * (Y.diff().diff() + 2.0 * Z.diff()), k.alpha * Y},
      {2.0 * X * Y.diff() - X.diff() * Y, (k.beta * Q + k.gamma) * X},
      {Q * (1.0 + k.beta * V),
       X * Z.diff().diff() - k.gamma * V - k.alpha * Z - Y * V.diff()},
      {X * Q.diff(), k.lambda * Y},
      {-2.0 * k.lambda * Z + X * Q.diff().diff(), k.nu * Q + constant(k.tau)},
  };
  ConstraintReport rep;
  for (int i = 0; i < 5; ++i) {
    auto r = approx_equal(ident[i].first, ident[i].second, spec);
    rep.residual[static_cast<std::size_t>(i)] = r.max_residual;
    rep.worst_x[static_cast<std::size_t>(i)] = r.worst_x;
  }
  return rep;
}

struct ClosureReport {
  OpCompareReport hp;  // [H,P] vs Q (beta H + 1) + alpha P + gamma H
  OpCompareReport hq;  // [H,Q] vs 2 lambda P + nu Q + tau
  bool within(double tol) const {
    return hp.max_residual <= tol && hq.max_residual <= tol;
  }
  double max() const { return std::max(hp.max_residual, hq.max_residual); }
};

inline ClosureReport closure_residuals(const ShiftSystem& sys,
                                       const SampleSpec& spec) {
  DiffOp h = hamiltonian(sys);
  DiffOp p = shift_p(sys);
  DiffOp q = mult_q(sys);
  const auto& k = sys.k;
  DiffOp rhs_hp = compose(q, k.beta * h + identity_op()) + k.alpha * p + k.gamma * h;
  DiffOp rhs_hq = (2.0 * k.lambda) * p + k.nu * q + k.tau * identity_op();
  ClosureReport rep;
  rep.hp = approx_equal_ops(commutator(h, p), rhs_hp, spec);
  rep.hq = approx_equal_ops(commutator(h, q), rhs_hq, spec);
  return rep;
}

// ---------------------------------------------------------------------------
// Energy-dependent shift operators.
// ---------------------------------------------------------------------------

// Closure matrix M(E) split as M = m0 + E * m1.  Index convention:
//   [H, Qt] = M[0][0] Qt + M[1][0] Pt,   [H, Pt] = M[0][1] Qt + M[1][1] Pt.
struct ClosureMatrix {
  std::array<std::array<double, 2>, 2> m0{};
  std::array<std::array<double, 2>, 2> m1{};
};

inline ClosureMatrix closure_matrix(const ShiftSystem& sys) {
  ClosureMatrix m;
  m.m0[0][0] = sys.k.nu;
  m.m0[0][1] = 1.0;
  m.m0[1][0] = 2.0 * sys.k.lambda;
  m.m0[1][1] = sys.k.alpha;
  m.m1[0][1] = sys.k.beta;
  return m;
}

// Constant offsets that absorb the inhomogeneous parts (gamma H and tau) of
// the closure relations:  Qt = Q + f,  Pt = P + g.  For beta == 0 the
// offsets are affine in the incoming energy; for beta != 0 they are plain
// constants and existence requires the built-in relation between gamma,
// beta and the additive constants of Q and Z.
struct TildePair {
  DiffOp qt;
  DiffOp pt;
  Expr f;  // Qt - Q
  Expr g;  // Pt - P
};

inline TildePair tilde_shifts(const ShiftSystem& sys) {
  const auto& k = sys.k;
  Expr e = param(kEnergyParam);
  Expr f, g;
  if (k.beta == 0.0) {
    double det = 2.0 * k.lambda - k.alpha * k.nu;
    if (det == 0.0)
      throw CatalogError("degenerate closure: 2*lambda - alpha*nu == 0");
    // Solve  f + alpha g = gamma E   and   nu f + 2 lambda g = tau.
    f = (2.0 * k.lambda * k.gamma / det) * e + constant(-k.alpha * k.tau / det);
    g = (-k.nu * k.gamma / det) * e + constant(k.tau / det);
  } else {
    if (k.lambda == 0.0)
      throw CatalogError("quadratic closure requires lambda != 0");
    double fc = k.gamma / k.beta;
    double gc = (k.tau - k.nu * fc) / (2.0 * k.lambda);
    // The energy-proportional part of [H,Pt] cancels only when f+alpha*g=0.
    if (std::abs(fc + k.alpha * gc) >
        1e-9 * (1.0 + std::abs(fc) + std::abs(gc)))
      throw CatalogError(
          "no constant shift absorbs the closure offsets (gamma/beta + "
          "alpha*(tau - nu*gamma/beta)/(2*lambda) != 0)");
    f = constant(fc);
    g = constant(gc);
  }
  TildePair t;
  t.f = f;
  t.g = g;
  t.qt = mult_q(sys) + f * identity_op();
  t.pt = shift_p(sys) + g * identity_op();
  return t;
}

// Shift sizes: eigenvalues of M(ENERGY) as expressions in ENERGY.
// first = lowering gap (minus branch), second = raising gap (plus branch).
inline std::pair<Expr, Expr> gap_exprs(const ShiftSystem& sys) {
  const auto& k = sys.k;
  Expr e = param(kEnergyParam);
  Expr disc = constant((k.nu - k.alpha) * (k.nu - k.alpha) + 8.0 * k.lambda) +
              (8.0 * k.lambda * k.beta) * e;
  Expr root = sqrt_(disc);
  Expr half_tr = constant(0.5 * (k.nu + k.alpha));
  return {half_tr - 0.5 * root, half_tr + 0.5 * root};
}

inline std::pair<double, double> gaps_at(const ShiftSystem& sys, double energy) {
  auto [g1, g2] = gap_exprs(sys);
  ParamBinding b;
  b.set(kEnergyParam, energy);
  return {g1.eval(0.0, b), g2.eval(0.0, b)};
}

// The lowering/raising operators S_j = u1_j Qt + u2_j Pt, where (u1_j, u2_j)
// is an eigenvector of M(ENERGY) for the eigenvalue g_j.  The generic
// normalization is u2 = 1; the radial-harmonic family (case 2) instead uses
// the scaling u1 = 1 that matches its conventional commutator normalization.
struct ShiftOperators {
  DiffOp s1;  // lowering
  DiffOp s2;  // raising
  Expr gap1, gap2;  // in ENERGY
  std::array<Expr, 2> u1;  // weight of Qt in S1, S2
  std::array<Expr, 2> u2;  // weight of Pt in S1, S2
};

inline ShiftOperators shift_operators(const ShiftSystem& sys) {
  const auto& k = sys.k;
  if (k.lambda == 0.0)
    throw CatalogError("shift operators require lambda != 0");
  TildePair t = tilde_shifts(sys);
  auto [g1, g2] = gap_exprs(sys);
  ShiftOperators out;
  out.gap1 = g1;
  out.gap2 = g2;
  Expr gaps[2] = {g1, g2};
  for (int j = 0; j < 2; ++j) {
    Expr u1, u2;
    if (sys.case_id == 2) {
      u1 = constant(1.0);
      u2 = (2.0 * k.lambda) / (gaps[j] - k.alpha);
    } else {
      u1 = (gaps[j] - k.alpha) / (2.0 * k.lambda);
      u2 = constant(1.0);
    }
    out.u1[static_cast<std::size_t>(j)] = u1;
    out.u2[static_cast<std::size_t>(j)] = u2;
    DiffOp s = u1 * t.qt + u2 * t.pt;
    (j == 0 ? out.s1 : out.s2) = s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ladder commutator [S1, S2].
// ---------------------------------------------------------------------------

// Composing energy-dependent operators: in S_a S_b, the inner operator sees
// the incoming energy E while the outer one sees E + gap_b(E).  The
// difference S1 S2 - S2 S1 is then reduced modulo the eigenvalue equation
// X psi'' = (E - V) psi, leaving a multiplication operator on eigenstates.
struct LadderCommutator {
  DiffOp op;       // raw second-order difference before reduction
  Expr reduced;    // scalar action on an eigenstate at ENERGY
  Expr d1_coeff;   // first-derivative coefficient; vanishes identically
};

inline LadderCommutator ladder_commutator(const ShiftSystem& sys) {
  ShiftOperators s = shift_operators(sys);
  Expr e = param(kEnergyParam);
  DiffOp t1 = compose(s.s1.substitute_param(kEnergyParam, e + s.gap2), s.s2);
  DiffOp t2 = compose(s.s2.substitute_param(kEnergyParam, e + s.gap1), s.s1);
  LadderCommutator out;
  out.op = t1 - t2;
  out.d1_coeff = out.op.coeff(1);
  out.reduced = out.op.coeff(0) + out.op.coeff(2) * (e - sys.V) / sys.X;
  return out;
}

// Closed form of the reduced ladder commutator for catalog systems, as an
// expression in ENERGY only.
inline Expr ladder_commutator_closed(const ShiftSystem& sys) {
  const auto& c = sys.constants;
  const auto& k = sys.k;
  Expr e = param(kEnergyParam);
  double s = std::sqrt(k.alpha * k.alpha + 2.0 * k.lambda);
  switch (sys.case_id) {
    case 1:
      return constant(-s);
    case 2: {
      double off = c.at("c1") + k.alpha * c.at("c2") - 0.5 * k.alpha;
      return (8.0 * k.lambda / s) * (2.0 * e + off);
    }
    case 3: {
      double a = c.at("a"), b = c.at("b"), cc = c.at("c");
      double u = (k.alpha + cc * cc) / (2.0 * cc);
      return (-8.0 * a * b * cc) *
             sqrt_(constant(u * u + k.lambda / (2.0 * cc * cc)) - e);
    }
    case 4: {
      double a = c.at("a"), b = c.at("b"), kk = c.at("k");
      double u = (k.alpha - kk * kk) / (2.0 * kk);
      return (-2.0 * kk * (a * a + b * b)) *
             sqrt_(e + constant(k.lambda / (2.0 * kk * kk) + u * u));
    }
    case 5: {
      double off = c.at("c1") + k.alpha * c.at("c2");
      return (-2.0 / s) * (e + off);
    }
    case 6: {
      double cc = c.at("c");
      double g = 2.0 * c.at("c1") + k.alpha * (cc + 2.0 * c.at("c2"));
      return (-2.0 * cc * cc / s) * (e - g / (2.0 * cc));
    }
    default:
      throw CatalogError("no closed-form ladder commutator for custom systems");
  }
}

// ---------------------------------------------------------------------------
// Ground states.
// ---------------------------------------------------------------------------

struct GroundState {
  Expr psi;       // unnormalized closed-form wave function
  double energy;
  std::vector<double> candidate_energies;  // all closed-form roots considered
};

// ---------------------------------------------------------------------------
// Catalog.
// ---------------------------------------------------------------------------

inline int case_count() { return 6; }

inline const char* case_label(int id) {
  switch (id) {
    case 1: return "harmonic";
    case 2: return "radial-harmonic";
    case 3: return "hyperbolic-well";
    case 4: return "trigonometric-well";
    case 5: return "coulomb-like";
    case 6: return "exponential-well";
    default: throw CatalogError("unknown case id " + std::to_string(id));
  }
}

inline std::vector<std::string> case_constant_names(int id) {
  switch (id) {
    case 1:
    case 2:
    case 5: return {"alpha", "lambda", "c1", "c2", "c3"};
    case 3: return {"alpha", "lambda", "a", "b", "c", "c1", "c2", "c3"};
    case 4: return {"alpha", "lambda", "a", "b", "k", "c1", "c2", "c3"};
    case 6: return {"alpha", "lambda", "c", "c1", "c2", "c3"};
    default: throw CatalogError("unknown case id " + std::to_string(id));
  }
}

namespace detail {

inline ParamBinding case_defaults(int id) {
  ParamBinding d;
  switch (id) {
    case 1:
      d.set("alpha", 0).set("lambda", 1).set("c1", 0).set("c2", 0).set("c3", 0);
      break;
    case 2:
      d.set("alpha", 0).set("lambda", 1).set("c1", 0).set("c2", 0).set("c3", 2);
      break;
    case 3:
      d.set("alpha", 0).set("lambda", 1).set("a", 1).set("b", 1).set("c", 1)
          .set("c2", 0).set("c3", -150);
      break;
    case 4:
      d.set("alpha", 0).set("lambda", 1).set("a", 1).set("b", 0).set("k", 1)
          .set("c2", 0).set("c3", 2);
      break;
    case 5:
      d.set("alpha", 0).set("lambda", 0.5).set("c1", 0).set("c2", 0).set("c3", 2);
      break;
    case 6:
      d.set("alpha", 0).set("lambda", 1).set("c", 1).set("c1", 0).set("c2", 0)
          .set("c3", 1);
      break;
    default:
      throw CatalogError("unknown case id " + std::to_string(id));
  }
  return d;
}

inline double s_param(double alpha, double lambda) {
  double s2 = alpha * alpha + 2.0 * lambda;
  if (!(s2 > 0))
    throw CatalogError("need alpha^2 + 2*lambda > 0");
  return std::sqrt(s2);
}

}  // namespace detail

// Build one of the six catalog systems.  `overrides` may set any of the
// constants named by case_constant_names(id); everything else takes the
// case's default.  Unknown names are rejected.
inline ShiftSystem build_case(int id, const ParamBinding& overrides = {}) {
  ParamBinding defaults = detail::case_defaults(id);
  auto names = case_constant_names(id);
  for (const auto& [name, value] : overrides.entries()) {
    (void)value;
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw CatalogError("case " + std::to_string(id) +
                         " has no constant named '" + name + "'");
  }
  ParamBinding c;
  for (const auto& name : names) {
    if (auto v = overrides.lookup(name)) {
      c.set(name, *v);
    } else if (auto d = defaults.lookup(name)) {
      c.set(name, *d);
    }
    // c1 for cases 3 and 4 is derived below when not given.
  }

  double alpha = c.at("alpha");
  double lambda = c.at("lambda");

  ShiftSystem sys;
  sys.case_id = id;
  Expr x = var();

  switch (id) {
    case 1: {
      double s2 = alpha * alpha + 2.0 * lambda;
      if (!(s2 > 0)) throw CatalogError("need alpha^2 + 2*lambda > 0");
      double c1 = c.at("c1"), c2 = c.at("c2"), c3 = c.at("c3");
      sys.X = constant(-1.0);
      sys.Y = constant(1.0);
      sys.Q = -lambda * x + constant(c1);
      sys.Z = (-0.5 * alpha) * x + constant(c2);
      sys.V = (0.25 * s2) * power(x, constant(2.0)) -
              (c1 + alpha * c2) * x + constant(c3);
      sys.k = {alpha, 0.0, 0.0, lambda, -alpha, alpha * c1 - 2.0 * lambda * c2};
      sys.domain = {-12.0, 12.0};
      sys.core = {-6.0, 6.0};
      break;
    }
    case 2: {
      double s2 = alpha * alpha + 2.0 * lambda;
      if (!(s2 > 0)) throw CatalogError("need alpha^2 + 2*lambda > 0");
      double c1 = c.at("c1"), c2 = c.at("c2"), c3 = c.at("c3");
      if (!(1.0 + 4.0 * c3 > 0))
        throw CatalogError("radial-harmonic family needs 1 + 4*c3 > 0");
      Expr x2 = power(x, constant(2.0));
      sys.X = constant(-1.0);
      sys.Y = x;
      sys.Q = (-0.5 * lambda) * x2 + constant(c1);
      sys.Z = (-0.25 * alpha) * x2 + constant(c2);
      sys.V = (s2 / 16.0) * x2 + c3 * power(x, constant(-2.0)) +
              constant(0.5 * (0.5 * alpha - alpha * c2 - c1));
      sys.k = {alpha, 0.0, 2.0, lambda, -alpha,
               lambda * (1.0 - 2.0 * c2) + alpha * c1};
      sys.domain = {1e-4, 40.0};
      sys.core = {0.3, 8.0};
      break;
    }
    case 3: {
      double a = c.at("a"), b = c.at("b"), cc = c.at("c");
      double c2 = c.at("c2"), c3 = c.at("c3");
      if (!(a > 0 && b > 0))
        throw CatalogError("hyperbolic-well family needs a > 0 and b > 0");
      if (!(cc > 0)) throw CatalogError("hyperbolic-well family needs c > 0");
      if (lambda == 0.0)
        throw CatalogError("hyperbolic-well family needs lambda != 0");
      double c1 = -alpha * c2;
      if (auto given = c.lookup("c1")) {
        if (std::abs(*given - c1) > 1e-12 * (1.0 + std::abs(c1)))
          throw CatalogError("hyperbolic-well family requires c1 = -alpha*c2");
      }
      Expr yg = constant(a) * exp_(cc * x) + constant(b) * exp_(-cc * x);
      Expr yd = constant(a) * exp_(cc * x) - constant(b) * exp_(-cc * x);
      double u = alpha + cc * cc;
      sys.X = constant(-1.0);
      sys.Y = yg;
      sys.Q = (-lambda / cc) * yd + constant(c1);
      sys.Z = (-0.5 * u / cc) * yd + constant(c2);
      sys.V = c3 * power(yg, constant(-2.0)) +
              constant((u * u + 2.0 * lambda) / (4.0 * cc * cc));
      double beta = -2.0 * cc * cc / lambda;
      double gamma = (2.0 * cc * cc / lambda) * c1;
      double nu = -alpha - 2.0 * cc * cc;
      sys.k = {alpha, beta, gamma, lambda, nu, -2.0 * lambda * c2 - nu * c1};
      sys.domain = {-12.0, 12.0};
      sys.core = {-4.0, 4.0};
      break;
    }
    case 4: {
      double a = c.at("a"), b = c.at("b"), kk = c.at("k");
      double c2 = c.at("c2"), c3 = c.at("c3");
      if (!(a * a + b * b > 0))
        throw CatalogError("trigonometric-well family needs a or b nonzero");
      if (!(kk > 0)) throw CatalogError("trigonometric-well family needs k > 0");
      if (lambda == 0.0)
        throw CatalogError("trigonometric-well family needs lambda != 0");
      double c1 = -alpha * c2;
      if (auto given = c.lookup("c1")) {
        if (std::abs(*given - c1) > 1e-12 * (1.0 + std::abs(c1)))
          throw CatalogError("trigonometric-well family requires c1 = -alpha*c2");
      }
      Expr yg = constant(a) * sin_(kk * x) + constant(b) * cos_(kk * x);
      Expr yc = constant(a) * cos_(kk * x) - constant(b) * sin_(kk * x);
      double u = alpha - kk * kk;
      sys.X = constant(-1.0);
      sys.Y = yg;
      sys.Q = (lambda / kk) * yc + constant(c1);
      sys.Z = (0.5 * u / kk) * yc + constant(c2);
      sys.V = c3 * power(yg, constant(-2.0)) -
              constant((u * u + 2.0 * lambda) / (4.0 * kk * kk));
      double beta = 2.0 * kk * kk / lambda;
      double gamma = -2.0 * kk * kk / lambda * c1;
      double nu = 2.0 * kk * kk - alpha;
      sys.k = {alpha, beta, gamma, lambda, nu,
               c1 * (alpha - 2.0 * kk * kk) - 2.0 * lambda * c2};
      // One period of positivity of Y: with phi = atan2(b, a), Y > 0 exactly
      // on (-phi/k, (pi - phi)/k).
      double phi = std::atan2(b, a);
      sys.domain = {-phi / kk, (std::numbers::pi - phi) / kk};
      double w4 = sys.domain.b - sys.domain.a;
      sys.core = {sys.domain.a + 0.05 * w4, sys.domain.b - 0.05 * w4};
      break;
    }
    case 5: {
      double s2 = alpha * alpha + 2.0 * lambda;
      if (!(s2 > 0)) throw CatalogError("need alpha^2 + 2*lambda > 0");
      double c1 = c.at("c1"), c2 = c.at("c2"), c3 = c.at("c3");
      if (!(1.0 + 4.0 * c3 > 0))
        throw CatalogError("coulomb-like family needs 1 + 4*c3 > 0");
      sys.X = -x;
      sys.Y = x;
      sys.Q = -lambda * x + constant(c1);
      sys.Z = (-0.5 * alpha) * x + constant(c2);
      sys.V = (0.25 * s2) * x + c3 * power(x, constant(-1.0)) +
              constant(-(c1 + alpha * c2));
      sys.k = {alpha, 0.0, 1.0, lambda, -alpha, alpha * c1 - 2.0 * lambda * c2};
      // Wide enough that the first five levels decay well before the wall.
      sys.domain = {1e-4, 60.0};
      sys.core = {0.3, 20.0};
      break;
    }
    case 6: {
      double s = detail::s_param(alpha, lambda);
      (void)s;
      double cc = c.at("c");
      double c1 = c.at("c1"), c2 = c.at("c2"), c3 = c.at("c3");
      if (!(cc > 0)) throw CatalogError("exponential-well family needs c > 0");
      double g = 2.0 * c1 + alpha * (cc + 2.0 * c2);
      sys.X = neg(exp_(cc * x));
      sys.Y = constant(1.0);
      sys.Q = (lambda / cc) * exp_(-cc * x) + constant(c1);
      sys.Z = (0.5 * alpha / cc) * exp_(-cc * x) + constant(c2);
      sys.V = ((2.0 * lambda + alpha * alpha) / (4.0 * cc * cc)) * exp_(-cc * x) +
              c3 * exp_(cc * x) + constant(g / (2.0 * cc));
      sys.k = {alpha, 0.0, -cc, lambda, -alpha,
               alpha * c1 - lambda * (cc + 2.0 * c2)};
      sys.domain = {-12.0, 12.0};
      sys.core = {-4.0, 5.0};
      break;
    }
    default:
      throw CatalogError("unknown case id " + std::to_string(id));
  }

  // Record the constants actually used (including derived c1 where needed).
  ParamBinding used;
  for (const auto& name : names) {
    if (auto v = c.lookup(name)) {
      used.set(name, *v);
    } else if (name == "c1" && (id == 3 || id == 4)) {
      used.set("c1", -alpha * c.at("c2"));
    }
  }
  sys.constants = used;
  return sys;
}

inline GroundState ground_state(const ShiftSystem& sys) {
  const auto& c = sys.constants;
  const auto& k = sys.k;
  Expr x = var();
  GroundState gs;
  switch (sys.case_id) {
    case 1: {
      double s = detail::s_param(k.alpha, k.lambda);
      double w = c.at("c1") + k.alpha * c.at("c2");
      double b2 = w / s;
      gs.psi = exp_((-0.25 * s) * power(x, constant(2.0)) + b2 * x);
      gs.energy = 0.5 * s + c.at("c3") - w * w / (s * s);
      gs.candidate_energies = {gs.energy};
      break;
    }
    case 2: {
      double s = detail::s_param(k.alpha, k.lambda);
      double c3 = c.at("c3");
      double root = std::sqrt(1.0 + 4.0 * c3);
      double base = 0.25 * s + 0.5 * (0.5 * k.alpha - k.alpha * c.at("c2") -
                                      c.at("c1"));
      double m_plus = 0.5 * (1.0 + root);
      double m_minus = 0.5 * (1.0 - root);
      gs.candidate_energies = {m_plus * s / 2.0 + base, m_minus * s / 2.0 + base};
      // Only the larger exponent is normalizable against the x^-2 core.
      gs.psi = power(x, constant(m_plus)) *
               exp_((-s / 8.0) * power(x, constant(2.0)));
      gs.energy = gs.candidate_energies[0];
      break;
    }
    case 3: {
      double a = c.at("a"), b = c.at("b"), cc = c.at("c"), c3 = c.at("c3");
      double rad = cc * cc - c3 / (a * b);
      if (!(rad > 0))
        throw CatalogError("no closed-form bound ground state: c^2 - c3/(a*b) <= 0");
      double r_plus = -cc * cc + cc * std::sqrt(rad);
      double r_minus = -cc * cc - cc * std::sqrt(rad);
      double u = k.alpha + cc * cc;
      auto energy_of = [&](double r) {
        return (u * u + 2.0 * k.lambda - r * r) / (4.0 * cc * cc);
      };
      gs.candidate_energies = {energy_of(r_plus), energy_of(r_minus)};
      if (!(r_plus > 0))
        throw CatalogError("no bound ground state: needs c3 < 0");
      Expr yg = constant(a) * exp_(cc * x) + constant(b) * exp_(-cc * x);
      gs.psi = power(yg, constant(-r_plus / (2.0 * cc * cc)));
      gs.energy = gs.candidate_energies[0];
      break;
    }
    case 4: {
      double a = c.at("a"), b = c.at("b"), kk = c.at("k"), c3 = c.at("c3");
      double rad = kk * kk + 4.0 * c3 / (a * a + b * b);
      if (!(rad > 0))
        throw CatalogError(
            "no closed-form ground state: k^2 + 4*c3/(a^2+b^2) <= 0");
      double r_plus = kk * kk + kk * std::sqrt(rad);
      double r_minus = kk * kk - kk * std::sqrt(rad);
      double u = k.alpha - kk * kk;
      auto energy_of = [&](double r) {
        return (r * r - u * u - 2.0 * k.lambda) / (4.0 * kk * kk);
      };
      gs.candidate_energies = {energy_of(r_plus), energy_of(r_minus)};
      Expr yg = constant(a) * sin_(kk * x) + constant(b) * cos_(kk * x);
      gs.psi = power(yg, constant(r_plus / (2.0 * kk * kk)));
      gs.energy = gs.candidate_energies[0];
      break;
    }
    case 5: {
      double s = detail::s_param(k.alpha, k.lambda);
      double c3 = c.at("c3");
      double w = c.at("c1") + k.alpha * c.at("c2");
      double root = std::sqrt(1.0 + 4.0 * c3);
      double m_plus = 0.5 * (1.0 + root);
      double m_minus = 0.5 * (1.0 - root);
      gs.candidate_energies = {m_plus * s - w, m_minus * s - w};
      gs.psi = power(x, constant(m_plus)) * exp_((-0.5 * s) * x);
      gs.energy = gs.candidate_energies[0];
      break;
    }
    case 6: {
      double s = detail::s_param(k.alpha, k.lambda);
      double cc = c.at("c"), c3 = c.at("c3");
      if (!(c3 > 0))
        throw CatalogError("no bound ground state: needs c3 > 0");
      double g = 2.0 * c.at("c1") + k.alpha * (cc + 2.0 * c.at("c2"));
      double kap_minus = -std::sqrt(c3);  // decaying tail
      double kap_plus = std::sqrt(c3);
      auto e_of = [&](double kap) {
        return 0.5 * s - kap * s / cc + g / (2.0 * cc);
      };
      gs.candidate_energies = {e_of(kap_minus), e_of(kap_plus)};
      gs.psi = exp_((-0.5 * s / (cc * cc)) * exp_(-cc * x) + kap_minus * x);
      gs.energy = gs.candidate_energies[0];
      break;
    }
    default:
      throw CatalogError("no closed-form ground state for custom systems");
  }
  return gs;
}

// ---------------------------------------------------------------------------
// Eigenproblem transformation utility.
// ---------------------------------------------------------------------------

// Given a constant-coefficient problem  -psi'' + R psi = E psi,  returns
//     H' = -T D^2 + T (R - E)
// which satisfies H' psi = -psi whenever 1/T is chosen as the coefficient
// moved to the right-hand side; the transformation turns a coupling constant
// into the eigenvalue of a generalized problem of the X D^2 + V form.
inline DiffOp transform_eigenproblem(const Expr& r, const Expr& t, double e) {
  return DiffOp({t * (r - constant(e)), constant(0.0), neg(t)});
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

inline JsonValue system_to_json(const ShiftSystem& sys) {
  JsonValue j = JsonValue::object();
  j.set("case", sys.case_id);
  if (sys.case_id >= 1 && sys.case_id <= 6) j.set("label", case_label(sys.case_id));
  j.set("class", closure_class_name(closure_class(sys)));
  JsonValue fns = JsonValue::object();
  fns.set("X", sys.X.str());
  fns.set("V", sys.V.str());
  fns.set("Y", sys.Y.str());
  fns.set("Z", sys.Z.str());
  fns.set("Q", sys.Q.str());
  j.set("functions", std::move(fns));
  JsonValue sc = JsonValue::object();
  sc.set("alpha", sys.k.alpha);
  sc.set("beta", sys.k.beta);
  sc.set("gamma", sys.k.gamma);
  sc.set("lambda", sys.k.lambda);
  sc.set("nu", sys.k.nu);
  sc.set("tau", sys.k.tau);
  j.set("structure", std::move(sc));
  JsonValue cs = JsonValue::object();
  for (const auto& [name, value] : sys.constants.entries()) cs.set(name, value);
  j.set("constants", std::move(cs));
  JsonValue dom = JsonValue::array();
  dom.push(JsonValue::number(sys.domain.a));
  dom.push(JsonValue::number(sys.domain.b));
  j.set("domain", std::move(dom));
  return j;
}

}  // namespace ladderlab
