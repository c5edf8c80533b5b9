#pragma once

// Grid-based eigensolver and ladder verification.
//
// The eigenproblem  X psi'' + V psi = E psi  with X < 0 on the domain is
// discretized with Dirichlet walls as the generalized symmetric pencil
//
//     (A - E B) u = 0,   A = -D2 + diag(w V),   B = diag(w),   w = -1/X,
//
// where D2 is the standard three-point second difference on the interior
// points.  Eigenvalues come from inertia bisection (the number of negative
// pivots of the LDL^T factorization of A - E B counts eigenvalues below E),
// eigenvectors from inverse iteration with a partially pivoted tridiagonal
// solver, followed by a Rayleigh-quotient polish.  This avoids forming
// B^{-1/2} A B^{-1/2}, whose entries overflow for strongly weighted problems.

#include "ladderlab/diffop.hpp"
#include "ladderlab/expr.hpp"
#include "ladderlab/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ladderlab {

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Grid {
  double a = -1.0;
  double b = 1.0;
  int n = 1001;  // total points including both walls

  double h() const { return (b - a) / (n - 1); }
  double point(int i) const { return a + h() * i; }
  std::vector<double> points() const {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = point(i);
    return xs;
  }
};

inline Grid default_grid(const ShiftSystem& sys, int n = 4001) {
  return Grid{sys.domain.a, sys.domain.b, n};
}

// Tridiagonal pencil on the interior points i = 1..n-2.
struct Pencil {
  std::vector<double> diag;  // 2/h^2 + w_i V_i
  std::vector<double> w;     // B diagonal, positive
  double off = 0.0;          // constant off-diagonal entry -1/h^2
  Grid grid;
};

inline Pencil discretize(const Expr& X, const Expr& V, const Grid& g,
                         const ParamBinding& binding = {}) {
  if (g.n < 5) throw NumericsError("grid too small");
  Pencil p;
  p.grid = g;
  int m = g.n - 2;
  p.diag.resize(static_cast<std::size_t>(m));
  p.w.resize(static_cast<std::size_t>(m));
  double h = g.h();
  p.off = -1.0 / (h * h);
  for (int i = 0; i < m; ++i) {
    double x = g.point(i + 1);
    double xv = X.eval(x, binding);
    if (!(xv < 0))
      throw NumericsError("X(x) must be negative on the domain; X(" +
                          std::to_string(x) + ") = " + std::to_string(xv));
    double wv = -1.0 / xv;
    p.w[static_cast<std::size_t>(i)] = wv;
    p.diag[static_cast<std::size_t>(i)] =
        2.0 / (h * h) + wv * V.eval(x, binding);
  }
  return p;
}

// Number of pencil eigenvalues strictly below e (LDL^T inertia count).
inline int count_below(const Pencil& p, double e) {
  int count = 0;
  double q = 1.0;
  const double tiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < p.diag.size(); ++i) {
    double d = p.diag[i] - e * p.w[i];
    q = (i == 0) ? d : d - p.off * p.off / q;
    if (q == 0.0) q = tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

// Interval guaranteed to contain all pencil eigenvalues.
inline Interval eigen_bounds(const Pencil& p) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < p.diag.size(); ++i) {
    double r = 2.0 * std::abs(p.off);
    lo = std::min(lo, (p.diag[i] - r) / p.w[i]);
    hi = std::max(hi, (p.diag[i] + r) / p.w[i]);
  }
  return {lo, hi};
}

// k-th smallest eigenvalue (k = 0 is the lowest), by bisection on the count.
inline double eigenvalue_k(const Pencil& p, int k) {
  if (k < 0 || k >= static_cast<int>(p.diag.size()))
    throw NumericsError("eigenvalue index out of range");
  auto [lo, hi] = eigen_bounds(p);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo) + std::abs(hi));
       ++it) {
    double mid = 0.5 * (lo + hi);
    if (count_below(p, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

// Solve (T - shift*B) x = rhs for the tridiagonal pencil matrix with partial
// pivoting; overwrite rhs with the solution.
inline void solve_shifted(const Pencil& p, double shift, std::vector<double>& rhs) {
  std::size_t m = p.diag.size();
  std::vector<double> dia(m), sup(m, 0.0), sub(m, 0.0), fill(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    dia[i] = p.diag[i] - shift * p.w[i];
    if (i + 1 < m) {
      sup[i] = p.off;
      sub[i + 1] = p.off;
    }
  }
  const double tiny = 1e-300;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (std::abs(dia[i]) < std::abs(sub[i + 1])) {
      std::swap(dia[i], sub[i + 1]);
      std::swap(sup[i], dia[i + 1]);
      std::swap(fill[i], sup[i + 1]);
      std::swap(rhs[i], rhs[i + 1]);
    }
    double piv = dia[i];
    if (std::abs(piv) < tiny) piv = piv < 0 ? -tiny : tiny;
    double l = sub[i + 1] / piv;
    dia[i + 1] -= l * sup[i];
    sup[i + 1] -= l * fill[i];
    rhs[i + 1] -= l * rhs[i];
  }
  for (std::size_t ri = m; ri-- > 0;) {
    double v = rhs[ri];
    if (ri + 1 < m) v -= sup[ri] * rhs[ri + 1];
    if (ri + 2 < m) v -= fill[ri] * rhs[ri + 2];
    double piv = dia[ri];
    if (std::abs(piv) < tiny) piv = piv < 0 ? -tiny : tiny;
    rhs[ri] = v / piv;
  }
}

inline double b_dot(const Pencil& p, const std::vector<double>& u,
                    const std::vector<double>& v) {
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += p.w[i] * u[i] * v[i];
  return s;
}

inline double rayleigh(const Pencil& p, const std::vector<double>& u) {
  double num = 0;
  std::size_t m = u.size();
  for (std::size_t i = 0; i < m; ++i) {
    double av = p.diag[i] * u[i];
    if (i > 0) av += p.off * u[i - 1];
    if (i + 1 < m) av += p.off * u[i + 1];
    num += u[i] * av;
  }
  return num / b_dot(p, u, u);
}

}  // namespace detail

// Eigenvector at an isolated eigenvalue `e`, B-normalized, interior points
// only, sign fixed so the largest-magnitude entry is positive.  Returns the
// polished eigenvalue through `e`.
inline std::vector<double> eigenvector(const Pencil& p, double& e) {
  std::size_t m = p.diag.size();
  detail::SplitMix64 rng(0x1adde5u);
  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = rng.uniform(-1.0, 1.0);
  double shift = e;
  for (int it = 0; it < 3; ++it) {
    detail::solve_shifted(p, shift, v);
    double norm = std::sqrt(detail::b_dot(p, v, v));
    if (!(norm > 0) || !std::isfinite(norm))
      throw NumericsError("inverse iteration broke down");
    for (auto& val : v) val /= norm;
  }
  e = detail::rayleigh(p, v);
  detail::solve_shifted(p, e + 1e-12 * (1.0 + std::abs(e)), v);
  double norm = std::sqrt(detail::b_dot(p, v, v));
  for (auto& val : v) val /= norm;
  e = detail::rayleigh(p, v);
  std::size_t imax = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  if (v[imax] < 0)
    for (auto& val : v) val = -val;
  return v;
}

// States are reported on the full grid with Dirichlet zeros at both walls.
struct Spectrum {
  std::vector<double> energies;
  std::vector<std::vector<double>> states;
  Grid grid;
};

inline Spectrum solve_lowest(const Expr& X, const Expr& V, const Grid& g,
                             int levels, const ParamBinding& binding = {}) {
  Pencil p = discretize(X, V, g, binding);
  Spectrum out;
  out.grid = g;
  for (int k = 0; k < levels; ++k) {
    double e = eigenvalue_k(p, k);
    std::vector<double> inner = eigenvector(p, e);
    std::vector<double> full(static_cast<std::size_t>(g.n), 0.0);
    std::copy(inner.begin(), inner.end(), full.begin() + 1);
    out.energies.push_back(e);
    out.states.push_back(std::move(full));
  }
  return out;
}

inline Spectrum solve_lowest(const ShiftSystem& sys, const Grid& g, int levels) {
  return solve_lowest(sys.X, sys.V, g, levels);
}

// Bisection estimate refined by inverse iteration's Rayleigh quotient, which
// pushes the accuracy well below the eps*||A|| floor of raw pivot counting.
inline double polished_eigenvalue(const Pencil& p, int k) {
  double e = eigenvalue_k(p, k);
  (void)eigenvector(p, e);
  return e;
}

// Richardson-extrapolated eigenvalue: combines the value on `g` (odd point
// count) with the one on the coarse grid of half resolution, cancelling the
// leading h^2 error of the three-point scheme.
inline double eigenvalue_extrapolated(const Expr& X, const Expr& V, const Grid& g,
                                      int k, const ParamBinding& binding = {}) {
  if (g.n % 2 == 0)
    throw NumericsError("extrapolation needs an odd grid point count");
  Grid coarse{g.a, g.b, (g.n + 1) / 2};
  double ef = polished_eigenvalue(discretize(X, V, g, binding), k);
  double ec = polished_eigenvalue(discretize(X, V, coarse, binding), k);
  return (4.0 * ef - ec) / 3.0;
}

// ---------------------------------------------------------------------------
// Applying differential operators to grid states.
// ---------------------------------------------------------------------------

// Fourth-order centered differences; the outermost two points on each side
// are left as zero.  The operator must have ENERGY already bound.
inline std::vector<double> apply_on_grid(const DiffOp& op, const Grid& g,
                                         const std::vector<double>& psi,
                                         const ParamBinding& binding = {}) {
  if (op.depends_on_energy())
    throw BindingError("bind ENERGY before applying an operator to a grid state");
  if (static_cast<int>(psi.size()) != g.n)
    throw NumericsError("state size does not match grid");
  if (op.order() > 2) throw NumericsError("grid application supports order <= 2");
  std::size_t n = psi.size();
  std::vector<double> out(n, 0.0);
  double h = g.h();
  for (std::size_t i = 2; i + 2 < n; ++i) {
    double x = g.point(static_cast<int>(i));
    double d1 = (-psi[i + 2] + 8 * psi[i + 1] - 8 * psi[i - 1] + psi[i - 2]) /
                (12 * h);
    double d2 = (-psi[i + 2] + 16 * psi[i + 1] - 30 * psi[i] +
                 16 * psi[i - 1] - psi[i - 2]) /
                (12 * h * h);
    double acc = op.coeff(0).eval(x, binding) * psi[i];
    if (op.order() >= 1) acc += op.coeff(1).eval(x, binding) * d1;
    if (op.order() >= 2) acc += op.coeff(2).eval(x, binding) * d2;
    out[i] = acc;
  }
  return out;
}

inline std::vector<double> sample_on_grid(const Expr& f, const Grid& g,
                                          const ParamBinding& binding = {}) {
  std::vector<double> out(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i)
    out[static_cast<std::size_t>(i)] = f.eval(g.point(i), binding);
  return out;
}

// |<u,v>| / (|u| |v|) in the B = diag(w) inner product, ignoring `skip`
// points at each end (stencil shadow and wall effects).
inline double cosine_similarity(const std::vector<double>& u,
                                const std::vector<double>& v,
                                const std::vector<double>& w, int skip) {
  if (u.size() != v.size() || u.size() != w.size())
    throw NumericsError("size mismatch in cosine_similarity");
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = static_cast<std::size_t>(skip); i + skip < u.size(); ++i) {
    uv += w[i] * u[i] * v[i];
    uu += w[i] * u[i] * u[i];
    vv += w[i] * v[i] * v[i];
  }
  if (!(uu > 0) || !(vv > 0)) return 0.0;
  return std::abs(uv) / std::sqrt(uu * vv);
}

inline std::vector<double> b_weights(const Expr& X, const Grid& g) {
  std::vector<double> w(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i) {
    double xv = X.eval(g.point(i));
    w[static_cast<std::size_t>(i)] = xv < 0 ? -1.0 / xv : 0.0;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Ladder predictions and their verification against the grid solver.
// ---------------------------------------------------------------------------

// Energies obtained by repeatedly raising from the closed-form ground energy.
// The chain stops at the requested count, at a non-real or non-positive gap,
// or when the round trip E -> E+g2(E) -> back via g1 fails to return: that
// failure marks the top of a finite tower.
inline std::vector<double> ladder_spectrum(const ShiftSystem& sys, int count) {
  std::vector<double> es;
  double e = ground_state(sys).energy;
  auto [g1x, g2x] = gap_exprs(sys);
  es.push_back(e);
  while (static_cast<int>(es.size()) < count) {
    double gap, back;
    try {
      ParamBinding b;
      b.set(kEnergyParam, e);
      gap = g2x.eval(0.0, b);
      ParamBinding b2;
      b2.set(kEnergyParam, e + gap);
      back = g1x.eval(0.0, b2);
    } catch (const EvalError&) {
      break;  // gap left the real branch
    }
    if (!std::isfinite(gap) || gap <= 1e-12 * (1.0 + std::abs(e))) break;
    if (std::abs(e + gap + back - e) > 1e-8 * (1.0 + std::abs(e)))
      break;  // raising and lowering no longer invert each other
    e += gap;
    es.push_back(e);
  }
  return es;
}

struct LadderVerification {
  std::vector<double> up_similarity;    // S2 psi_n vs psi_{n+1}
  std::vector<double> down_similarity;  // S1 psi_{n+1} vs psi_n
  std::vector<double> gap_error;        // |(E_{n+1}-E_n) - g2(E_n)|
  double min_similarity() const {
    double m = 1.0;
    for (double s : up_similarity) m = std::min(m, s);
    for (double s : down_similarity) m = std::min(m, s);
    return m;
  }
  double max_gap_error() const {
    double m = 0.0;
    for (double e : gap_error) m = std::max(m, e);
    return m;
  }
};

inline LadderVerification verify_ladder(const ShiftSystem& sys, const Grid& g,
                                        int levels, int skip = 8) {
  Spectrum sp = solve_lowest(sys, g, levels + 1);
  ShiftOperators ops = shift_operators(sys);
  std::vector<double> w = b_weights(sys.X, g);
  // Gap errors are measured on Richardson-extrapolated energies when the
  // grid allows it, so they reflect the ladder prediction and not the h^2
  // bias of the plain grid (which dominates for deep wells).
  std::vector<double> es = sp.energies;
  if (g.n % 2 == 1)
    for (int k = 0; k <= levels; ++k)
      es[static_cast<std::size_t>(k)] =
          eigenvalue_extrapolated(sys.X, sys.V, g, k);
  LadderVerification out;
  for (int n = 0; n < levels; ++n) {
    std::size_t un = static_cast<std::size_t>(n);
    double en = sp.energies[un];
    double enext = sp.energies[un + 1];
    std::vector<double> up =
        apply_on_grid(ops.s2.bind_energy(en), g, sp.states[un]);
    std::vector<double> down =
        apply_on_grid(ops.s1.bind_energy(enext), g, sp.states[un + 1]);
    out.up_similarity.push_back(
        cosine_similarity(up, sp.states[un + 1], w, skip));
    out.down_similarity.push_back(
        cosine_similarity(down, sp.states[un], w, skip));
    out.gap_error.push_back(
        std::abs(es[un + 1] - es[un] - gaps_at(sys, es[un]).second));
  }
  return out;
}

// Count of strict sign changes of a state, ignoring entries below a relative
// floor; for Sturm-Liouville problems state k has exactly k interior nodes.
inline int node_count(const std::vector<double>& psi, double rel_floor = 1e-6) {
  double amax = 0;
  for (double v : psi) amax = std::max(amax, std::abs(v));
  double floor = amax * rel_floor;
  int count = 0;
  double prev = 0;
  for (double v : psi) {
    if (std::abs(v) <= floor) continue;
    if (prev != 0 && (v > 0) != (prev > 0)) ++count;
    prev = v;
  }
  return count;
}

inline double max_offdiag_overlap(const Spectrum& sp,
                                  const std::vector<double>& w) {
  double worst = 0;
  for (std::size_t i = 0; i < sp.states.size(); ++i)
    for (std::size_t j = i + 1; j < sp.states.size(); ++j) {
      double uv = 0;
      for (std::size_t t = 0; t < w.size(); ++t)
        uv += w[t] * sp.states[i][t] * sp.states[j][t];
      worst = std::max(worst, std::abs(uv));
    }
  return worst;
}

}  // namespace ladderlab
