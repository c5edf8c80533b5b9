#include "ladderlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "catch2/catch_amalgamated.hpp"

using namespace ladderlab;

namespace {

constexpr double kPi = std::numbers::pi;

double sqrt2() { return std::sqrt(2.0); }

}  // namespace

// Particle in a box: X = -1, V = 0 on [0, pi] has E_k = (k+1)^2 and
// eigenfunctions sin((k+1)x).  Everything here is checked against those
// closed forms, which do not depend on any other part of the library.
TEST_CASE("box spectrum matches (k+1)^2") {
  Grid g{0.0, kPi, 2001};
  Expr X = constant(-1.0);
  Expr V = constant(0.0);
  Pencil p = discretize(X, V, g);

  SECTION("counting function") {
    CHECK(count_below(p, 0.5) == 0);
    CHECK(count_below(p, 1.5) == 1);
    CHECK(count_below(p, 10.5) == 3);  // 1, 4, 9
    auto bounds = eigen_bounds(p);
    CHECK(count_below(p, bounds.a) == 0);
    CHECK(count_below(p, bounds.b) == static_cast<int>(p.diag.size()));
  }

  SECTION("low eigenvalues, plain grid") {
    for (int k = 0; k < 4; ++k) {
      double exact = (k + 1.0) * (k + 1.0);
      CHECK(std::abs(eigenvalue_k(p, k) - exact) < 1e-4);
    }
  }

  SECTION("low eigenvalues, extrapolated") {
    CHECK(std::abs(eigenvalue_extrapolated(X, V, g, 0) - 1.0) < 1e-10);
    CHECK(std::abs(eigenvalue_extrapolated(X, V, g, 3) - 16.0) < 1e-8);
  }

  SECTION("eigenvectors match sine modes") {
    Spectrum sp = solve_lowest(X, V, g, 3);
    std::vector<double> w = b_weights(X, g);
    for (int k = 0; k < 3; ++k) {
      std::vector<double> exact(static_cast<std::size_t>(g.n));
      for (int i = 0; i < g.n; ++i)
        exact[static_cast<std::size_t>(i)] = std::sin((k + 1) * g.point(i));
      CHECK(cosine_similarity(sp.states[static_cast<std::size_t>(k)], exact, w,
                              1) > 1.0 - 1e-10);
      CHECK(node_count(sp.states[static_cast<std::size_t>(k)]) == k);
    }
    CHECK(max_offdiag_overlap(sp, w) < 1e-10);
    for (auto& st : sp.states) {
      double mx = *std::max_element(st.begin(), st.end());
      double mn = *std::min_element(st.begin(), st.end());
      CHECK(mx >= std::abs(mn));  // sign convention
    }
  }
}

TEST_CASE("solver output is deterministic") {
  Grid g{0.0, kPi, 501};
  Expr X = constant(-1.0);
  Expr V = constant(0.0);
  Spectrum a = solve_lowest(X, V, g, 2);
  Spectrum b = solve_lowest(X, V, g, 2);
  REQUIRE(a.energies == b.energies);
  REQUIRE(a.states == b.states);
}

TEST_CASE("discretize rejects positive X") {
  Grid g{-1.0, 1.0, 64};
  CHECK_THROWS_AS(discretize(parse("x"), constant(0.0), g), NumericsError);
}

TEST_CASE("harmonic family: grid energies match the ladder") {
  ShiftSystem sys = build_case(1);
  Grid g = default_grid(sys);  // [-12, 12], n = 4001
  double e0 = ground_state(sys).energy;

  SECTION("extrapolated energies to 1e-6") {
    for (int k = 0; k < 7; ++k) {
      double exact = e0 + k * sqrt2();
      CHECK(std::abs(eigenvalue_extrapolated(sys.X, sys.V, g, k) - exact) <
            1e-6);
    }
  }

  SECTION("plain grid already close") {
    Pencil p = discretize(sys.X, sys.V, g);
    CHECK(std::abs(eigenvalue_k(p, 0) - e0) < 1e-5);
  }

  SECTION("node counts") {
    Spectrum sp = solve_lowest(sys, g, 5);
    for (int k = 0; k < 5; ++k)
      CHECK(node_count(sp.states[static_cast<std::size_t>(k)]) == k);
  }
}

TEST_CASE("grid application of an operator agrees with symbolic application") {
  ShiftSystem sys = build_case(1);
  Grid g = default_grid(sys);
  GroundState gs = ground_state(sys);
  ShiftOperators ops = shift_operators(sys);
  DiffOp s2 = ops.s2.bind_energy(gs.energy);

  std::vector<double> psi = sample_on_grid(gs.psi, g);
  std::vector<double> numeric = apply_on_grid(s2, g, psi);
  std::vector<double> symbolic = sample_on_grid(s2.apply(gs.psi), g);

  double scale = 0.0;
  for (double v : symbolic) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (int i = 2; i + 2 < g.n; ++i)
    worst = std::max(worst, std::abs(numeric[static_cast<std::size_t>(i)] -
                                     symbolic[static_cast<std::size_t>(i)]));
  CHECK(worst < 1e-6 * scale);

  // The default harmonic shift operators carry no energy dependence; one from
  // the quadratic closure class does, and must refuse to act unbound.
  CHECK_FALSE(ops.s2.depends_on_energy());
  ShiftSystem deep = build_case(3);
  ShiftOperators deep_ops = shift_operators(deep);
  CHECK(deep_ops.s2.depends_on_energy());
  Grid dg = default_grid(deep, 101);
  std::vector<double> dummy(static_cast<std::size_t>(dg.n), 1.0);
  CHECK_THROWS_AS(apply_on_grid(deep_ops.s2, dg, dummy), BindingError);
}

TEST_CASE("radial-harmonic and coulomb-like ground energies from the grid") {
  SECTION("radial-harmonic") {
    ShiftSystem sys = build_case(2);
    Grid g = default_grid(sys);
    double e0 = ground_state(sys).energy;  // 5*sqrt(2)/4
    CHECK(std::abs(eigenvalue_extrapolated(sys.X, sys.V, g, 0) - e0) < 1e-6);
    CHECK(std::abs(eigenvalue_extrapolated(sys.X, sys.V, g, 1) -
                   (e0 + sqrt2())) < 1e-6);
  }
  SECTION("coulomb-like") {
    ShiftSystem sys = build_case(5);
    Grid g = default_grid(sys);
    CHECK(std::abs(ground_state(sys).energy - 2.0) < 1e-12);
    CHECK(std::abs(eigenvalue_extrapolated(sys.X, sys.V, g, 0) - 2.0) < 1e-5);
  }
  SECTION("exponential-well") {
    ShiftSystem sys = build_case(6);
    Grid g = default_grid(sys);
    double e0 = ground_state(sys).energy;  // 3*sqrt(2)/2
    CHECK(std::abs(eigenvalue_extrapolated(sys.X, sys.V, g, 0) - e0) < 1e-6);
  }
}

TEST_CASE("ladder spectrum recursion") {
  SECTION("equally spaced for the harmonic family") {
    ShiftSystem sys = build_case(1);
    std::vector<double> es = ladder_spectrum(sys, 5);
    REQUIRE(es.size() == 5);
    for (int k = 0; k < 5; ++k)
      CHECK(es[static_cast<std::size_t>(k)] ==
            Catch::Approx(es[0] + k * sqrt2()).margin(1e-12));
  }

  SECTION("finite tower for the hyperbolic well") {
    ShiftSystem sys = build_case(3);
    std::vector<double> es = ladder_spectrum(sys, 50);
    REQUIRE(es.size() == 6);  // the chain must stop on its own
    CHECK(es.back() < 0.75);  // all below the continuum threshold

    // The grid agrees: exactly six states below the threshold, at the
    // predicted energies.
    Grid g = default_grid(sys);
    Pencil p = discretize(sys.X, sys.V, g);
    CHECK(count_below(p, 0.75) == 6);
    for (int k = 0; k < 6; ++k)
      CHECK(std::abs(eigenvalue_extrapolated(sys.X, sys.V, g, k) -
                     es[static_cast<std::size_t>(k)]) < 1e-4);
  }

  SECTION("trigonometric well grows without bound") {
    ShiftSystem sys = build_case(4);
    std::vector<double> es = ladder_spectrum(sys, 6);
    REQUIRE(es.size() == 6);
    CHECK(es[0] == Catch::Approx(3.25).margin(1e-12));
    CHECK(es[1] == Catch::Approx(8.25).margin(1e-12));
    CHECK(es[5] == Catch::Approx(48.25).margin(1e-12));
  }
}

TEST_CASE("shift operators move grid eigenstates along the ladder") {
  // Every family, at its default constants and grid: the shifted state must
  // line up with the next eigenvector and the measured gaps with g2.
  for (int id : {1, 2, 3, 4, 5, 6}) {
    DYNAMIC_SECTION("family " << id) {
      ShiftSystem sys = build_case(id);
      Grid g = default_grid(sys);
      LadderVerification v = verify_ladder(sys, g, 4);
      CHECK(v.min_similarity() > 1.0 - 1e-5);
      CHECK(v.max_gap_error() < 1e-4);
    }
  }
}

TEST_CASE("ground state formulas agree with the grid eigenvector") {
  for (int id : {1, 3, 4, 6}) {
    DYNAMIC_SECTION("family " << id) {
      ShiftSystem sys = build_case(id);
      Grid g = default_grid(sys);
      GroundState gs = ground_state(sys);
      Spectrum sp = solve_lowest(sys, g, 1);
      std::vector<double> exact = sample_on_grid(gs.psi, g);
      std::vector<double> w = b_weights(sys.X, g);
      CHECK(cosine_similarity(sp.states[0], exact, w, 8) > 1.0 - 1e-8);
      CHECK(std::abs(sp.energies[0] - gs.energy) <
            1e-4 * (1.0 + std::abs(gs.energy)));
    }
  }
}
