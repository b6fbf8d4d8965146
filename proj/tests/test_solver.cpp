#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "supnorm/field.hpp"
#include "supnorm/finsler.hpp"
#include "supnorm/grid.hpp"
#include "supnorm/hamiltonian.hpp"
#include "supnorm/shape.hpp"
#include "supnorm/solver.hpp"
#include "test_util.hpp"

using supnorm::AbsolutizeParams;
using supnorm::Dir;
using supnorm::EdgeWeightTable;
using supnorm::GridDomain;
using supnorm::HamiltonianSpec;
using supnorm::ScalarField;
using supnorm::SolveResult;
using supnorm::SolverParams;
using supnorm::Vec2;
using supnorm::absolutize;
using supnorm::build_domain;
using supnorm::feasible;
using supnorm::local_optimality_residual;
using supnorm::lsq_gradient;
using supnorm::make_box;
using supnorm::sample_boundary;
using supnorm::sample_field;
using supnorm::shortest_paths;
using supnorm::solve_mu;
using supnorm::sup_h_of_field;

namespace {

// opposite-sign arcs on the x-faces with the steepest y-taper that keeps
// |grad g| <= 1 on the whole square; tight only along the midline
double two_face_arcs(Vec2 p) {
    return 0.5 * std::cos(2.0 * (p.y - 0.5)) * (2.0 * p.x - 1.0);
}

}  // namespace

TEST_CASE("interval problem is solved exactly") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 0.0}), 1.0 / 64.0, 16);
    auto ham = HamiltonianSpec::isotropic_power(1.0);
    EdgeWeightTable wt(dom, ham);

    auto g = sample_boundary(dom, "g", [](Vec2 p) { return p.x; });
    const SolveResult sol = solve_mu(wt, g);
    CHECK(sol.mu == 1.0);
    CHECK(std::abs(sol.residual) <= 3e-9);
    REQUIRE_FALSE(sol.trace.empty());
    CHECK(sol.trace[0].lambda == 0.0);
    CHECK_FALSE(sol.trace[0].ok);
    CHECK(std::any_of(sol.trace.begin(), sol.trace.end(),
                      [](auto s) { return s.lambda == 1.0 && s.ok; }));

    for (int n = 0; n < dom.node_count(); ++n) {
        CHECK(sol.s_minus[n] == dom.pos(n).x);
        CHECK(sol.s_plus[n] == dom.pos(n).x);
    }

    auto g2 = sample_boundary(dom, "g", [](Vec2 p) { return 2.0 * p.x; });
    CHECK(solve_mu(wt, g2).mu == 2.0);
}

TEST_CASE("box problem with linear data is solved exactly") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), 1.0 / 64.0, 16);
    auto ham = HamiltonianSpec::isotropic_power(1.0);
    EdgeWeightTable wt(dom, ham);

    auto g = sample_boundary(dom, "g", [](Vec2 p) { return p.x; });
    const SolveResult sol = solve_mu(wt, g);
    CHECK(sol.mu == 1.0);
    for (int n = 0; n < dom.node_count(); ++n) {
        if (!dom.inside[n]) continue;
        CHECK(sol.s_minus[n] == dom.pos(n).x);
        CHECK(sol.s_plus[n] == dom.pos(n).x);
    }
    const auto sup = sup_h_of_field(dom, ham, sol.s_minus);
    CHECK(sup.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sup.argmax_node >= 0);

    const auto low = feasible(wt, g, 0.5);
    CHECK_FALSE(low.ok);
    CHECK(low.residual == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(feasible(wt, g, 1.0).ok);
}

TEST_CASE("opposite-face arc data forces a midline geodesic") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), 1.0 / 32.0, 16);
    auto ham = HamiltonianSpec::isotropic_power(1.0);
    EdgeWeightTable wt(dom, ham);

    auto g = sample_boundary(dom, "g", two_face_arcs);
    const SolveResult sol = solve_mu(wt, g);
    CHECK(sol.mu == 1.0);

    for (int i = 0; i <= 32; ++i) {
        const int n = dom.node(i, 16);
        const double want = dom.pos(n).x - 0.5;
        CHECK(sol.s_minus[n] == doctest::Approx(want).epsilon(1e-12));
        CHECK(sol.s_plus[n] == doctest::Approx(want).epsilon(1e-12));
    }
    const int off = dom.node(16, 8);
    CHECK(sol.s_plus[off] - sol.s_minus[off] > 0.05);

    const ScalarField mid = [&] {
        ScalarField f = supnorm::make_field(dom, "mid");
        for (int n = 0; n < dom.node_count(); ++n)
            if (dom.inside[n]) f[n] = 0.5 * (sol.s_minus[n] + sol.s_plus[n]);
        return f;
    }();
    const ScalarField u = absolutize(dom, ham, sol.mu, mid);
    for (int n = 0; n < dom.node_count(); ++n) {
        if (!dom.inside[n]) continue;
        CHECK(u[n] >= sol.s_minus[n] - 1e-9);
        CHECK(u[n] <= sol.s_plus[n] + 1e-9);
    }
    for (int i = 0; i <= 32; ++i) {
        const int n = dom.node(i, 16);
        CHECK(u[n] == doctest::Approx(dom.pos(n).x - 0.5).epsilon(1e-12));
    }
    CHECK(local_optimality_residual(dom, ham, u, 4.0 / 32.0) <= 0.25);
}

TEST_CASE("absolutize is a fixed point on linear minimizers") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), 1.0 / 32.0, 16);
    auto ham = HamiltonianSpec::isotropic_power(1.0);
    auto v0 = sample_field(dom, "v", [](Vec2 p) { return p.x; });
    const ScalarField u = absolutize(dom, ham, 1.0, v0);
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n]) CHECK(u[n] == doctest::Approx(dom.pos(n).x).epsilon(1e-9));
    CHECK(local_optimality_residual(dom, ham, u, 4.0 / 32.0) <= 1e-9);
}

TEST_CASE("least-squares gradient is exact on linear fields") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), 1.0 / 8.0, 16);
    auto v = sample_field(dom, "v",
                          [](Vec2 p) { return 0.3 * p.x - 0.7 * p.y + 0.2; });
    for (int n = 0; n < dom.node_count(); ++n) {
        if (!dom.inside[n] || dom.is_boundary[n]) continue;
        const Vec2 grad = lsq_gradient(dom, v, n);
        CHECK(grad.x == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(grad.y == doctest::Approx(-0.7).epsilon(1e-12));
    }
}

TEST_CASE("feasibility agrees with the pairwise definition") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), 1.0 / 8.0, 16);
    auto ham = HamiltonianSpec::isotropic_power(1.0);
    EdgeWeightTable wt(dom, ham);
    auto g = sample_boundary(dom, "g", [](Vec2 p) { return p.x * p.y; });

    for (double lam : {0.8, 1.0, 1.2, 1.45}) {
        const auto& w = wt.at(lam);
        double brute = -testutil::kInf;
        for (int x : dom.boundary_nodes) {
            const auto f = shortest_paths(dom, w, {{x, 0.0}}, Dir::Forward, lam);
            for (int y : dom.boundary_nodes)
                brute = std::max(brute, g[y] - g[x] - f.dist[y]);
        }
        const auto fz = feasible(wt, g, lam);
        CHECK(fz.residual == doctest::Approx(brute).epsilon(1e-10));
        CHECK(fz.ok == (brute <= 3e-9));
    }
}

TEST_CASE("incompatible data reports failure at the cap") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 0.0}), 0.25, 16);
    supnorm::TabulatedProfile t;
    t.origin = {0.0, 0.0};
    t.h = 1.0;
    t.nx = 1;
    t.ny = 1;
    t.n_dirs = 16;
    t.lambdas = {0.0, 4.0};
    t.rho.assign(16 * 2, 0.0);
    for (int d = 0; d < 16; ++d) t.rho[d * 2 + 1] = 4.0;
    // the profile freezes above lambda = 4, so a steep jump never becomes
    // compatible and the growth loop must give up at the cap
    auto ham = HamiltonianSpec::tabulated_radial(t);
    EdgeWeightTable wt(dom, ham);
    auto g = sample_boundary(dom, "g", [](Vec2 p) { return 100.0 * p.x; });
    SolverParams p;
    p.lambda_cap = 100.0;
    CHECK_THROWS_WITH_AS(solve_mu(wt, g, p), doctest::Contains("incompatible"),
                         std::runtime_error);

    ScalarField partial = supnorm::make_field(dom, "g");
    partial[0] = 0.0;
    CHECK_THROWS_WITH_AS(solve_mu(wt, partial, {}),
                         doctest::Contains("boundary data missing"),
                         std::invalid_argument);
}
