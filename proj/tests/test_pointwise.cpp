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
#include "supnorm/pointwise.hpp"
#include "supnorm/shape.hpp"
#include "supnorm/solver.hpp"
#include "test_util.hpp"

using supnorm::ChainResult;
using supnorm::ChainStallError;
using supnorm::EdgeWeightTable;
using supnorm::GridDomain;
using supnorm::HamiltonianSpec;
using supnorm::PointwiseParams;
using supnorm::ScalarField;
using supnorm::Vec2;
using supnorm::ascent_chain;
using supnorm::attainment_set;
using supnorm::build_domain;
using supnorm::make_box;
using supnorm::make_disc;
using supnorm::mu_local;
using supnorm::pointwise_h;
using supnorm::sample_boundary;
using supnorm::sample_field;
using supnorm::verify_inclusion;

TEST_CASE("slope field of a linear profile is exact") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), 1.0 / 32.0, 16);
    auto ham = HamiltonianSpec::isotropic_power(1.0);
    auto u = sample_field(dom, "u", [](Vec2 p) { return p.x; });

    const auto pw = pointwise_h(dom, ham, u);
    REQUIRE(pw.radii.size() == 3);
    CHECK(pw.radii[0] > pw.radii[2]);
    for (int n = 0; n < dom.node_count(); ++n) {
        if (!dom.inside[n] || dom.is_boundary[n]) continue;
        CHECK(pw.h_du[n] == doctest::Approx(1.0).epsilon(1e-12));
        // shrinking the ball can only relax the constraint set
        for (std::size_t k = 1; k < pw.radii.size(); ++k)
            CHECK(pw.mu_of_r[k][n] <= pw.mu_of_r[k - 1][n] + 1e-12);
    }

    const auto chosen = attainment_set(dom, pw.h_du, 0.0);
    std::vector<int> interior;
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n] && !dom.is_boundary[n]) interior.push_back(n);
    CHECK(chosen == interior);
}

TEST_CASE("slope field tracks a spatially varying gauge") {
    const double h = 1.0 / 32.0;
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), h, 16);
    auto ham = HamiltonianSpec::weighted_isotropic(
        [](Vec2 p) { return 1.0 + p.x; }, 1.0, 2.0);
    auto u = sample_field(dom, "u", [](Vec2 p) { return p.x; });

    PointwiseParams params;
    params.radii = {3.0 * h};
    const auto pw = pointwise_h(dom, ham, u, params);
    for (int n = 0; n < dom.node_count(); ++n) {
        if (!dom.inside[n] || dom.is_boundary[n]) continue;
        // binding pair is the single step to the right; the edge quadrature
        // evaluates the weight at the midpoint
        const double want = 1.0 / (1.0 + dom.pos(n).x + h / 2.0);
        CHECK(pw.h_du[n] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("cone profile has unit slope on rays through the apex") {
    const double h = 1.0 / 32.0;
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), h, 16);
    auto ham = HamiltonianSpec::isotropic_power(1.0);
    const Vec2 apex{0.5, 0.5};
    auto u = sample_field(dom, "u", [&](Vec2 p) { return norm(p - apex); });

    PointwiseParams params;
    params.radii = {3.0 * h};
    const auto pw = pointwise_h(dom, ham, u, params);
    for (int n = 0; n < dom.node_count(); ++n) {
        if (!dom.inside[n] || dom.is_boundary[n]) continue;
        const Vec2 p = dom.pos(n);
        const bool on_axis = (p.x == 0.5) || (p.y == 0.5);
        if (on_axis)
            CHECK(pw.h_du[n] == doctest::Approx(1.0).epsilon(1e-12));
        else
            CHECK(pw.h_du[n] <= 1.0 + 1e-12);
    }
}

TEST_CASE("ascent chains on the interval walk to the far endpoint") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 0.0}), 1.0 / 64.0, 16);
    auto ham = HamiltonianSpec::isotropic_power(1.0);
    auto u = sample_field(dom, "u", [](Vec2 p) { return p.x; });

    const ChainResult up = ascent_chain(dom, ham, u, 32, 1.0, true);
    const std::vector<int> want = {32, 47, 55, 59, 61, 62, 64};
    CHECK(up.nodes == want);
    CHECK(up.up);
    REQUIRE(up.steps.size() == up.nodes.size() - 1);
    double total = 0.0;
    for (std::size_t k = 0; k < up.steps.size(); ++k) {
        const double du = u[up.nodes[k + 1]] - u[up.nodes[k]];
        CHECK(du == up.steps[k]);
        total += up.steps[k];
    }
    CHECK(total == 0.5);

    const ChainResult down = ascent_chain(dom, ham, u, 32, 1.0, false);
    CHECK_FALSE(down.up);
    CHECK(down.nodes.front() == 32);
    CHECK(down.nodes.back() == 0);
    double dtotal = 0.0;
    for (std::size_t k = 0; k + 1 < down.nodes.size(); ++k) {
        const double du = u[down.nodes[k]] - u[down.nodes[k + 1]];
        CHECK(du == down.steps[k]);
        CHECK(du > 0.0);
        dtotal += down.steps[k];
    }
    CHECK(dtotal == 0.5);

    // starting inside the stop band snaps straight to the boundary
    const ChainResult snap = ascent_chain(dom, ham, u, 62, 1.0, true);
    REQUIRE(snap.nodes.size() == 2);
    CHECK(snap.nodes.back() == 64);
    CHECK(snap.steps[0] == 2.0 / 64.0);
}

TEST_CASE("flat sublevel stretch stalls the chain") {
    auto dom = build_domain(make_disc({0.0, 0.0}, 1.0), 1.0 / 32.0, 16);
    auto ham = HamiltonianSpec::plateau_radial();
    auto u = sample_field(dom, "u", [](Vec2 p) { return 0.6 * p.x; });
    const int center = dom.nearest_node({0.0, 0.0});

    // slope 0.6 sits strictly inside the sublevel at mu = 1/2 (radius 3/4),
    // so no shell candidate keeps the max-slope identity
    CHECK_THROWS_AS(ascent_chain(dom, ham, u, center, 0.5, true), ChainStallError);
    try {
        ascent_chain(dom, ham, u, center, 0.5, true);
    } catch (const ChainStallError& err) {
        CHECK(err.node == center);
        CHECK(err.deficit > 0.01);
    }
}

TEST_CASE("local slope guards") {
    auto dom = build_domain(make_disc({0.0, 0.0}, 1.0), 1.0 / 16.0, 16);
    auto ham = HamiltonianSpec::isotropic_power(1.0);
    auto u = sample_field(dom, "u", [](Vec2 p) { return p.x; });
    const int center = dom.nearest_node({0.0, 0.0});
    CHECK_THROWS_AS(mu_local(dom, ham, u, center, 0.5 / 16.0), std::invalid_argument);
    CHECK_FALSE(dom.inside[0]);
    CHECK_THROWS_AS(mu_local(dom, ham, u, 0, 3.0 / 16.0), std::invalid_argument);
}

TEST_CASE("attainment report on two-face arc data") {
    const double h = 1.0 / 32.0;
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), h, 16);
    auto ham = HamiltonianSpec::isotropic_power(1.0);
    EdgeWeightTable wt(dom, ham);
    auto g = sample_boundary(dom, "g", [](Vec2 p) {
        return 0.5 * std::cos(2.0 * (p.y - 0.5)) * (2.0 * p.x - 1.0);
    });

    const auto sol = supnorm::solve_mu(wt, g);
    REQUIRE(sol.mu == 1.0);
    ScalarField mid = supnorm::make_field(dom, "mid");
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n]) mid[n] = 0.5 * (sol.s_minus[n] + sol.s_plus[n]);
    const ScalarField u = supnorm::absolutize(dom, ham, sol.mu, mid);

    const auto rep = verify_inclusion(wt, sol.mu, u, {sol.s_minus, sol.s_plus});
    CHECK(rep.mu == sol.mu);
    CHECK(rep.sup_value == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rep.tau == doctest::Approx(0.05 * rep.sup_value).epsilon(1e-12));
    CHECK(rep.tau_fat == doctest::Approx(0.10 * rep.sup_value).epsilon(1e-12));
    REQUIRE_FALSE(rep.set.empty());
    CHECK(std::is_sorted(rep.set.begin(), rep.set.end()));

    REQUIRE(rep.verdicts.size() == 2);
    for (const auto& v : rep.verdicts) {
        CHECK(v.fraction_inside >= 0.9);
        CHECK(v.n_outside <= static_cast<int>(rep.set.size()) / 10);
    }

    REQUIRE_FALSE(rep.chains.empty());
    for (const auto& ch : rep.chains) {
        REQUIRE(ch.nodes.size() >= 2);
        CHECK(dom.is_boundary[ch.nodes.front()]);
        CHECK(dom.is_boundary[ch.nodes.back()]);
        // Seeds are 1%-tight, not exactly tight, so a hop may miss the
        // max-slope identity by that slack times the step radius (at most
        // half the distance to the boundary, here 1/4).
        CHECK(ch.max_step_gap <= 1e-6 + 0.01 * 0.25);
        CHECK(ch.additivity_error <= 1e-6);
        CHECK(ch.length_error_rel <= 0.01);
        CHECK(ch.fat_fraction >= 0.9);
    }
}
