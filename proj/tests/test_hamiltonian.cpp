#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "supnorm/hamiltonian.hpp"
#include "test_util.hpp"

using supnorm::HamiltonianSpec;
using supnorm::TabulatedProfile;
using supnorm::Vec2;

namespace {

HamiltonianSpec weighted_linear() {
    return HamiltonianSpec::weighted_isotropic(
        [](Vec2 p) { return 1.0 + 0.3 * p.x; }, 0.7, 1.3);
}

// unit-ball profile on a single node: rho(dir, lambda) = lambda
TabulatedProfile unit_profile() {
    TabulatedProfile t;
    t.origin = {0.0, 0.0};
    t.h = 1.0;
    t.nx = 1;
    t.ny = 1;
    t.n_dirs = 16;
    t.lambdas = {0.0, 0.5, 1.0, 2.0, 4.0};
    t.rho.resize(16 * 5);
    for (int d = 0; d < 16; ++d)
        for (int k = 0; k < 5; ++k) t.rho[d * 5 + k] = t.lambdas[k];
    return t;
}

}  // namespace

TEST_CASE("radial_extent agrees with a dense membership scan") {
    const std::vector<HamiltonianSpec> kinds = {
        HamiltonianSpec::isotropic_power(1.0),
        HamiltonianSpec::isotropic_power(2.0),
        HamiltonianSpec::isotropic_power(3.0),
        weighted_linear(),
        HamiltonianSpec::anisotropic_norm(2.0, 0.3, 1.0),
        HamiltonianSpec::plateau_radial(),
    };
    const Vec2 x{0.5, -0.25};
    const std::vector<Vec2> dirs = {
        {1.0, 0.0}, {0.0, 1.0}, supnorm::normalized({1.0, 1.0}), {0.6, -0.8}};
    for (const auto& ham : kinds) {
        for (double lambda : {0.3, 0.5, 0.6, 1.2}) {
            for (Vec2 e : dirs) {
                const double closed = ham.radial_extent(x, e, lambda);
                const double scan = testutil::radial_extent_scan(ham, x, e, lambda);
                CAPTURE(ham.kind_name());
                CAPTURE(lambda);
                CHECK(std::abs(closed - scan) < 2e-4);
                CHECK(ham.radial_extent_bisect(x, e, lambda) ==
                      doctest::Approx(closed).epsilon(1e-8));
            }
        }
    }
    CHECK(HamiltonianSpec::isotropic_power(2.0).radial_extent(x, {1.0, 0.0}, 2.0) == 2.0);
}

TEST_CASE("conjugate closed forms") {
    const Vec2 x{0.0, 0.0};
    const Vec2 q{0.3, -0.7};

    auto iso = HamiltonianSpec::isotropic_power(1.0);
    CHECK(iso.conjugate(x, q, 0.8) == doctest::Approx(0.8 * norm(q)).epsilon(1e-14));
    CHECK(iso.conjugate_sampled(x, q, 0.8, 64) ==
          doctest::Approx(0.8 * norm(q)).epsilon(1e-14));
    CHECK(iso.conjugate(x, {0.0, 0.0}, 0.8) == 0.0);

    const double a11 = 2.0, a12 = 0.3, a22 = 1.0;
    auto aniso = HamiltonianSpec::anisotropic_norm(a11, a12, a22);
    const double det = a11 * a22 - a12 * a12;
    auto support = [&](Vec2 v, double lam) {
        const double quad =
            (a22 * v.x * v.x - 2.0 * a12 * v.x * v.y + a11 * v.y * v.y) / det;
        return lam * std::sqrt(quad);
    };
    for (Vec2 v : {q, Vec2{1.0, 0.0}, Vec2{-0.2, 1.4}})
        CHECK(aniso.conjugate(x, v, 1.3) == doctest::Approx(support(v, 1.3)).epsilon(1e-13));

    // polygonal sampling inscribes the sublevel set: never above, close below
    const double exact = aniso.conjugate(x, q, 1.0);
    const double sampled = aniso.conjugate_sampled(x, q, 1.0, 64);
    CHECK(sampled <= exact * (1.0 + 1e-12));
    CHECK(sampled >= exact * (1.0 - 5e-3));

    const double tr = a11 + a22;
    const double disc = std::sqrt(tr * tr / 4.0 - det);
    const double eig_min = tr / 2.0 - disc;
    const double eig_max = tr / 2.0 + disc;
    CHECK(aniso.alpha(1.0) == doctest::Approx(1.0 / std::sqrt(eig_max)).epsilon(1e-13));
    CHECK(aniso.bound_m(1.0) == doctest::Approx(1.0 / std::sqrt(eig_min)).epsilon(1e-13));
    CHECK(aniso.anisotropy_ratio() ==
          doctest::Approx(std::sqrt(eig_max / eig_min)).epsilon(1e-13));
    CHECK(iso.anisotropy_ratio() == doctest::Approx(1.0));
}

TEST_CASE("conjugate is non-decreasing in lambda") {
    const Vec2 x{0.1, 0.2};
    const Vec2 q{0.3, -0.7};
    const std::vector<HamiltonianSpec> kinds = {
        HamiltonianSpec::isotropic_power(2.0),
        HamiltonianSpec::anisotropic_norm(2.0, 0.3, 1.0),
        HamiltonianSpec::plateau_radial(),
        weighted_linear(),
    };
    for (const auto& ham : kinds) {
        double prev = ham.conjugate(x, q, 0.0);
        for (int k = 1; k <= 20; ++k) {
            const double cur = ham.conjugate(x, q, 0.1 * k);
            CHECK(cur >= prev);
            prev = cur;
        }
    }
}

TEST_CASE("plateau profile values") {
    auto ham = HamiltonianSpec::plateau_radial();
    const Vec2 x{0.0, 0.0};
    CHECK(ham.eval(x, {0.3, 0.0}) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(ham.eval(x, {0.0, 0.6}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ham.eval(x, {0.8, 0.0}) == doctest::Approx(0.55).epsilon(1e-14));

    CHECK(ham.radial_extent(x, {1.0, 0.0}, 0.4) == 0.4);
    CHECK(ham.radial_extent(x, {0.0, 1.0}, 0.5) == 0.75);
    CHECK(ham.radial_extent(x, {1.0, 0.0}, 0.6) == doctest::Approx(0.85).epsilon(1e-14));

    CHECK(ham.conjugate(x, {3.0, 4.0}, 0.5) == doctest::Approx(3.75).epsilon(1e-14));

    CHECK_FALSE(ham.flags().e);
    CHECK(HamiltonianSpec::isotropic_power(1.0).flags().e);
}

TEST_CASE("weighted isotropic evaluation and guards") {
    auto ham = weighted_linear();
    const Vec2 x{0.5, 0.0};
    CHECK(ham.eval(x, {0.23, 0.0}) == doctest::Approx(0.23 / 1.15).epsilon(1e-14));
    CHECK(ham.radial_extent(x, {0.0, 1.0}, 0.8) == doctest::Approx(0.8 * 1.15).epsilon(1e-14));
    CHECK(ham.alpha(0.8) == doctest::Approx(0.8 * 0.7).epsilon(1e-14));
    CHECK(ham.bound_m(0.8) == doctest::Approx(0.8 * 1.3).epsilon(1e-14));

    auto bad = HamiltonianSpec::weighted_isotropic(
        [](Vec2 p) { return p.x - 2.0; }, 0.1, 1.0);
    CHECK_THROWS_AS(bad.eval({0.0, 0.0}, {1.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(HamiltonianSpec::weighted_isotropic(nullptr, 0.5, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(HamiltonianSpec::weighted_isotropic([](Vec2) { return 1.0; }, 0.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("lambda_for_scale inverts the radius bound") {
    const std::vector<HamiltonianSpec> kinds = {
        HamiltonianSpec::isotropic_power(1.0),
        HamiltonianSpec::isotropic_power(2.0),
        HamiltonianSpec::isotropic_power(3.0),
        weighted_linear(),
        HamiltonianSpec::anisotropic_norm(2.0, 0.3, 1.0),
    };
    for (const auto& ham : kinds) {
        CHECK(ham.scale_invariant_profile());
        for (double ref : {0.4, 1.0, 2.5}) {
            for (double scale : {0.3, 1.0, 1.7}) {
                const double lam = ham.lambda_for_scale(scale, ref);
                CHECK(ham.alpha(lam) ==
                      doctest::Approx(scale * ham.alpha(ref)).epsilon(1e-12));
            }
        }
        CHECK(ham.lambda_for_scale(0.0, 1.0) == 0.0);
        CHECK(ham.lambda_for_scale(-1.0, 1.0) == 0.0);
    }

    // flat stretch: the inverse jumps over the plateau
    auto plateau = HamiltonianSpec::plateau_radial();
    CHECK(plateau.scale_invariant_profile());
    CHECK(plateau.lambda_for_scale(1.5, 0.4) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(plateau.lambda_for_scale(2.0, 0.4) == doctest::Approx(0.55).epsilon(1e-14));
    CHECK(plateau.lambda_for_scale(0.5, 1.0) == doctest::Approx(0.5).epsilon(1e-14));

    auto tab = HamiltonianSpec::tabulated_radial(unit_profile());
    CHECK_FALSE(tab.scale_invariant_profile());
    CHECK_THROWS_AS(tab.lambda_for_scale(1.5, 1.0), std::logic_error);
}

TEST_CASE("tabulated profile interpolation and clamping") {
    auto ham = HamiltonianSpec::tabulated_radial(unit_profile());
    const Vec2 x{0.0, 0.0};
    const Vec2 e{1.0, 0.0};

    CHECK(ham.radial_extent(x, e, 0.75) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(ham.radial_extent(x, e, 10.0) == 4.0);
    CHECK(ham.eval(x, {1.5, 0.0}) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(std::isinf(ham.eval(x, {5.0, 0.0})));

    // constant rows make the sampled support function exact
    const Vec2 q{1.0, 2.0};
    CHECK(ham.conjugate(x, q, 0.75) ==
          doctest::Approx(0.75 * norm(q)).epsilon(1e-13));

    // angular interpolation halfway between two tabulated directions
    auto lobes = unit_profile();
    for (int d = 0; d < 16; ++d)
        for (int k = 0; k < 5; ++k)
            lobes.rho[d * 5 + k] = (1.0 + 0.5 * (d % 2)) * lobes.lambdas[k];
    auto ham2 = HamiltonianSpec::tabulated_radial(lobes);
    const double theta = std::numbers::pi / 16.0;
    const Vec2 mid{std::cos(theta), std::sin(theta)};
    CHECK(ham2.radial_extent(x, mid, 1.0) == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("tabulated profile validation") {
    auto bad_start = unit_profile();
    bad_start.lambdas[0] = 0.1;
    CHECK_THROWS_WITH_AS(HamiltonianSpec::tabulated_radial(bad_start),
                         doctest::Contains("must start at 0"), std::invalid_argument);

    auto bad_size = unit_profile();
    bad_size.rho.pop_back();
    CHECK_THROWS_WITH_AS(HamiltonianSpec::tabulated_radial(bad_size),
                         doctest::Contains("rho size"), std::invalid_argument);

    auto bad_mono = unit_profile();
    bad_mono.rho[3] = 0.1;
    CHECK_THROWS_WITH_AS(HamiltonianSpec::tabulated_radial(bad_mono),
                         doctest::Contains("non-decreasing"), std::invalid_argument);

    auto bad_dirs = unit_profile();
    bad_dirs.n_dirs = 3;
    CHECK_THROWS_AS(HamiltonianSpec::tabulated_radial(bad_dirs), std::invalid_argument);

    auto ham = HamiltonianSpec::tabulated_radial(unit_profile());
    CHECK_THROWS_WITH_AS(ham.set_n_dirs(4), doctest::Contains("at least 8"),
                         std::invalid_argument);
}

TEST_CASE("sublevel continuity modulus") {
    const Vec2 x{0.0, 0.0};
    auto iso1 = HamiltonianSpec::isotropic_power(1.0);
    CHECK(iso1.e_modulus(1.0, 0.25) == doctest::Approx(0.25).epsilon(1e-14));

    auto iso2 = HamiltonianSpec::isotropic_power(2.0);
    CHECK(iso2.e_modulus(1.0, 0.25) ==
          doctest::Approx(std::sqrt(2.0) - std::sqrt(1.5)).epsilon(1e-13));

    CHECK(weighted_linear().e_modulus(1.0, 0.25) == doctest::Approx(0.325).epsilon(1e-13));

    auto aniso = HamiltonianSpec::anisotropic_norm(2.0, 0.3, 1.0);
    const double eig_min = 1.5 - std::sqrt(1.36) / 2.0;
    CHECK(aniso.e_modulus(1.0, 0.25) ==
          doctest::Approx(0.25 / std::sqrt(eig_min)).epsilon(1e-12));

    // the plateau jump shows up across lambda = 1/2
    auto plateau = HamiltonianSpec::plateau_radial();
    CHECK(plateau.e_modulus(0.6, 0.2) == doctest::Approx(0.45).epsilon(1e-13));
}

TEST_CASE("argument validation") {
    auto iso = HamiltonianSpec::isotropic_power(1.0);
    const Vec2 x{0.0, 0.0};
    CHECK_THROWS_WITH_AS(iso.radial_extent(x, {1.0, 1.0}, 1.0),
                         doctest::Contains("unit vector"), std::invalid_argument);
    CHECK_THROWS_AS(iso.radial_extent(x, {1.0, 0.0}, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(iso.conjugate(x, {1.0, 0.0}, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(iso.conjugate_sampled(x, {1.0, 0.0}, 1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(HamiltonianSpec::isotropic_power(0.0), std::invalid_argument);
    CHECK_THROWS_AS(HamiltonianSpec::anisotropic_norm(1.0, 2.0, 1.0), std::invalid_argument);
}
