#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "supnorm/field.hpp"
#include "supnorm/finsler.hpp"
#include "supnorm/grid.hpp"
#include "supnorm/hamiltonian.hpp"
#include "supnorm/pointwise.hpp"
#include "supnorm/shape.hpp"
#include "supnorm/solver.hpp"

namespace {

using namespace supnorm;

const GridDomain& box_domain(int n) {
    static std::map<int, GridDomain> cache;
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, build_domain(make_box({0.0, 0.0}, {1.0, 1.0}),
                                           1.0 / n, 16))
                 .first;
    return it->second;
}

HamiltonianSpec weighted_gauge() {
    return HamiltonianSpec::weighted_isotropic(
        [](Vec2 p) { return 1.0 + 0.3 * p.x; }, 0.7, 1.3);
}

double tent_data(Vec2 p) {
    const double tent = std::max(0.0, 1.0 - std::abs(p.y - 0.5) / 0.5);
    return 0.5 * tent * (2.0 * p.x - 1.0);
}

void BM_EdgeWeights(benchmark::State& state) {
    const auto& dom = box_domain(static_cast<int>(state.range(0)));
    const auto ham = weighted_gauge();
    for (auto _ : state) {
        EdgeWeightTable wt(dom, ham);
        benchmark::DoNotOptimize(wt.at(1.0).data());
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(dom.edge_to.size()));
}
BENCHMARK(BM_EdgeWeights)->Arg(32)->Arg(64)->Arg(128);

void BM_ShortestPaths(benchmark::State& state) {
    const auto& dom = box_domain(static_cast<int>(state.range(0)));
    const auto ham = HamiltonianSpec::isotropic_power(2.0);
    EdgeWeightTable wt(dom, ham);
    const auto& w = wt.at(1.0);
    const std::vector<Seed> seeds = {{dom.node(dom.nx / 2, dom.ny / 2), 0.0}};
    for (auto _ : state) {
        auto field = shortest_paths(dom, w, seeds, Dir::Forward, 1.0);
        benchmark::DoNotOptimize(field.dist.data());
    }
    state.SetItemsProcessed(state.iterations() * dom.inside_count());
}
BENCHMARK(BM_ShortestPaths)->Arg(64)->Arg(128)->Arg(256);

void BM_SolveMu(benchmark::State& state) {
    const auto& dom = box_domain(static_cast<int>(state.range(0)));
    const auto ham = HamiltonianSpec::isotropic_power(1.0);
    const auto g = sample_boundary(dom, "g", tent_data);
    for (auto _ : state) {
        EdgeWeightTable wt(dom, ham);
        auto res = solve_mu(wt, g);
        benchmark::DoNotOptimize(res.mu);
    }
}
BENCHMARK(BM_SolveMu)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_PointwiseSlope(benchmark::State& state) {
    const auto& dom = box_domain(static_cast<int>(state.range(0)));
    const auto ham = HamiltonianSpec::isotropic_power(1.0);
    const auto u = sample_field(dom, "u", [](Vec2 p) { return p.x; });
    for (auto _ : state) {
        auto pf = pointwise_h(dom, ham, u);
        benchmark::DoNotOptimize(pf.h_du.values.data());
    }
    state.SetItemsProcessed(state.iterations() * dom.interior_count());
}
BENCHMARK(BM_PointwiseSlope)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
