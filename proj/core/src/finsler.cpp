#include "supnorm/finsler.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

#include "supnorm/parallel.hpp"

namespace supnorm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double edge_weight(const GridDomain& dom, const HamiltonianSpec& ham,
                   double lambda, int a, int b) {
    const Vec2 pa = dom.pos(a);
    const Vec2 q = dom.pos(b) - pa;
    if (ham.spatially_constant()) return ham.conjugate(pa, q, lambda);
    const bool near_bdry = std::min(dom.bdist[a], dom.bdist[b]) < 4.0 * dom.h;
    const int panels = near_bdry ? 4 : 2;
    double sum = 0.0;
    for (int i = 0; i <= panels; ++i) {
        const double t = static_cast<double>(i) / panels;
        const double w = (i == 0 || i == panels) ? 0.5 : 1.0;
        sum += w * ham.conjugate(pa + t * q, q, lambda);
    }
    return sum / panels;
}

const std::vector<double>& EdgeWeightTable::at(double lambda) const {
    auto it = cache_.find(lambda);
    if (it != cache_.end()) return it->second;
    const GridDomain& d = *dom_;
    std::vector<double> w(d.edge_to.size(), 0.0);
    parallel_for(d.node_count(), [&](int a) {
        if (!d.inside[a]) return;
        for (int e = d.edge_begin[a]; e < d.edge_begin[a + 1]; ++e)
            w[static_cast<std::size_t>(e)] =
                edge_weight(d, *ham_, lambda, a, d.edge_to[e]);
    });
    return cache_.emplace(lambda, std::move(w)).first->second;
}

namespace {

template <class WeightFn>
DistanceField run_dijkstra(const GridDomain& dom, WeightFn&& w,
                           const std::vector<Seed>& seeds, Dir dir,
                           double lambda, const SolveOptions& opts) {
    const int n_nodes = dom.node_count();
    DistanceField f;
    f.lambda = lambda;
    f.dir = dir;
    f.dist.assign(static_cast<std::size_t>(n_nodes), kInf);
    f.pred.assign(static_cast<std::size_t>(n_nodes), -1);

    auto allowed = [&](int n) {
        return dom.inside[n] && (!opts.allowed || (*opts.allowed)[n]);
    };

    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (const Seed& s : seeds) {
        if (s.node < 0 || s.node >= n_nodes || !allowed(s.node))
            throw std::invalid_argument("seed node " + std::to_string(s.node) +
                                        " is not a usable domain node");
        if (s.value < f.dist[s.node]) {
            f.dist[s.node] = s.value;
            heap.emplace(s.value, s.node);
        }
    }

    int n_pending = 0;
    std::vector<char> want;
    if (opts.stop_targets) {
        want.assign(static_cast<std::size_t>(n_nodes), 0);
        for (int t : *opts.stop_targets)
            if (!want[t]) {
                want[t] = 1;
                ++n_pending;
            }
    }

    std::vector<char> settled(static_cast<std::size_t>(n_nodes), 0);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (settled[u] || d > f.dist[u]) continue;
        settled[u] = 1;
        if (d > opts.stop_key) break;
        if (opts.stop_targets && want[u] && --n_pending == 0) break;
        for (int e = dom.edge_begin[u]; e < dom.edge_begin[u + 1]; ++e) {
            const int v = dom.edge_to[e];
            if (settled[v] || !allowed(v)) continue;
            const double we = (dir == Dir::Forward) ? w(e) : w(dom.edge_rev[e]);
            const double alt = d + we;
            if (alt < f.dist[v]) {
                f.dist[v] = alt;
                f.pred[v] = u;
                heap.emplace(alt, v);
            } else if (alt == f.dist[v] && u < f.pred[v]) {
                f.pred[v] = u;
            }
        }
    }
    return f;
}

}  // namespace

DistanceField shortest_paths(const GridDomain& dom,
                             const std::vector<double>& edge_w,
                             const std::vector<Seed>& seeds, Dir dir,
                             double lambda, const SolveOptions& opts) {
    return run_dijkstra(
        dom, [&](int e) { return edge_w[static_cast<std::size_t>(e)]; }, seeds,
        dir, lambda, opts);
}

DistanceField shortest_paths_fn(const GridDomain& dom,
                                const std::function<double(int)>& edge_w,
                                const std::vector<Seed>& seeds, Dir dir,
                                double lambda, const SolveOptions& opts) {
    return run_dijkstra(dom, [&](int e) { return edge_w(e); }, seeds, dir,
                        lambda, opts);
}

double pairwise_distance(const GridDomain& dom,
                         const std::vector<double>& edge_w, int a, int b) {
    std::vector<int> targets{b};
    SolveOptions opts;
    opts.stop_targets = &targets;
    const DistanceField f =
        shortest_paths(dom, edge_w, {{a, 0.0}}, Dir::Forward, 0.0, opts);
    return f.dist[b];
}

std::vector<int> extract_geodesic(const DistanceField& field, int node) {
    std::vector<int> path;
    int cur = node;
    while (cur >= 0) {
        path.push_back(cur);
        cur = field.pred[cur];
        if (static_cast<int>(path.size()) > static_cast<int>(field.pred.size()))
            throw std::runtime_error("predecessor chain has a cycle");
    }
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace supnorm
