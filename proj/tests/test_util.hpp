#ifndef SUPNORM_TEST_UTIL_HPP
#define SUPNORM_TEST_UTIL_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "supnorm/grid.hpp"
#include "supnorm/hamiltonian.hpp"

namespace testutil {

constexpr double kInf = std::numeric_limits<double>::infinity();

// O(V^2) single-source relaxation; the reference for the heap solver.
// Reverse mode accumulates node -> seed costs by walking reversed edges.
inline std::vector<double> dijkstra_reference(
    const supnorm::GridDomain& dom, const std::function<double(int)>& w,
    const std::vector<std::pair<int, double>>& seeds, bool reverse = false) {
    const int nn = dom.node_count();
    std::vector<double> dist(nn, kInf);
    std::vector<char> done(nn, 0);
    for (auto [n, v] : seeds) dist[n] = std::min(dist[n], v);
    for (;;) {
        int u = -1;
        for (int n = 0; n < nn; ++n)
            if (!done[n] && std::isfinite(dist[n]) && (u < 0 || dist[n] < dist[u]))
                u = n;
        if (u < 0) break;
        done[u] = 1;
        for (int e = dom.edge_begin[u]; e < dom.edge_begin[u + 1]; ++e) {
            const int eid = reverse ? dom.edge_rev[e] : e;
            const int v = dom.edge_to[e];
            const double nd = dist[u] + w(eid);
            if (nd < dist[v]) dist[v] = nd;
        }
    }
    return dist;
}

// Largest |p| with H(x, p e) <= lambda on a dense radial grid.
inline double radial_extent_scan(const supnorm::HamiltonianSpec& ham,
                                 supnorm::Vec2 x, supnorm::Vec2 e, double lambda,
                                 double t_max = 20.0, int steps = 200000) {
    double best = 0.0;
    for (int k = 1; k <= steps; ++k) {
        const double t = t_max * k / steps;
        if (ham.eval(x, t * e) <= lambda) best = t;
    }
    return best;
}

}  // namespace testutil

#endif
