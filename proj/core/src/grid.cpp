#include "supnorm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace supnorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool segment_inside(const Shape& shape, Vec2 a, Vec2 b) {
    for (double t : {0.25, 0.5, 0.75}) {
        if (!shape.contains(a + t * (b - a))) return false;
    }
    return true;
}

}  // namespace

std::vector<StencilOffset> stencil_offsets(int stencil_k) {
    if (stencil_k != 8 && stencil_k != 16 && stencil_k != 32)
        throw std::invalid_argument("stencil_k must be one of {8, 16, 32}");
    std::vector<StencilOffset> out;
    auto add_sym = [&out](int di, int dj) {
        out.push_back({di, dj});
        out.push_back({-di, -dj});
        if (di != 0 && dj != 0) {
            out.push_back({di, -dj});
            out.push_back({-di, dj});
        }
    };
    add_sym(1, 0);
    out.push_back({0, 1});
    out.push_back({0, -1});
    add_sym(1, 1);
    if (stencil_k >= 16) {
        add_sym(2, 1);
        add_sym(1, 2);
    }
    if (stencil_k == 32) {
        add_sym(3, 1);
        add_sym(1, 3);
        add_sym(3, 2);
        add_sym(2, 3);
    }
    return out;
}

int GridDomain::inside_count() const {
    int n = 0;
    for (auto v : inside) n += v != 0;
    return n;
}

int GridDomain::interior_count() const {
    int n = 0;
    for (int k = 0; k < node_count(); ++k) n += inside[k] && !is_boundary[k];
    return n;
}

int GridDomain::nearest_node(Vec2 p, bool require_inside) const {
    int best = -1;
    double best_d = kInf;
    for (int n = 0; n < node_count(); ++n) {
        if (require_inside && !inside[n]) continue;
        double d = norm(pos(n) - p);
        if (d < best_d) {
            best_d = d;
            best = n;
        }
    }
    return best;
}

int GridDomain::find_edge(int a, int b) const {
    for (int e = edge_begin[a]; e < edge_begin[a + 1]; ++e)
        if (edge_to[e] == b) return e;
    return -1;
}

GridDomain build_domain(std::shared_ptr<const Shape> shape, double h, int stencil_k) {
    if (!shape) throw std::invalid_argument("build_domain: shape required");
    if (!(h > 0.0)) throw std::invalid_argument("build_domain: h must be positive");

    GridDomain dom;
    dom.shape = shape;
    dom.h = h;
    dom.stencil_k = stencil_k;

    auto bb = shape->bbox();
    dom.origin = bb[0];
    double span_x = bb[1].x - bb[0].x;
    double span_y = bb[1].y - bb[0].y;
    dom.nx = static_cast<int>(std::ceil(span_x / h - 1e-9)) + 1;
    dom.ny = static_cast<int>(std::ceil(span_y / h - 1e-9)) + 1;

    const int nn = dom.node_count();
    dom.inside.assign(nn, 0);
    for (int n = 0; n < nn; ++n) dom.inside[n] = shape->contains(dom.pos(n)) ? 1 : 0;
    if (dom.inside_count() == 0)
        throw std::runtime_error("build_domain: no node centers fall inside the shape");

    // degenerate axes collapse the stencil to the surviving dimension,
    // otherwise every 1-D node would look boundary-adjacent
    auto full = stencil_offsets(stencil_k);
    for (auto off : full) {
        if (dom.ny == 1 && off.dj != 0) continue;
        if (dom.nx == 1 && off.di != 0) continue;
        dom.stencil.push_back(off);
    }

    // boundary: inside node with an offset leading out of the domain (out of
    // range, outside node, or a segment that exits the shape)
    dom.is_boundary.assign(nn, 0);
    struct RawEdge {
        int a, b;
    };
    std::vector<RawEdge> raw;
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            int a = dom.node(i, j);
            if (!dom.inside[a]) continue;
            for (auto off : dom.stencil) {
                int bi = i + off.di, bj = j + off.dj;
                if (!dom.in_bounds(bi, bj)) {
                    dom.is_boundary[a] = 1;
                    continue;
                }
                int b = dom.node(bi, bj);
                if (!dom.inside[b]) {
                    dom.is_boundary[a] = 1;
                    continue;
                }
                if (!segment_inside(*shape, dom.pos(a), dom.pos(b))) {
                    dom.is_boundary[a] = 1;
                    continue;
                }
                raw.push_back({a, b});
            }
        }
    }
    for (int n = 0; n < nn; ++n)
        if (dom.is_boundary[n]) dom.boundary_nodes.push_back(n);

    // CSR (raw is already sorted by source, then stencil order; re-sort by
    // target within a row for deterministic lookups)
    dom.edge_begin.assign(nn + 1, 0);
    for (auto& e : raw) dom.edge_begin[e.a + 1]++;
    for (int n = 0; n < nn; ++n) dom.edge_begin[n + 1] += dom.edge_begin[n];
    std::stable_sort(raw.begin(), raw.end(), [](const RawEdge& x, const RawEdge& y) {
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    const int ne = static_cast<int>(raw.size());
    dom.edge_to.resize(ne);
    dom.edge_from.resize(ne);
    dom.edge_len.resize(ne);
    for (int e = 0; e < ne; ++e) {
        dom.edge_to[e] = raw[e].b;
        dom.edge_from[e] = raw[e].a;
        dom.edge_len[e] = norm(dom.pos(raw[e].b) - dom.pos(raw[e].a));
    }
    dom.edge_rev.assign(ne, -1);
    for (int e = 0; e < ne; ++e) {
        int r = dom.find_edge(dom.edge_to[e], dom.edge_from[e]);
        if (r < 0)
            throw std::runtime_error("build_domain: edge graph is not symmetric");
        dom.edge_rev[e] = r;
    }

    // connected components over the undirected graph
    dom.component.assign(nn, -1);
    int comp = 0;
    std::vector<int> stack;
    for (int n = 0; n < nn; ++n) {
        if (!dom.inside[n] || dom.component[n] >= 0) continue;
        dom.component[n] = comp;
        stack.push_back(n);
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int e = dom.edge_begin[u]; e < dom.edge_begin[u + 1]; ++e) {
                int v = dom.edge_to[e];
                if (dom.component[v] < 0) {
                    dom.component[v] = comp;
                    stack.push_back(v);
                }
            }
        }
        ++comp;
    }
    dom.n_components = comp;
    if (comp > 1)
        dom.warnings.push_back("domain interior is disconnected: " + std::to_string(comp) +
                               " components");

    dom.bdist.assign(nn, 0.0);
    for (int n = 0; n < nn; ++n)
        if (dom.inside[n]) dom.bdist[n] = shape->boundary_distance(dom.pos(n));

    return dom;
}

std::vector<double> unit_distances(const GridDomain& dom, int source, double radius_cap) {
    std::vector<double> dist(dom.node_count(), kInf);
    if (source < 0 || source >= dom.node_count() || !dom.inside[source])
        throw std::invalid_argument("unit_distances: source must be an inside node");
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        if (d > radius_cap) break;
        for (int e = dom.edge_begin[u]; e < dom.edge_begin[u + 1]; ++e) {
            int v = dom.edge_to[e];
            double nd = d + dom.edge_len[e];
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.push({nd, v});
            }
        }
    }
    return dist;
}

double intrinsic_distance(const GridDomain& dom, int a, int b) {
    if (a == b) return 0.0;
    auto dist = unit_distances(dom, a, kInf);
    return dist[b];
}

}  // namespace supnorm
