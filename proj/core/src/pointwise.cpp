#include "supnorm/pointwise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "patch.hpp"
#include "supnorm/parallel.hpp"

namespace supnorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> default_radii(const GridDomain& dom) {
    return {6.0 * dom.h, 4.0 * dom.h, 3.0 * dom.h};
}

void check_radii(const GridDomain& dom, const std::vector<double>& radii) {
    if (radii.empty()) throw std::invalid_argument("radii must be nonempty");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] >= 2.0 * dom.h - 1e-12))
            throw std::invalid_argument("radii must be at least 2h");
        if (i > 0 && radii[i] > radii[i - 1])
            throw std::invalid_argument("radii must be decreasing");
    }
}

// One mu(x, r) with reusable workspace. hint < 0 means no known feasible
// upper bracket; a nonnegative hint must be feasible (the caller passes the
// result at a larger radius, feasible because the constraint set shrinks).
double mu_local_impl(detail::PatchWorkspace& ws, const GridDomain& dom,
                     const HamiltonianSpec& ham, const ScalarField& u, int node,
                     double r, double hint, const PointwiseParams& p,
                     std::vector<double>& dist) {
    ws.build_ball(node, r * ham.anisotropy_ratio() + 2.0 * dom.h);
    const int lc = ws.local_of(node);
    const double u0 = u[node];
    const std::vector<std::pair<int, double>> seed{{lc, 0.0}};

    bool any = false;
    for (int li = 0; li < ws.size() && !any; ++li)
        any = li != lc && ws.center_dist(li) <= r + 1e-12 && u.has(ws.nodes()[li]);
    if (!any) return 0.0;

    // Exact route: u(x') - u(x) <= d_lambda(x, x') for all constrained x',
    // and d_lambda is a common factor times d_ref, so the critical lambda
    // follows from the worst value/distance ratio.
    if (ham.scale_invariant_profile()) {
        ws.set_lambda(ham, 1.0);
        ws.solve(seed, /*reverse=*/false, kInf, dist);
        double scale = 0.0;
        for (int li = 0; li < ws.size(); ++li) {
            if (li == lc || ws.center_dist(li) > r + 1e-12) continue;
            const int g = ws.nodes()[li];
            if (!u.has(g) || !std::isfinite(dist[li]) || dist[li] <= 0.0)
                continue;
            scale = std::max(scale, (u[g] - u0) / dist[li]);
        }
        const double m = ham.lambda_for_scale(scale, 1.0);
        return m > p.lambda_cap ? kInf : m;
    }

    auto gap = [&](double lam) {
        ws.set_lambda(ham, lam);
        ws.solve(seed, /*reverse=*/false, kInf, dist);
        double worst = -kInf;
        for (int li = 0; li < ws.size(); ++li) {
            if (li == lc || ws.center_dist(li) > r + 1e-12) continue;
            const int g = ws.nodes()[li];
            if (!u.has(g)) continue;
            worst = std::max(worst, u[g] - u0 - dist[li]);
        }
        return worst;
    };

    double hi;
    if (hint >= 0.0 && std::isfinite(hint)) {
        hi = hint;
    } else {
        hi = 1.0;
        while (gap(hi) > p.tol_feas) {
            hi *= 2.0;
            if (hi > p.lambda_cap) return kInf;
        }
    }
    double lo = 0.0;
    const double tol = std::max(p.rel_tol * hi, 1e-12);
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (gap(mid) <= p.tol_feas)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace

double mu_local(const GridDomain& dom, const HamiltonianSpec& ham,
                const ScalarField& u, int node, double r,
                const PointwiseParams& p) {
    if (node < 0 || node >= dom.node_count() || !dom.inside[node])
        throw std::invalid_argument("mu_local: node must be inside the domain");
    check_radii(dom, {r});
    detail::PatchWorkspace ws(dom);
    std::vector<double> dist;
    return mu_local_impl(ws, dom, ham, u, node, r, -1.0, p, dist);
}

PointwiseField pointwise_h(const GridDomain& dom, const HamiltonianSpec& ham,
                           const ScalarField& u, const PointwiseParams& p) {
    PointwiseField out;
    out.radii = p.radii.empty() ? default_radii(dom) : p.radii;
    check_radii(dom, out.radii);
    const int n_radii = static_cast<int>(out.radii.size());
    for (int ri = 0; ri < n_radii; ++ri)
        out.mu_of_r.push_back(make_field(dom, "mu_r" + std::to_string(ri)));

    const int n_nodes = dom.node_count();
    const int n_workers = worker_count();
    parallel_for(n_workers, [&](int w) {
        detail::PatchWorkspace ws(dom);
        std::vector<double> dist;
        for (int n = w; n < n_nodes; n += n_workers) {
            if (!dom.inside[n] || dom.is_boundary[n] || !u.has(n)) continue;
            double hint = -1.0;
            for (int ri = 0; ri < n_radii; ++ri) {
                const double m =
                    mu_local_impl(ws, dom, ham, u, n, out.radii[ri], hint, p, dist);
                out.mu_of_r[ri][n] = m;
                hint = std::isfinite(m) ? m : -1.0;
            }
        }
    });
    out.h_du = out.mu_of_r.back();
    out.h_du.name = "h_du";
    return out;
}

std::vector<int> attainment_set(const GridDomain& dom, const ScalarField& h_du,
                                double tau) {
    if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
    double sup = -kInf;
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n] && !dom.is_boundary[n] && h_du.has(n))
            sup = std::max(sup, h_du[n]);
    std::vector<int> set;
    if (sup == -kInf) return set;
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n] && !dom.is_boundary[n] && h_du.has(n) &&
            h_du[n] >= sup - tau)
            set.push_back(n);
    return set;
}

namespace {

int nearest_boundary_node(const GridDomain& dom, int from) {
    const Vec2 p = dom.pos(from);
    int best = -1;
    double best_d = kInf;
    for (int b : dom.boundary_nodes) {
        const double d = norm(dom.pos(b) - p);
        if (d < best_d) {
            best_d = d;
            best = b;
        }
    }
    return best;
}

double global_hop(const GridDomain& dom, const HamiltonianSpec& ham, double mu,
                  int from, int to, bool up) {
    std::function<double(int)> wfn = [&](int e) {
        return edge_weight(dom, ham, mu, dom.edge_from[e], dom.edge_to[e]);
    };
    std::vector<int> tgt{to};
    SolveOptions opts;
    opts.stop_targets = &tgt;
    const DistanceField f = shortest_paths_fn(
        dom, wfn, {{from, 0.0}}, up ? Dir::Forward : Dir::Reverse, mu, opts);
    return f.dist[to];
}

}  // namespace

ChainResult ascent_chain(const GridDomain& dom, const HamiltonianSpec& ham,
                         const ScalarField& u, int x0, double mu, bool up,
                         double stall_tol, double stall_rel) {
    if (x0 < 0 || x0 >= dom.node_count() || !dom.inside[x0] || dom.is_boundary[x0])
        throw std::invalid_argument("chain start must be an interior node");
    if (!(mu > 0.0)) throw std::invalid_argument("chain needs mu > 0");
    const double a = ham.alpha(mu);
    const double m = ham.bound_m(mu);
    if (!(a > 0.0) || !std::isfinite(m))
        throw std::invalid_argument("degenerate metric bounds at mu");

    ChainResult out;
    out.up = up;
    out.nodes.push_back(x0);

    detail::PatchWorkspace ws(dom);
    std::vector<double> dist;
    int y = x0;
    int guard = 0;
    while (dom.bdist[y] > 2.0 * dom.h) {
        if (++guard > 100000)
            throw std::runtime_error("chain failed to reach the boundary");
        const double radius =
            std::max(a * a / (2.0 * m) * dom.bdist[y], 2.0 * dom.h * m);
        const double reach = radius + dom.h * m;
        ws.build_ball(y, reach / a + 2.0 * dom.h);
        ws.set_lambda(ham, mu);
        const int ly = ws.local_of(y);
        ws.solve({{ly, 0.0}}, /*reverse=*/!up, reach + 1e-12, dist);

        const double shell_lo = radius - dom.h * m;
        int best = -1;
        double best_obj = 0.0, best_d = 0.0;
        for (int li = 0; li < ws.size(); ++li) {
            if (li == ly) continue;
            const double d = dist[li];
            if (!(d >= shell_lo && d <= reach)) continue;
            const int g = ws.nodes()[li];
            if (!u.has(g)) continue;
            const double obj = up ? u[g] - d : u[g] + d;
            const bool better =
                best < 0 || (up ? obj > best_obj : obj < best_obj) ||
                (obj == best_obj && g < best);
            if (better) {
                best = g;
                best_obj = obj;
                best_d = d;
            }
        }
        if (best < 0) {
            // No node landed on the shell; fall back to the settled node
            // closest to the target sphere.
            double gap = kInf;
            for (int li = 0; li < ws.size(); ++li) {
                if (li == ly || !std::isfinite(dist[li]) || dist[li] > reach)
                    continue;
                const int g = ws.nodes()[li];
                if (!u.has(g)) continue;
                const double dgap = std::abs(dist[li] - radius);
                if (dgap < gap || (dgap == gap && g < best)) {
                    gap = dgap;
                    best = g;
                    best_d = dist[li];
                    best_obj = up ? u[g] - dist[li] : u[g] + dist[li];
                }
            }
            if (best < 0)
                throw std::runtime_error("chain step found no reachable candidates");
        }

        const double deficit = up ? u[y] - best_obj : best_obj - u[y];
        if (deficit > stall_tol + stall_rel * radius)
            throw ChainStallError(
                "chain stalled at node " + std::to_string(y) + ": best " +
                    (up ? std::string("ascent") : std::string("descent")) +
                    " objective falls short of u by " + std::to_string(deficit),
                y, deficit);

        out.nodes.push_back(best);
        out.steps.push_back(best_d);
        y = best;
        if (dom.is_boundary[y]) break;
    }

    if (!dom.is_boundary[y]) {
        const int b = nearest_boundary_node(dom, y);
        out.nodes.push_back(b);
        out.steps.push_back(global_hop(dom, ham, mu, y, b, up));
    }
    return out;
}

AttainmentReport verify_inclusion(const EdgeWeightTable& wt, double mu,
                                  const ScalarField& u_abs,
                                  const std::vector<ScalarField>& others,
                                  const InclusionParams& p) {
    const GridDomain& dom = wt.domain();
    const HamiltonianSpec& ham = wt.hamiltonian();
    PointwiseParams pw;
    pw.radii = p.radii.empty() ? std::vector<double>{3.0 * dom.h} : p.radii;
    pw.rel_tol = p.rel_tol;

    AttainmentReport rep;
    rep.mu = mu;
    const PointwiseField pu = pointwise_h(dom, ham, u_abs, pw);
    double sup = -kInf;
    int argmax = -1;
    for (int n = 0; n < dom.node_count(); ++n)
        if (pu.h_du.has(n) && pu.h_du[n] > sup) {
            sup = pu.h_du[n];
            argmax = n;
        }
    if (argmax < 0) throw std::runtime_error("no interior pointwise values");
    rep.sup_value = sup;
    rep.tau = p.tau_rel * sup;
    rep.tau_fat = p.tau_fat_rel * sup;
    rep.set = attainment_set(dom, pu.h_du, rep.tau);
    if (rep.set.empty())
        throw std::runtime_error("attainment set of the reference field is empty");

    for (const ScalarField& v : others) {
        const PointwiseField pv = pointwise_h(dom, ham, v, pw);
        double sup_v = -kInf;
        for (int n = 0; n < dom.node_count(); ++n)
            if (pv.h_du.has(n)) sup_v = std::max(sup_v, pv.h_du[n]);
        std::vector<char> fat(dom.node_count(), 0);
        for (int n : attainment_set(dom, pv.h_du, p.tau_fat_rel * sup_v)) fat[n] = 1;
        InclusionVerdict verdict;
        verdict.name = v.name;
        for (int n : rep.set)
            if (!fat[n]) ++verdict.n_outside;
        verdict.fraction_inside =
            1.0 - static_cast<double>(verdict.n_outside) /
                      static_cast<double>(rep.set.size());
        rep.verdicts.push_back(std::move(verdict));
    }

    std::vector<char> fat_u(dom.node_count(), 0);
    for (int n : attainment_set(dom, pu.h_du, rep.tau_fat)) fat_u[n] = 1;

    const double chain_tau = p.chain_tau_rel * sup;
    std::vector<int> eligible;
    for (int n : attainment_set(dom, pu.h_du, chain_tau))
        if (dom.bdist[n] >= p.seed_min_bdist_h * dom.h) eligible.push_back(n);
    // Tightest first: a chain inherits its seed's slope slack per unit of
    // step radius, and chains from marginal members of the eligible set can
    // drift into even slacker territory. The separation keeps the sample
    // from collapsing onto one cluster of near-duplicate chains.
    std::vector<int> order = eligible;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (pu.h_du[a] != pu.h_du[b]) return pu.h_du[a] > pu.h_du[b];
        return a < b;
    });
    const double sep = p.seed_sep_h * dom.h;
    std::vector<int> seeds;
    for (int n : order) {
        if (static_cast<int>(seeds.size()) >= p.max_chains) break;
        bool apart = true;
        for (int s : seeds)
            if (norm(dom.pos(n) - dom.pos(s)) < sep) {
                apart = false;
                break;
            }
        if (apart) seeds.push_back(n);
    }

    for (int seed : seeds) {
        const ChainResult down =
            ascent_chain(dom, ham, u_abs, seed, mu,
                         /*up=*/false, p.stall_tol, p.chain_stall_rel);
        const ChainResult upc =
            ascent_chain(dom, ham, u_abs, seed, mu,
                         /*up=*/true, p.stall_tol, p.chain_stall_rel);

        ChainRecord rec;
        rec.seed = seed;
        // Orient x_- -> seed -> x_+; downward hops reverse into forward hops.
        for (std::size_t i = down.nodes.size(); i-- > 1;) rec.nodes.push_back(down.nodes[i]);
        for (int n : upc.nodes) rec.nodes.push_back(n);

        double chain_len = 0.0;
        for (std::size_t k = 0; k < down.steps.size(); ++k) {
            const double d = down.steps[k];
            const double gap =
                std::abs(u_abs[down.nodes[k]] - u_abs[down.nodes[k + 1]] - d);
            rec.max_step_gap = std::max(rec.max_step_gap, gap);
            chain_len += d;
        }
        for (std::size_t k = 0; k < upc.steps.size(); ++k) {
            const double d = upc.steps[k];
            const double gap =
                std::abs(u_abs[upc.nodes[k + 1]] - u_abs[upc.nodes[k]] - d);
            rec.max_step_gap = std::max(rec.max_step_gap, gap);
            chain_len += d;
        }

        const int x_minus = down.nodes.back();
        const int x_plus = upc.nodes.back();
        const auto& w = wt.at(mu);
        const double d_left = pairwise_distance(dom, w, x_minus, seed);
        const double d_right = pairwise_distance(dom, w, seed, x_plus);
        const double d_total = pairwise_distance(dom, w, x_minus, x_plus);
        rec.additivity_error = std::abs(d_left + d_right - d_total);
        rec.length_error_rel =
            std::abs(chain_len - d_total) / std::max(d_total, 1e-12);

        int n_interior = 0, n_fat = 0;
        for (int n : rec.nodes)
            if (dom.inside[n] && !dom.is_boundary[n]) {
                ++n_interior;
                if (fat_u[n]) ++n_fat;
            }
        rec.fat_fraction =
            n_interior == 0 ? 1.0
                            : static_cast<double>(n_fat) /
                                  static_cast<double>(n_interior);
        rep.chains.push_back(std::move(rec));
    }
    return rep;
}

}  // namespace supnorm
