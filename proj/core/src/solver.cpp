#include "supnorm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "patch.hpp"
#include "supnorm/parallel.hpp"

namespace supnorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Seed> boundary_seeds(const GridDomain& dom, const ScalarField& g,
                                 double sign) {
    std::vector<Seed> seeds;
    seeds.reserve(dom.boundary_nodes.size());
    for (int b : dom.boundary_nodes) {
        if (!g.has(b))
            throw std::invalid_argument("boundary data missing at node " +
                                        std::to_string(b));
        seeds.push_back({b, sign * g[b]});
    }
    if (seeds.empty()) throw std::invalid_argument("domain has no boundary nodes");
    return seeds;
}

}  // namespace

Feasibility feasible(const EdgeWeightTable& wt, const ScalarField& g,
                     double lambda, double tol_feas) {
    const GridDomain& dom = wt.domain();
    const DistanceField rev = shortest_paths(
        dom, wt.at(lambda), boundary_seeds(dom, g, -1.0), Dir::Reverse, lambda);
    double worst = -kInf;
    for (int b : dom.boundary_nodes) worst = std::max(worst, -rev.dist[b] - g[b]);
    return {worst <= tol_feas, worst};
}

ScalarField lower_extremal(const EdgeWeightTable& wt, const ScalarField& g,
                           double lambda) {
    const GridDomain& dom = wt.domain();
    const DistanceField rev = shortest_paths(
        dom, wt.at(lambda), boundary_seeds(dom, g, -1.0), Dir::Reverse, lambda);
    ScalarField f = make_field(dom, "s_minus");
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n]) f[n] = -rev.dist[n];
    return f;
}

ScalarField upper_extremal(const EdgeWeightTable& wt, const ScalarField& g,
                           double lambda) {
    const GridDomain& dom = wt.domain();
    const DistanceField fwd = shortest_paths(
        dom, wt.at(lambda), boundary_seeds(dom, g, 1.0), Dir::Forward, lambda);
    ScalarField f = make_field(dom, "s_plus");
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n]) f[n] = fwd.dist[n];
    return f;
}

SolveResult solve_mu(const EdgeWeightTable& wt, const ScalarField& g,
                     const SolverParams& p) {
    if (p.tol_lambda_rel <= 0.0)
        throw std::invalid_argument("tol_lambda_rel must be positive");
    SolveResult res;
    auto probe = [&](double lam) {
        const Feasibility f = feasible(wt, g, lam, p.tol_feas);
        res.trace.push_back({lam, f.ok, f.residual});
        return f;
    };

    const Feasibility f0 = probe(0.0);
    if (f0.ok) {
        res.mu = 0.0;
        res.residual = f0.residual;
    } else {
        double lo = 0.0;
        double hi = p.lambda_init;
        Feasibility fh;
        for (;;) {
            fh = probe(hi);
            if (fh.ok) break;
            lo = hi;
            hi *= 2.0;
            if (hi > p.lambda_cap)
                throw std::runtime_error(
                    "boundary data is incompatible for every lambda up to " +
                    std::to_string(p.lambda_cap) +
                    "; residual " + std::to_string(fh.residual));
        }
        const double tol = p.tol_lambda_rel * hi;
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const Feasibility fm = probe(mid);
            if (fm.ok) {
                hi = mid;
                fh = fm;
            } else {
                lo = mid;
            }
        }
        res.mu = hi;
        res.residual = fh.residual;
    }
    res.s_minus = lower_extremal(wt, g, res.mu);
    res.s_plus = upper_extremal(wt, g, res.mu);
    return res;
}

Vec2 lsq_gradient(const GridDomain& dom, const ScalarField& v, int node) {
    double sxx = 0.0, sxy = 0.0, syy = 0.0, bx = 0.0, by = 0.0;
    const Vec2 p0 = dom.pos(node);
    const double v0 = v[node];
    for (int e = dom.edge_begin[node]; e < dom.edge_begin[node + 1]; ++e) {
        const int to = dom.edge_to[e];
        if (!v.has(to)) continue;
        const Vec2 d = dom.pos(to) - p0;
        const double dv = v[to] - v0;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
        bx += dv * d.x;
        by += dv * d.y;
    }
    const double det = sxx * syy - sxy * sxy;
    const double scale = sxx + syy;
    if (det > 1e-12 * scale * scale)
        return {(bx * syy - by * sxy) / det, (by * sxx - bx * sxy) / det};
    Vec2 grad{0.0, 0.0};
    if (sxx > 0.0) grad.x = bx / sxx;
    if (syy > 0.0) grad.y = by / syy;
    return grad;
}

SupHResult sup_h_of_field(const GridDomain& dom, const HamiltonianSpec& ham,
                          const ScalarField& v) {
    SupHResult r;
    r.h = make_field(dom, v.name.empty() ? std::string("h") : v.name + "_h");
    parallel_for(dom.node_count(), [&](int n) {
        if (!dom.inside[n] || dom.is_boundary[n] || !v.has(n)) return;
        r.h[n] = ham.eval(dom.pos(n), lsq_gradient(dom, v, n));
    });
    r.value = 0.0;
    r.argmax_node = -1;
    for (int n = 0; n < dom.node_count(); ++n)
        if (r.h.has(n) && (r.argmax_node < 0 || r.h[n] > r.value)) {
            r.value = r.h[n];
            r.argmax_node = n;
        }
    return r;
}

namespace {

// Local feasibility gap of v's trace on the patch boundary, at the current
// lambda of ws. Mirrors the global check: max over boundary b of
// max_y { v(y) - d_V(b, y) } - v(b).
double patch_gap(const detail::PatchWorkspace& ws,
                 std::vector<std::pair<int, double>>& seeds,
                 const ScalarField& v, std::vector<double>& dist) {
    for (auto& s : seeds) s.second = -v[ws.nodes()[s.first]];
    ws.solve(seeds, /*reverse=*/true, kInf, dist);
    double worst = -kInf;
    for (const auto& s : seeds)
        worst = std::max(worst, -dist[s.first] - v[ws.nodes()[s.first]]);
    return worst;
}

// Exact local optimal value when the profile shape is lambda-invariant:
// the trace is compatible iff v(y) - v(b) <= d_V(b, y) for all boundary
// pairs, and d_V scales with alpha(lambda), so the critical lambda follows
// from the worst value/distance ratio at a reference lambda. Workspace
// weights must already be set to lambda_ref.
double patch_mu_exact(const detail::PatchWorkspace& ws,
                      const HamiltonianSpec& ham,
                      const std::vector<std::pair<int, double>>& bd,
                      const ScalarField& v, double lambda_ref,
                      std::vector<double>& dist) {
    double scale = 0.0;
    std::vector<std::pair<int, double>> one(1);
    for (const auto& s : bd) {
        one[0] = {s.first, 0.0};
        ws.solve(one, /*reverse=*/false, kInf, dist);
        const double vb = v[ws.nodes()[s.first]];
        for (const auto& t : bd) {
            if (t.first == s.first) continue;
            const double d = dist[t.first];
            if (!std::isfinite(d) || d <= 0.0) continue;
            scale = std::max(scale, (v[ws.nodes()[t.first]] - vb) / d);
        }
    }
    return ham.lambda_for_scale(scale, lambda_ref);
}

}  // namespace

ScalarField absolutize(const GridDomain& dom, const HamiltonianSpec& ham,
                       double mu, const ScalarField& v0,
                       const AbsolutizeParams& p) {
    ScalarField v = v0;
    if (!(mu > 0.0) || (p.n_sweeps <= 0 && p.n_polish <= 0)) return v;
    const double radius = p.patch_radius > 0.0 ? p.patch_radius : 4.0 * dom.h;

    std::vector<int> centers;
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n] && !dom.is_boundary[n]) centers.push_back(n);
    if (centers.empty()) return v;

    detail::PatchWorkspace ws(dom);
    std::vector<std::pair<int, double>> seeds;
    std::vector<double> dtmp, sminus, splus;
    std::vector<int> order;

    for (int sweep = 0; sweep < p.n_sweeps; ++sweep) {
        order = centers;
        deterministic_shuffle(order, p.rng_seed + 0x9e3779b97f4a7c15ull *
                                         static_cast<std::uint64_t>(sweep));
        double max_update = 0.0;
        for (int c : order) {
            ws.build_ball(c, radius);
            const int k = ws.size();
            seeds.clear();
            bool has_interior = false;
            for (int li = 0; li < k; ++li) {
                if (ws.on_patch_boundary(li))
                    seeds.emplace_back(li, 0.0);
                else
                    has_interior = true;
            }
            if (!has_interior || seeds.empty()) continue;

            // Local optimal value: exact from distance ratios when the
            // profile shape is lambda-invariant, else bisection on the
            // bracket [0, mu], which is valid because v stays compatible
            // at mu up to quadrature slack.
            double lam_v = mu;
            ws.set_lambda(ham, mu);
            if (ham.scale_invariant_profile()) {
                lam_v = std::min(mu, patch_mu_exact(ws, ham, seeds, v, mu, dtmp));
            } else if (patch_gap(ws, seeds, v, dtmp) <= p.tol_feas) {
                double lo = 0.0, hi = mu;
                const double tol = p.local_rel_tol * mu;
                while (hi - lo > tol) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    ws.set_lambda(ham, mid);
                    if (patch_gap(ws, seeds, v, dtmp) <= p.tol_feas)
                        hi = mid;
                    else
                        lo = mid;
                }
                lam_v = hi;
            }

            ws.set_lambda(ham, lam_v);
            for (auto& s : seeds) s.second = -v[ws.nodes()[s.first]];
            ws.solve(seeds, /*reverse=*/true, kInf, sminus);
            for (auto& s : seeds) s.second = v[ws.nodes()[s.first]];
            ws.solve(seeds, /*reverse=*/false, kInf, splus);
            for (int li = 0; li < k; ++li) {
                if (ws.on_patch_boundary(li)) continue;
                const int gnode = ws.nodes()[li];
                const double nv = 0.5 * (-sminus[li] + splus[li]);
                max_update = std::max(max_update, std::abs(nv - v[gnode]));
                v[gnode] = nv;
            }
        }
        if (max_update <= p.tol_fix) break;
    }

    // Polish: the same update with a one-node interior. A block assignment
    // lays exact cones over the whole patch, and a tight chain crossing a
    // later patch re-seeds that patch at the chain's level, so block sweeps
    // alone sustain spurious tight paths. The one-node version only binds
    // values through the center, letting those artifacts relax away.
    std::vector<double> dfwd, drev;
    for (int sweep = 0; sweep < p.n_polish; ++sweep) {
        order = centers;
        deterministic_shuffle(order, p.rng_seed + 0xda942042e4dd58b5ull *
                                         static_cast<std::uint64_t>(sweep + 1));
        double max_update = 0.0;
        for (int c : order) {
            ws.build_ball(c, radius);
            const int k = ws.size();
            if (k < 2) continue;
            const int lc = ws.local_of(c);
            seeds.assign(1, {lc, 0.0});

            double lam_v = mu;
            if (ham.scale_invariant_profile()) {
                ws.set_lambda(ham, mu);
                ws.solve(seeds, /*reverse=*/false, kInf, dfwd);
                ws.solve(seeds, /*reverse=*/true, kInf, drev);
                double scale = 0.0;
                for (int i = 0; i < k; ++i) {
                    if (i == lc || !std::isfinite(dfwd[i])) continue;
                    const double vi = v[ws.nodes()[i]];
                    for (int j = 0; j < k; ++j) {
                        if (j == lc || j == i || !std::isfinite(drev[j]))
                            continue;
                        const double den = dfwd[i] + drev[j];
                        if (den > 0.0)
                            scale = std::max(
                                scale, (vi - v[ws.nodes()[j]]) / den);
                    }
                }
                lam_v = std::min(mu, ham.lambda_for_scale(scale, mu));
                if (lam_v < mu) {
                    ws.set_lambda(ham, lam_v);
                    ws.solve(seeds, /*reverse=*/false, kInf, dfwd);
                    ws.solve(seeds, /*reverse=*/true, kInf, drev);
                }
            } else {
                double lo = 0.0, hi = mu;
                const double tol = p.local_rel_tol * mu;
                while (hi - lo > tol) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    ws.set_lambda(ham, mid);
                    ws.solve(seeds, /*reverse=*/false, kInf, dfwd);
                    ws.solve(seeds, /*reverse=*/true, kInf, drev);
                    double up = -kInf, dn = kInf;
                    for (int i = 0; i < k; ++i) {
                        if (i == lc) continue;
                        const double vi = v[ws.nodes()[i]];
                        if (std::isfinite(dfwd[i]))
                            up = std::max(up, vi - dfwd[i]);
                        if (std::isfinite(drev[i]))
                            dn = std::min(dn, vi + drev[i]);
                    }
                    if (up <= dn + p.tol_feas)
                        hi = mid;
                    else
                        lo = mid;
                }
                lam_v = hi;
                ws.set_lambda(ham, lam_v);
                ws.solve(seeds, /*reverse=*/false, kInf, dfwd);
                ws.solve(seeds, /*reverse=*/true, kInf, drev);
            }

            double up = -kInf, dn = kInf;
            for (int i = 0; i < k; ++i) {
                if (i == lc) continue;
                const double vi = v[ws.nodes()[i]];
                if (std::isfinite(dfwd[i])) up = std::max(up, vi - dfwd[i]);
                if (std::isfinite(drev[i])) dn = std::min(dn, vi + drev[i]);
            }
            if (up > -kInf && dn < kInf) {
                const double nv = 0.5 * (up + dn);
                max_update = std::max(max_update, std::abs(nv - v[c]));
                v[c] = nv;
            }
        }
        if (max_update <= p.tol_fix) break;
    }
    return v;
}

double local_optimality_residual(const GridDomain& dom,
                                 const HamiltonianSpec& ham,
                                 const ScalarField& v, double patch_radius,
                                 int max_patches, std::uint64_t rng_seed) {
    std::vector<int> centers;
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n] && !dom.is_boundary[n]) centers.push_back(n);
    if (centers.empty()) return 0.0;
    deterministic_shuffle(centers, rng_seed);
    if (static_cast<int>(centers.size()) > max_patches) centers.resize(max_patches);

    detail::PatchWorkspace ws(dom);
    std::vector<std::pair<int, double>> seeds;
    std::vector<double> dtmp;
    double residual = 0.0;
    for (int c : centers) {
        ws.build_ball(c, patch_radius);
        const int k = ws.size();
        seeds.clear();
        double sup_local = 0.0;
        bool any_interior = false;
        for (int li = 0; li < k; ++li) {
            const int g = ws.nodes()[li];
            if (ws.on_patch_boundary(li)) {
                seeds.emplace_back(li, 0.0);
            } else {
                any_interior = true;
                sup_local =
                    std::max(sup_local, ham.eval(dom.pos(g), lsq_gradient(dom, v, g)));
            }
        }
        if (!any_interior || seeds.empty()) continue;

        double mu_v;
        if (ham.scale_invariant_profile()) {
            ws.set_lambda(ham, 1.0);
            mu_v = patch_mu_exact(ws, ham, seeds, v, 1.0, dtmp);
        } else {
            double hi = std::max(sup_local, 1e-8);
            ws.set_lambda(ham, hi);
            int grow = 0;
            while (patch_gap(ws, seeds, v, dtmp) > 1e-9 && grow++ < 60) {
                hi *= 2.0;
                ws.set_lambda(ham, hi);
            }
            double lo = 0.0;
            const double tol = 1e-3 * hi;
            mu_v = hi;
            while (mu_v - lo > tol) {
                const double mid = 0.5 * (lo + mu_v);
                if (mid <= lo || mid >= mu_v) break;
                ws.set_lambda(ham, mid);
                if (patch_gap(ws, seeds, v, dtmp) <= 1e-9)
                    mu_v = mid;
                else
                    lo = mid;
            }
        }
        residual = std::max(residual, sup_local - mu_v);
    }
    return residual;
}

}  // namespace supnorm
