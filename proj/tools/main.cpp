#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "supnorm/config.hpp"
#include "supnorm/field.hpp"
#include "supnorm/fields_io.hpp"
#include "supnorm/finsler.hpp"
#include "supnorm/pointwise.hpp"
#include "supnorm/solver.hpp"
#include "supnorm/verify.hpp"

namespace {

using namespace supnorm;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// prefix "dir/run" maps name "mu.txt" to "dir/run_mu.txt"; a trailing slash
// keeps the prefix as a directory
std::string out_path(const std::string& prefix, const std::string& name) {
    std::string path =
        prefix.empty() ? name
                       : (prefix.back() == '/' ? prefix + name : prefix + "_" + name);
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    return path;
}

void print_warnings(const GridDomain& dom) {
    for (const std::string& w : dom.warnings) std::cerr << "warning: " << w << '\n';
}

int node_from_ij(const GridDomain& dom, const std::vector<int>& ij,
                 const std::string& flag) {
    if (ij.size() != 2)
        throw std::runtime_error(flag + " expects i,j");
    if (!dom.in_bounds(ij[0], ij[1]))
        throw std::runtime_error(flag + ": node (" + std::to_string(ij[0]) + "," +
                                 std::to_string(ij[1]) + ") is outside the grid");
    const int n = dom.node(ij[0], ij[1]);
    if (!dom.inside[n])
        throw std::runtime_error(flag + ": node (" + std::to_string(ij[0]) + "," +
                                 std::to_string(ij[1]) + ") is outside the domain");
    return n;
}

ScalarField solve_u_abs(const RunConfig& cfg, const Problem& prob,
                        SolveResult* sol_out = nullptr) {
    EdgeWeightTable wt(prob.dom, prob.ham);
    SolveResult sol = solve_mu(wt, prob.g, solver_params(cfg));
    ScalarField mid = make_field(prob.dom, "u0");
    for (int n = 0; n < prob.dom.node_count(); ++n)
        if (sol.s_minus.has(n) && sol.s_plus.has(n))
            mid[n] = 0.5 * (sol.s_minus[n] + sol.s_plus[n]);
    ScalarField u = absolutize(prob.dom, prob.ham, sol.mu, mid,
                               absolutize_params(cfg, prob.dom.h));
    u.name = "u_abs";
    if (sol_out) *sol_out = std::move(sol);
    return u;
}

double interior_sup(const GridDomain& dom, const ScalarField& f) {
    double sup = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n] && !dom.is_boundary[n] && f.has(n))
            sup = std::max(sup, f[n]);
    return sup;
}

// deepest well-resolved maximum of h_du, the default chain seed
int default_chain_seed(const GridDomain& dom, const ScalarField& h_du) {
    int best = -1;
    for (int pass = 0; pass < 2 && best < 0; ++pass) {
        const double min_bdist = pass == 0 ? 4.0 * dom.h : 0.0;
        for (int n = 0; n < dom.node_count(); ++n)
            if (h_du.has(n) && dom.bdist[n] >= min_bdist &&
                (best < 0 || h_du[n] > h_du[best]))
                best = n;
    }
    if (best < 0) throw std::runtime_error("no interior node carries a slope value");
    return best;
}

nlohmann::ordered_json chain_json(const GridDomain& dom, const ScalarField& u,
                                  const ChainResult& ch) {
    nlohmann::ordered_json j;
    j["up"] = ch.up;
    j["nodes"] = ch.nodes;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    nlohmann::ordered_json uv = nlohmann::ordered_json::array();
    for (int n : ch.nodes) {
        const Vec2 p = dom.pos(n);
        pts.push_back({p.x, p.y});
        uv.push_back(u.has(n) ? nlohmann::ordered_json(u[n])
                              : nlohmann::ordered_json(nullptr));
    }
    j["points"] = std::move(pts);
    j["u"] = std::move(uv);
    j["steps"] = ch.steps;
    return j;
}

struct SolveArgs {
    std::string config;
    std::string out_prefix;
    bool heatmaps = false;
};

int cmd_solve(const SolveArgs& a) {
    RunConfig cfg = load_config(a.config);
    if (!a.out_prefix.empty()) cfg.output.prefix = a.out_prefix;
    if (a.heatmaps) cfg.output.emit_heatmaps = true;

    const Problem prob = build_problem(cfg);
    print_warnings(prob.dom);
    SolveResult sol;
    const ScalarField u_abs = solve_u_abs(cfg, prob, &sol);

    const std::string& pre = cfg.output.prefix;
    std::ofstream(out_path(pre, "mu.txt")) << fmt17(sol.mu) << '\n';
    write_field_csv(sol.s_minus, prob.dom, out_path(pre, "s_minus.csv"));
    write_field_csv(sol.s_plus, prob.dom, out_path(pre, "s_plus.csv"));
    write_field_csv(u_abs, prob.dom, out_path(pre, "u_abs.csv"));

    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["mu"] = sol.mu;
    j["residual"] = sol.residual;
    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const BisectionStep& s : sol.trace)
        steps.push_back(
            {{"lambda", s.lambda}, {"ok", s.ok}, {"residual", s.residual}});
    j["trace"] = std::move(steps);
    std::ofstream(out_path(pre, "trace.json")) << j.dump(2) << '\n';

    if (cfg.output.emit_heatmaps) {
        write_heatmap_pgm(sol.s_minus, prob.dom, out_path(pre, "s_minus.pgm"));
        write_heatmap_pgm(sol.s_plus, prob.dom, out_path(pre, "s_plus.pgm"));
        write_heatmap_pgm(u_abs, prob.dom, out_path(pre, "u_abs.pgm"));
    }

    std::cout << "mu = " << fmt17(sol.mu) << "\n"
              << "residual = " << fmt17(sol.residual) << "\n"
              << "wrote " << out_path(pre, "mu.txt") << ", s_minus.csv, s_plus.csv, "
              << "u_abs.csv, trace.json\n";
    return 0;
}

struct DistanceArgs {
    std::string config;
    double lambda = 1.0;
    std::vector<int> source;
    std::string from_boundary;
    bool reverse = false;
    std::string out = "dist.csv";
};

int cmd_distance(const DistanceArgs& a) {
    if (!(a.lambda >= 0.0)) throw std::runtime_error("--lambda must be >= 0");
    const RunConfig cfg = load_config(a.config);
    const Problem prob = build_problem(cfg);
    print_warnings(prob.dom);

    std::vector<Seed> seeds;
    if (!a.source.empty()) {
        seeds.push_back({node_from_ij(prob.dom, a.source, "--source"), 0.0});
    } else if (!a.from_boundary.empty()) {
        const ScalarField g = read_boundary_csv(prob.dom, a.from_boundary);
        for (int n : prob.dom.boundary_nodes) seeds.push_back({n, g[n]});
    } else {
        throw std::runtime_error("distance needs --source i,j or --from-boundary");
    }

    EdgeWeightTable wt(prob.dom, prob.ham);
    const DistanceField df =
        shortest_paths(prob.dom, wt.at(a.lambda), seeds,
                       a.reverse ? Dir::Reverse : Dir::Forward, a.lambda);
    ScalarField out = make_field(prob.dom, "dist");
    int reached = 0;
    for (int n = 0; n < prob.dom.node_count(); ++n)
        if (prob.dom.inside[n] && std::isfinite(df.dist[n])) {
            out[n] = df.dist[n];
            ++reached;
        }
    write_field_csv(out, prob.dom, a.out);
    std::cout << "lambda = " << fmt17(a.lambda) << ", reached " << reached
              << " nodes, wrote " << a.out << '\n';
    return 0;
}

struct FieldArgs {
    std::string config;
    std::string field;
    std::string out;
    double tau = -1.0;  // attain: absolute threshold override
};

int cmd_pointwise(const FieldArgs& a) {
    const RunConfig cfg = load_config(a.config);
    const Problem prob = build_problem(cfg);
    print_warnings(prob.dom);
    const ScalarField u = a.field.empty() ? solve_u_abs(cfg, prob)
                                          : read_field_csv(prob.dom, a.field);
    const PointwiseField pw =
        pointwise_h(prob.dom, prob.ham, u, pointwise_params(cfg, prob.dom.h));
    const std::string path =
        a.out.empty() ? out_path(cfg.output.prefix, "h_du.csv") : a.out;
    write_field_csv(pw.h_du, prob.dom, path);
    std::cout << "sup h_du = " << fmt17(interior_sup(prob.dom, pw.h_du))
              << ", wrote " << path << '\n';
    return 0;
}

int cmd_attain(const FieldArgs& a) {
    const RunConfig cfg = load_config(a.config);
    const Problem prob = build_problem(cfg);
    print_warnings(prob.dom);
    const ScalarField u = a.field.empty() ? solve_u_abs(cfg, prob)
                                          : read_field_csv(prob.dom, a.field);
    const PointwiseField pw =
        pointwise_h(prob.dom, prob.ham, u, pointwise_params(cfg, prob.dom.h));
    const double sup = interior_sup(prob.dom, pw.h_du);
    const double tau = a.tau >= 0.0 ? a.tau : cfg.pointwise.tau_rel * sup;
    const std::vector<int> set = attainment_set(prob.dom, pw.h_du, tau);

    const std::string path =
        a.out.empty() ? out_path(cfg.output.prefix, "attain_set.csv") : a.out;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "node,i,j,x,y\n";
    for (int n : set) {
        const Vec2 p = prob.dom.pos(n);
        f << n << ',' << prob.dom.node_i(n) << ',' << prob.dom.node_j(n) << ','
          << fmt17(p.x) << ',' << fmt17(p.y) << '\n';
    }
    std::cout << "sup h_du = " << fmt17(sup) << ", tau = " << fmt17(tau) << ", "
              << set.size() << " nodes, wrote " << path << '\n';
    return 0;
}

struct ChainArgs {
    std::string config;
    std::string field;
    std::string out;
    double mu = -1.0;
    std::vector<int> from;
    double stall_tol = 1e-6;
};

int cmd_chain(const ChainArgs& a) {
    const RunConfig cfg = load_config(a.config);
    const Problem prob = build_problem(cfg);
    print_warnings(prob.dom);

    ScalarField u;
    double mu = a.mu;
    if (a.field.empty()) {
        SolveResult sol;
        u = solve_u_abs(cfg, prob, &sol);
        if (mu < 0.0) mu = sol.mu;
    } else {
        u = read_field_csv(prob.dom, a.field);
        if (mu < 0.0)
            throw std::runtime_error("--mu is required when --field is given");
    }

    int x0;
    if (!a.from.empty()) {
        x0 = node_from_ij(prob.dom, a.from, "--from");
    } else {
        const PointwiseField pw =
            pointwise_h(prob.dom, prob.ham, u, pointwise_params(cfg, prob.dom.h));
        x0 = default_chain_seed(prob.dom, pw.h_du);
    }

    try {
        const ChainResult up =
            ascent_chain(prob.dom, prob.ham, u, x0, mu, true, a.stall_tol);
        const ChainResult down =
            ascent_chain(prob.dom, prob.ham, u, x0, mu, false, a.stall_tol);

        nlohmann::ordered_json j;
        j["schema_version"] = 1;
        j["mu"] = mu;
        j["seed"] = x0;
        j["seed_point"] = {prob.dom.pos(x0).x, prob.dom.pos(x0).y};
        j["up"] = chain_json(prob.dom, u, up);
        j["down"] = chain_json(prob.dom, u, down);
        const std::string path =
            a.out.empty() ? out_path(cfg.output.prefix, "chains.json") : a.out;
        std::ofstream(path) << j.dump(2) << '\n';
        std::cout << "chain " << down.nodes.back() << " <- " << x0 << " -> "
                  << up.nodes.back() << " (" << down.nodes.size() + up.nodes.size() - 1
                  << " nodes), wrote " << path << '\n';
    } catch (const ChainStallError& e) {
        std::cerr << "chain stall at node " << e.node << " (deficit "
                  << fmt17(e.deficit) << "): " << e.what() << '\n';
        return 3;
    }
    return 0;
}

struct VerifyArgs {
    std::string fixture = "all";
    std::string out = "report.json";
    std::string scratch;
    double tol_scale = 1.0;
    bool list = false;
};

int cmd_verify(const VerifyArgs& a) {
    if (a.list) {
        for (const std::string& n : verify_fixture_names()) std::cout << n << '\n';
        return 0;
    }
    VerifyOptions opts;
    opts.fixture = a.fixture;
    opts.tol_scale = a.tol_scale;
    opts.scratch_dir = a.scratch;
    const std::vector<CheckResult> checks = run_verify(opts);
    write_report_json(checks, a.tol_scale, a.out);

    int failed = 0;
    for (const CheckResult& c : checks) {
        std::printf("%s %-44s measured %-13.6g limit %-13.6g\n",
                    c.pass ? "[PASS]" : "[FAIL]", c.name.c_str(), c.measured,
                    c.limit);
        if (!c.pass) {
            std::printf("       %s\n", c.detail.c_str());
            ++failed;
        }
    }
    std::printf("%zu checks, %d failed; report: %s\n", checks.size(), failed,
                a.out.c_str());
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver for L-infinity variational problems on gridded domains"};
    app.require_subcommand(1);

    SolveArgs sa;
    CLI::App* solve = app.add_subcommand(
        "solve", "Compute mu, the extremal minimizers, and an absolute minimizer");
    solve->add_option("--config", sa.config, "run configuration (JSON)")->required();
    solve->add_option("--out-prefix", sa.out_prefix, "output path prefix");
    solve->add_flag("--emit-heatmaps", sa.heatmaps, "also write PGM heatmaps");

    DistanceArgs da;
    CLI::App* distance = app.add_subcommand(
        "distance", "Single-source or boundary-seeded distance field");
    distance->add_option("--config", da.config, "run configuration (JSON)")
        ->required();
    distance->add_option("--lambda", da.lambda, "sublevel parameter")->required();
    distance->add_option("--source", da.source, "source node i,j")->delimiter(',');
    distance->add_option("--from-boundary", da.from_boundary,
                         "boundary data CSV; seeds every boundary node");
    distance->add_flag("--reverse", da.reverse, "distances toward the seeds");
    distance->add_option("--out", da.out, "output CSV path");

    FieldArgs pa;
    CLI::App* pointwise = app.add_subcommand(
        "pointwise", "Pointwise slope field h_du of a minimizer");
    pointwise->add_option("--config", pa.config, "run configuration (JSON)")
        ->required();
    pointwise->add_option("--field", pa.field,
                          "input field CSV (default: solve and absolutize)");
    pointwise->add_option("--out", pa.out, "output CSV path");

    FieldArgs aa;
    CLI::App* attain =
        app.add_subcommand("attain", "Attainment set of a minimizer");
    attain->add_option("--config", aa.config, "run configuration (JSON)")
        ->required();
    attain->add_option("--field", aa.field,
                       "input field CSV (default: solve and absolutize)");
    attain->add_option("--tau", aa.tau, "absolute attainment threshold");
    attain->add_option("--out", aa.out, "output CSV path");

    ChainArgs ca;
    CLI::App* chain = app.add_subcommand(
        "chain", "Max-slope ascent chains through a point of maximal slope");
    chain->add_option("--config", ca.config, "run configuration (JSON)")->required();
    chain->add_option("--field", ca.field,
                      "input field CSV (default: solve and absolutize)");
    chain->add_option("--mu", ca.mu, "optimal value for the chain metric");
    chain->add_option("--from", ca.from, "start node i,j (default: slope argmax)")
        ->delimiter(',');
    chain->add_option("--stall-tol", ca.stall_tol, "max-slope deficit tolerance");
    chain->add_option("--out", ca.out, "output JSON path");

    VerifyArgs va;
    CLI::App* verify = app.add_subcommand(
        "verify", "Run the named acceptance fixtures and write report.json");
    verify->add_option("--fixture", va.fixture, "fixture name or 'all'");
    verify->add_option("--out", va.out, "report path");
    verify->add_option("--tol-scale", va.tol_scale, "scale every check limit");
    verify->add_option("--scratch", va.scratch, "scratch directory");
    verify->add_flag("--list-fixtures", va.list, "print fixture names and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(sa);
        if (distance->parsed()) return cmd_distance(da);
        if (pointwise->parsed()) return cmd_pointwise(pa);
        if (attain->parsed()) return cmd_attain(aa);
        if (chain->parsed()) return cmd_chain(ca);
        if (verify->parsed()) return cmd_verify(va);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
