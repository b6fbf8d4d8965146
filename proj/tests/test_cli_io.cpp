#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "supnorm/config.hpp"
#include "supnorm/field.hpp"
#include "supnorm/fields_io.hpp"
#include "supnorm/grid.hpp"
#include "supnorm/shape.hpp"
#include "supnorm/verify.hpp"

#ifdef SUPNORM_CLI_PATH
#include <sys/wait.h>
#endif

namespace fs = std::filesystem;

using supnorm::RunConfig;
using supnorm::ScalarField;
using supnorm::Vec2;
using supnorm::build_domain;
using supnorm::build_problem;
using supnorm::make_box;
using supnorm::parse_config;
using supnorm::read_boundary_csv;
using supnorm::read_field_csv;
using supnorm::read_profile_csv;
using supnorm::sample_boundary;
using supnorm::sample_field;
using supnorm::write_field_csv;
using supnorm::write_heatmap_pgm;

namespace {

const fs::path& tmp_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "supnorm-io-tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

}  // namespace

TEST_CASE("config defaults") {
    const RunConfig cfg = parse_config("{}", "");
    CHECK(cfg.domain.shape == "box");
    CHECK(cfg.domain.h == 1.0 / 64.0);
    CHECK(cfg.domain.stencil_k == 16);
    CHECK(cfg.hamiltonian.kind == "isotropic-power");
    CHECK(cfg.hamiltonian.n_dirs == 64);
    CHECK(cfg.boundary.kind == "linear");
    CHECK(cfg.solver.tol_lambda_rel == 1e-7);
    CHECK(cfg.pointwise.radii_h == std::vector<double>{6.0, 4.0, 3.0});
    CHECK(cfg.output.prefix == "out");
    CHECK_FALSE(cfg.output.emit_heatmaps);
}

TEST_CASE("config errors name the offending key") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"domain": {"shape": "box", "fancy": 1}})", ""),
                         doctest::Contains("unknown key 'fancy'"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"domain": {"stencil_k": 7}})", ""),
                         doctest::Contains("{8, 16, 32}"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config("{\n  oops\n}", ""),
                         doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"boundary": {"kind": "custom-csv", "path": "definitely_missing.csv"}})", ""),
        doctest::Contains("file not found"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"domain": {"shape": "disc", "radius": -1}})", ""),
                         doctest::Contains("must be positive"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"boundary": {"kind": "zigzag"}})", ""),
                         doctest::Contains("unknown kind"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config("[]", ""),
                         doctest::Contains("top level must be an object"),
                         std::runtime_error);

    const RunConfig cfg = parse_config(
        R"({"domain": {"shape": "disc", "h": 0.25}, "boundary": {"kind": "two-arc"}})", "");
    CHECK_THROWS_WITH_AS(build_problem(cfg), doctest::Contains("needs a box domain"),
                         std::runtime_error);
}

TEST_CASE("field csv round trip is bitwise") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), 0.125, 16);
    auto u = sample_field(dom, "u", [](Vec2 p) {
        return std::exp(p.x) * std::sin(3.0 * p.y + 0.1);
    });
    const fs::path path = tmp_dir() / "field.csv";
    write_field_csv(u, dom, path.string());

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "i,j,x,y,value");

    const ScalarField back = read_field_csv(dom, path.string());
    for (int n = 0; n < dom.node_count(); ++n) {
        if (u.has(n))
            CHECK(back[n] == u[n]);
        else
            CHECK_FALSE(back.has(n));
    }
}

TEST_CASE("boundary csv requires every boundary value") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), 0.125, 16);
    auto g = sample_boundary(dom, "g", [](Vec2 p) { return p.x - 0.3 * p.y; });
    const fs::path path = tmp_dir() / "boundary.csv";
    write_field_csv(g, dom, path.string());
    const ScalarField gb = read_boundary_csv(dom, path.string());
    for (int b : dom.boundary_nodes) CHECK(gb[b] == g[b]);

    ScalarField hole = g;
    hole[dom.boundary_nodes[3]] = std::numeric_limits<double>::quiet_NaN();
    const fs::path hpath = tmp_dir() / "boundary_hole.csv";
    write_field_csv(hole, dom, hpath.string());
    CHECK_THROWS_WITH_AS(read_boundary_csv(dom, hpath.string()),
                         doctest::Contains("has no value"), std::runtime_error);
}

TEST_CASE("heatmap pgm carries a scale sidecar") {
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), 0.125, 16);
    auto u = sample_field(dom, "u", [](Vec2 p) { return p.x - 2.0 * p.y; });
    const fs::path path = tmp_dir() / "field.pgm";
    write_heatmap_pgm(u, dom, path.string());

    const std::string raw = slurp(path);
    REQUIRE(raw.size() > 2);
    CHECK(raw.substr(0, 2) == "P5");

    const auto scale = nlohmann::json::parse(slurp(path.string() + ".scale.json"));
    CHECK(scale["min"].get<double>() == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(scale["max"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(scale["width"].get<int>() == dom.nx);
    CHECK(scale["height"].get<int>() == dom.ny);
}

TEST_CASE("profile csv round trip") {
    const std::vector<double> lambdas = {0.0, 0.5, 1.0, 2.0, 4.0};
    std::ostringstream csv;
    csv << "node,dir,lam,rho\n";
    for (int d = 0; d < 16; ++d)
        for (double lam : lambdas) csv << "0," << d << ',' << lam << ',' << lam << '\n';
    const fs::path path = tmp_dir() / "profile.csv";
    write_text(path, csv.str());

    const auto prof = read_profile_csv(path.string(), {0.0, 0.0}, 1.0, 1, 1);
    CHECK(prof.n_dirs == 16);
    CHECK(prof.lambdas == lambdas);
    CHECK(prof.rho_at(0, 3, 0.75) == doctest::Approx(0.75).epsilon(1e-14));

    write_text(tmp_dir() / "profile_short.csv",
               "node,dir,lam,rho\n0,0,0,0\n0,1,0,0\n0,2,0,0\n0,3,0,0\n"
               "0,0,1,1\n0,1,1,1\n0,2,1,1\n");
    CHECK_THROWS_WITH_AS(
        read_profile_csv((tmp_dir() / "profile_short.csv").string(), {0.0, 0.0}, 1.0, 1, 1),
        doctest::Contains("incomplete table"), std::runtime_error);

    write_text(tmp_dir() / "profile_bad.csv", "a,b\n");
    CHECK_THROWS_WITH_AS(
        read_profile_csv((tmp_dir() / "profile_bad.csv").string(), {0.0, 0.0}, 1.0, 1, 1),
        doctest::Contains("expected header"), std::runtime_error);
}

TEST_CASE("verify fixtures run in process") {
    const auto names = supnorm::verify_fixture_names();
    CHECK(names.size() == 10);
    CHECK(std::find(names.begin(), names.end(), "eikonal-1d") != names.end());
    CHECK(std::find(names.begin(), names.end(), "two-arc-inclusion") != names.end());

    supnorm::VerifyOptions opts;
    opts.fixture = "eikonal-1d";
    const auto checks = supnorm::run_verify(opts);
    REQUIRE_FALSE(checks.empty());
    CHECK(supnorm::all_pass(checks));
    for (const auto& c : checks)
        CHECK(c.name.rfind("eikonal-1d/", 0) == 0);

    const fs::path rep = tmp_dir() / "report_lib.json";
    supnorm::write_report_json(checks, 1.0, rep.string());
    const auto j = nlohmann::json::parse(slurp(rep));
    CHECK(j["schema_version"].get<int>() == 1);
    CHECK(j["n_checks"].get<std::size_t>() == checks.size());
    CHECK(j["all_pass"].get<bool>());
    CHECK(j["checks"].size() == checks.size());

    supnorm::VerifyOptions bad;
    bad.tol_scale = -1.0;
    CHECK_THROWS_AS(supnorm::run_verify(bad), std::invalid_argument);
    supnorm::VerifyOptions missing;
    missing.fixture = "bogus";
    CHECK_THROWS_WITH_AS(supnorm::run_verify(missing),
                         doctest::Contains("unknown fixture"), std::invalid_argument);
}

#ifdef SUPNORM_CLI_PATH

namespace {

// Runs through the shell, so `args` may carry VAR=value prefixes; in that
// case the caller spells out the binary path itself.
int run_cli(const std::string& args) {
    std::string cmd = args;
    if (cmd.find(SUPNORM_CLI_PATH) == std::string::npos)
        cmd = std::string(SUPNORM_CLI_PATH) + " " + cmd;
    cmd += " > /dev/null";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace
TEST_CASE("command line end to end") {
    const fs::path tmp = tmp_dir();
    const fs::path cfg = tmp / "run.json";
    write_text(cfg, R"({
  "domain": {"shape": "box", "lo": [0, 0], "hi": [1, 1], "h": 0.03125},
  "boundary": {"kind": "linear", "ax": 1, "ay": 0, "c": 0}
})");
    auto dom = build_domain(make_box({0.0, 0.0}, {1.0, 1.0}), 0.03125, 16);
    const std::string pre = (tmp / "run").string();

    CHECK(run_cli("solve --config " + cfg.string() + " --out-prefix " + pre +
                  " --emit-heatmaps") == 0);
    CHECK(slurp(pre + "_mu.txt") == "1\n");
    CHECK(fs::exists(pre + "_u_abs.pgm"));
    CHECK(fs::exists(pre + "_u_abs.pgm.scale.json"));

    const ScalarField sm = read_field_csv(dom, pre + "_s_minus.csv");
    const ScalarField ua = read_field_csv(dom, pre + "_u_abs.csv");
    for (int n = 0; n < dom.node_count(); ++n) {
        if (!dom.inside[n]) continue;
        CHECK(sm[n] == dom.pos(n).x);
        CHECK(ua[n] == doctest::Approx(dom.pos(n).x).epsilon(1e-9));
    }
    const auto trace = nlohmann::json::parse(slurp(pre + "_trace.json"));
    CHECK(trace["schema_version"].get<int>() == 1);
    CHECK(trace["mu"].get<double>() == 1.0);
    CHECK(trace["trace"][0]["lambda"].get<double>() == 0.0);
    CHECK_FALSE(trace["trace"][0]["ok"].get<bool>());

    const std::string dist_csv = (tmp / "dist.csv").string();
    CHECK(run_cli("distance --config " + cfg.string() +
                  " --lambda 1 --source 16,16 --out " + dist_csv) == 0);
    const ScalarField dist = read_field_csv(dom, dist_csv);
    CHECK(dist[dom.node(16, 16)] == 0.0);
    CHECK(dist[dom.node(20, 16)] == 0.125);
    CHECK(dist[dom.node(16, 12)] == 0.125);

    // boundary-seeded forward distances of the trace data rebuild S^+
    const std::string splus_csv = (tmp / "splus.csv").string();
    CHECK(run_cli("distance --config " + cfg.string() + " --lambda 1 --from-boundary " +
                  pre + "_s_minus.csv --out " + splus_csv) == 0);
    const ScalarField splus = read_field_csv(dom, splus_csv);
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n])
            CHECK(splus[n] == doctest::Approx(dom.pos(n).x).epsilon(1e-12));
    CHECK(run_cli("distance --config " + cfg.string() + " --lambda 1 --out " +
                  dist_csv) == 2);

    const std::string h_csv = (tmp / "h_du.csv").string();
    CHECK(run_cli("pointwise --config " + cfg.string() + " --field " + pre +
                  "_u_abs.csv --out " + h_csv) == 0);
    const ScalarField h_du = read_field_csv(dom, h_csv);
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n] && !dom.is_boundary[n])
            CHECK(h_du[n] == doctest::Approx(1.0).epsilon(1e-12));

    const std::string attain_csv = (tmp / "attain.csv").string();
    CHECK(run_cli("attain --config " + cfg.string() + " --field " + pre +
                  "_u_abs.csv --tau 0.001 --out " + attain_csv) == 0);
    const std::string attain_raw = slurp(attain_csv);
    const long rows = std::count(attain_raw.begin(), attain_raw.end(), '\n');
    CHECK(rows == dom.interior_count() + 1);
    CHECK(attain_raw.rfind("node,i,j,x,y\n", 0) == 0);

    const std::string chain_json = (tmp / "chains.json").string();
    CHECK(run_cli("chain --config " + cfg.string() + " --field " + pre +
                  "_u_abs.csv --mu 1 --from 16,16 --out " + chain_json) == 0);
    const auto chains = nlohmann::json::parse(slurp(chain_json));
    CHECK(chains["schema_version"].get<int>() == 1);
    CHECK(chains["mu"].get<double>() == 1.0);
    CHECK(chains["seed"].get<int>() == dom.node(16, 16));
    for (const char* leg : {"up", "down"}) {
        const auto nodes = chains[leg]["nodes"].get<std::vector<int>>();
        REQUIRE_FALSE(nodes.empty());
        CHECK(dom.is_boundary[nodes.back()]);
        CHECK(chains[leg]["steps"].size() == nodes.size() - 1);
        CHECK(chains[leg]["u"].size() == nodes.size());
    }
    CHECK(run_cli("chain --config " + cfg.string() + " --field " + pre +
                  "_u_abs.csv --from 16,16 --out " + chain_json) == 2);

    const std::string rep1 = (tmp / "report_t1.json").string();
    const std::string rep8 = (tmp / "report_t8.json").string();
    CHECK(run_cli("SUPNORM_THREADS=1 " + std::string(SUPNORM_CLI_PATH) +
                  " verify --fixture eikonal-1d --out " + rep1) == 0);
    CHECK(run_cli("SUPNORM_THREADS=8 " + std::string(SUPNORM_CLI_PATH) +
                  " verify --fixture eikonal-1d --out " + rep8) == 0);
    CHECK(slurp(rep1) == slurp(rep8));
    CHECK(nlohmann::json::parse(slurp(rep1))["all_pass"].get<bool>());

    const std::string rep0 = (tmp / "report_t0.json").string();
    CHECK(run_cli("verify --fixture pointwise-consistency --tol-scale 0 --out " +
                  rep0) == 1);
    const auto zero = nlohmann::json::parse(slurp(rep0));
    CHECK_FALSE(zero["all_pass"].get<bool>());
    bool named_failure = false;
    for (const auto& c : zero["checks"])
        if (!c["pass"].get<bool>() &&
            c["name"].get<std::string>().rfind("pointwise-consistency/", 0) == 0)
            named_failure = true;
    CHECK(named_failure);

    CHECK(run_cli("verify --fixture bogus --out " + (tmp / "rb.json").string()) == 2);
    CHECK(run_cli("solve --config " + (tmp / "missing.json").string()) == 2);

    const std::string list_file = (tmp / "fixtures.txt").string();
    const int rc = std::system((std::string(SUPNORM_CLI_PATH) +
                                " verify --list-fixtures > " + list_file)
                                   .c_str());
    REQUIRE(rc != -1);
    CHECK(WIFEXITED(rc));
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(slurp(list_file).find("two-arc-inclusion") != std::string::npos);
}
#endif
