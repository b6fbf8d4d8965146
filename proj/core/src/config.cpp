#include "supnorm/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "supnorm/fields_io.hpp"

namespace supnorm {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw std::runtime_error("config: " + (where.empty() ? what : where + ": " + what));
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) bad(where, "unknown key '" + it.key() + "'");
    }
}

const json* find(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double get_num(const json& j, const std::string& where, const char* key,
               double dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_number()) bad(where + "." + key, "expected a number");
    return v->get<double>();
}

int get_int(const json& j, const std::string& where, const char* key, int dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_number_integer()) bad(where + "." + key, "expected an integer");
    return v->get<int>();
}

bool get_bool(const json& j, const std::string& where, const char* key,
              bool dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_boolean()) bad(where + "." + key, "expected a boolean");
    return v->get<bool>();
}

std::string get_str(const json& j, const std::string& where, const char* key,
                    const std::string& dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_string()) bad(where + "." + key, "expected a string");
    return v->get<std::string>();
}

std::string require_str(const json& j, const std::string& where, const char* key) {
    if (!find(j, key)) bad(where, std::string("missing key '") + key + "'");
    return get_str(j, where, key, "");
}

Vec2 get_vec2(const json& j, const std::string& where, const char* key,
              Vec2 dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() ||
        !(*v)[1].is_number())
        bad(where + "." + key, "expected [x, y]");
    return {(*v)[0].get<double>(), (*v)[1].get<double>()};
}

std::string resolve(const std::string& path, const std::string& base_dir) {
    if (path.empty() || base_dir.empty()) return path;
    const fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).string();
}

void require_file(const std::string& path, const std::string& where) {
    if (!fs::exists(path)) bad(where, "file not found: " + path);
}

void require_positive(double v, const std::string& where) {
    if (!(v > 0.0)) bad(where, "must be positive");
}

void parse_domain(const json& j, const std::string& base_dir,
                  RunConfig::Domain& d) {
    const std::string where = "domain";
    d.shape = get_str(j, where, "shape", d.shape);
    if (d.shape == "box") {
        check_keys(j, where, {"shape", "lo", "hi", "h", "stencil_k"});
        d.lo = get_vec2(j, where, "lo", d.lo);
        d.hi = get_vec2(j, where, "hi", d.hi);
        if (!(d.hi.x >= d.lo.x && d.hi.y >= d.lo.y))
            bad(where, "box needs lo <= hi componentwise");
    } else if (d.shape == "disc") {
        check_keys(j, where, {"shape", "center", "radius", "h", "stencil_k"});
        d.center = get_vec2(j, where, "center", d.center);
        d.radius = get_num(j, where, "radius", d.radius);
        require_positive(d.radius, where + ".radius");
    } else if (d.shape == "annulus" || d.shape == "slit-annulus") {
        check_keys(j, where, {"shape", "center", "r_in", "r_out", "h", "stencil_k"});
        d.center = get_vec2(j, where, "center", d.center);
        d.r_in = get_num(j, where, "r_in", d.r_in);
        d.r_out = get_num(j, where, "r_out", d.r_out);
        require_positive(d.r_in, where + ".r_in");
        if (!(d.r_out > d.r_in)) bad(where, "needs r_out > r_in");
    } else if (d.shape == "mask") {
        check_keys(j, where, {"shape", "path", "origin", "h", "stencil_k"});
        d.mask_path = resolve(require_str(j, where, "path"), base_dir);
        require_file(d.mask_path, where + ".path");
        d.mask_origin = get_vec2(j, where, "origin", d.mask_origin);
    } else {
        bad(where + ".shape",
            "unknown shape '" + d.shape +
                "' (expected box, disc, annulus, slit-annulus, or mask)");
    }
    d.h = get_num(j, where, "h", d.h);
    require_positive(d.h, where + ".h");
    d.stencil_k = get_int(j, where, "stencil_k", d.stencil_k);
    if (d.stencil_k != 8 && d.stencil_k != 16 && d.stencil_k != 32)
        bad(where + ".stencil_k", "must be one of {8, 16, 32}");
}

void parse_hamiltonian(const json& j, const std::string& base_dir,
                       RunConfig::Hamiltonian& h) {
    const std::string where = "hamiltonian";
    h.kind = get_str(j, where, "kind", h.kind);
    if (h.kind == "isotropic-power") {
        check_keys(j, where, {"kind", "power", "n_dirs"});
        h.power = get_num(j, where, "power", h.power);
        require_positive(h.power, where + ".power");
    } else if (h.kind == "weighted-isotropic") {
        check_keys(j, where, {"kind", "w0", "wx", "wy", "n_dirs"});
        h.w0 = get_num(j, where, "w0", h.w0);
        h.wx = get_num(j, where, "wx", h.wx);
        h.wy = get_num(j, where, "wy", h.wy);
    } else if (h.kind == "anisotropic-norm") {
        check_keys(j, where, {"kind", "a11", "a12", "a22", "n_dirs"});
        h.a11 = get_num(j, where, "a11", h.a11);
        h.a12 = get_num(j, where, "a12", h.a12);
        h.a22 = get_num(j, where, "a22", h.a22);
    } else if (h.kind == "plateau-radial") {
        check_keys(j, where, {"kind", "n_dirs"});
    } else if (h.kind == "tabulated-radial") {
        check_keys(j, where,
                   {"kind", "table", "table_origin", "table_h", "table_nx",
                    "table_ny", "n_dirs"});
        h.table_path = resolve(require_str(j, where, "table"), base_dir);
        require_file(h.table_path, where + ".table");
        h.table_origin = get_vec2(j, where, "table_origin", h.table_origin);
        h.table_h = get_num(j, where, "table_h", h.table_h);
        require_positive(h.table_h, where + ".table_h");
        h.table_nx = get_int(j, where, "table_nx", h.table_nx);
        h.table_ny = get_int(j, where, "table_ny", h.table_ny);
        if (h.table_nx < 1 || h.table_ny < 1)
            bad(where, "table_nx and table_ny must be at least 1");
    } else {
        bad(where + ".kind",
            "unknown kind '" + h.kind +
                "' (expected isotropic-power, weighted-isotropic, "
                "anisotropic-norm, plateau-radial, or tabulated-radial)");
    }
    h.n_dirs = get_int(j, where, "n_dirs", h.n_dirs);
    if (h.n_dirs < 8) bad(where + ".n_dirs", "must be at least 8");
}

void parse_boundary(const json& j, const std::string& base_dir,
                    RunConfig::Boundary& b) {
    const std::string where = "boundary";
    b.kind = get_str(j, where, "kind", b.kind);
    if (b.kind == "linear") {
        check_keys(j, where, {"kind", "ax", "ay", "c"});
        b.ax = get_num(j, where, "ax", b.ax);
        b.ay = get_num(j, where, "ay", b.ay);
        b.c = get_num(j, where, "c", b.c);
    } else if (b.kind == "two-arc") {
        check_keys(j, where, {"kind", "amplitude", "half_width"});
        b.amplitude = get_num(j, where, "amplitude", b.amplitude);
        b.half_width = get_num(j, where, "half_width", b.half_width);
        require_positive(b.half_width, where + ".half_width");
    } else if (b.kind == "custom-csv") {
        check_keys(j, where, {"kind", "path"});
        b.csv_path = resolve(require_str(j, where, "path"), base_dir);
        require_file(b.csv_path, where + ".path");
    } else {
        bad(where + ".kind", "unknown kind '" + b.kind +
                                 "' (expected linear, two-arc, or custom-csv)");
    }
}

void parse_solver(const json& j, RunConfig::Solver& s) {
    const std::string where = "solver";
    check_keys(j, where,
               {"tol_lambda_rel", "tol_feas", "lambda_cap", "lambda_init",
                "patch_radius_h", "n_sweeps", "n_polish", "tol_fix",
                "local_rel_tol", "rng_seed"});
    s.tol_lambda_rel = get_num(j, where, "tol_lambda_rel", s.tol_lambda_rel);
    s.tol_feas = get_num(j, where, "tol_feas", s.tol_feas);
    s.lambda_cap = get_num(j, where, "lambda_cap", s.lambda_cap);
    s.lambda_init = get_num(j, where, "lambda_init", s.lambda_init);
    s.patch_radius_h = get_num(j, where, "patch_radius_h", s.patch_radius_h);
    s.n_sweeps = get_int(j, where, "n_sweeps", s.n_sweeps);
    s.n_polish = get_int(j, where, "n_polish", s.n_polish);
    s.tol_fix = get_num(j, where, "tol_fix", s.tol_fix);
    s.local_rel_tol = get_num(j, where, "local_rel_tol", s.local_rel_tol);
    if (const json* v = find(j, "rng_seed")) {
        if (!v->is_number_unsigned() && !v->is_number_integer())
            bad(where + ".rng_seed", "expected an integer");
        s.rng_seed = v->get<std::uint64_t>();
    }
    for (const auto& [name, value] :
         {std::pair<const char*, double>{"tol_lambda_rel", s.tol_lambda_rel},
          {"tol_feas", s.tol_feas},
          {"lambda_cap", s.lambda_cap},
          {"lambda_init", s.lambda_init},
          {"patch_radius_h", s.patch_radius_h},
          {"tol_fix", s.tol_fix},
          {"local_rel_tol", s.local_rel_tol}})
        require_positive(value, where + "." + name);
    if (s.n_sweeps < 0) bad(where + ".n_sweeps", "must be nonnegative");
    if (s.n_polish < 0) bad(where + ".n_polish", "must be nonnegative");
}

void parse_pointwise(const json& j, RunConfig::Pointwise& p) {
    const std::string where = "pointwise";
    check_keys(j, where,
               {"radii_h", "tau_rel", "tau_fat_rel", "rel_tol", "max_chains"});
    if (const json* v = find(j, "radii_h")) {
        if (!v->is_array() || v->empty())
            bad(where + ".radii_h", "expected a nonempty array");
        p.radii_h.clear();
        for (const auto& e : *v) {
            if (!e.is_number()) bad(where + ".radii_h", "expected numbers");
            p.radii_h.push_back(e.get<double>());
        }
    }
    p.tau_rel = get_num(j, where, "tau_rel", p.tau_rel);
    p.tau_fat_rel = get_num(j, where, "tau_fat_rel", p.tau_fat_rel);
    p.rel_tol = get_num(j, where, "rel_tol", p.rel_tol);
    p.max_chains = get_int(j, where, "max_chains", p.max_chains);
    require_positive(p.tau_rel, where + ".tau_rel");
    require_positive(p.tau_fat_rel, where + ".tau_fat_rel");
    require_positive(p.rel_tol, where + ".rel_tol");
    if (p.max_chains < 1) bad(where + ".max_chains", "must be at least 1");
}

void parse_output(const json& j, RunConfig::Output& o) {
    const std::string where = "output";
    check_keys(j, where, {"prefix", "emit_heatmaps"});
    o.prefix = get_str(j, where, "prefix", o.prefix);
    o.emit_heatmaps = get_bool(j, where, "emit_heatmaps", o.emit_heatmaps);
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        int line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < json_text.size(); ++i) {
            if (json_text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw std::runtime_error("config: parse error at line " +
                                 std::to_string(line) + ", column " +
                                 std::to_string(col) + ": " + e.what());
    }
    if (!root.is_object()) bad("", "top level must be an object");
    check_keys(root, "",
               {"domain", "hamiltonian", "boundary", "solver", "pointwise",
                "output"});
    RunConfig cfg;
    if (const json* j = find(root, "domain")) parse_domain(*j, base_dir, cfg.domain);
    if (const json* j = find(root, "hamiltonian"))
        parse_hamiltonian(*j, base_dir, cfg.hamiltonian);
    if (const json* j = find(root, "boundary"))
        parse_boundary(*j, base_dir, cfg.boundary);
    if (const json* j = find(root, "solver")) parse_solver(*j, cfg.solver);
    if (const json* j = find(root, "pointwise")) parse_pointwise(*j, cfg.pointwise);
    if (const json* j = find(root, "output")) parse_output(*j, cfg.output);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), fs::path(path).parent_path().string());
}

namespace {

HamiltonianSpec build_hamiltonian(const RunConfig& cfg,
                                  const std::shared_ptr<Shape>& shape) {
    const auto& hc = cfg.hamiltonian;
    HamiltonianSpec ham = [&] {
        if (hc.kind == "isotropic-power")
            return HamiltonianSpec::isotropic_power(hc.power);
        if (hc.kind == "weighted-isotropic") {
            const double w0 = hc.w0, wx = hc.wx, wy = hc.wy;
            const auto box = shape->bbox();
            double wmin = std::numeric_limits<double>::infinity();
            double wmax = -wmin;
            for (const Vec2 corner :
                 {box[0], Vec2{box[1].x, box[0].y}, Vec2{box[0].x, box[1].y},
                  box[1]}) {
                const double w = w0 + wx * corner.x + wy * corner.y;
                wmin = std::min(wmin, w);
                wmax = std::max(wmax, w);
            }
            if (!(wmin > 0.0))
                bad("hamiltonian", "weight w0 + wx*x + wy*y must stay positive "
                                   "on the domain");
            return HamiltonianSpec::weighted_isotropic(
                [w0, wx, wy](Vec2 p) { return w0 + wx * p.x + wy * p.y; }, wmin,
                wmax);
        }
        if (hc.kind == "anisotropic-norm")
            return HamiltonianSpec::anisotropic_norm(hc.a11, hc.a12, hc.a22);
        if (hc.kind == "plateau-radial") return HamiltonianSpec::plateau_radial();
        return HamiltonianSpec::tabulated_radial(
            read_profile_csv(hc.table_path, hc.table_origin, hc.table_h,
                             hc.table_nx, hc.table_ny));
    }();
    ham.set_n_dirs(hc.n_dirs);
    return ham;
}

ScalarField build_boundary(const RunConfig& cfg, const GridDomain& dom) {
    const auto& bc = cfg.boundary;
    if (bc.kind == "linear") {
        const double ax = bc.ax, ay = bc.ay, c = bc.c;
        return sample_boundary(dom, "g",
                               [=](Vec2 p) { return ax * p.x + ay * p.y + c; });
    }
    if (bc.kind == "two-arc") {
        if (cfg.domain.shape != "box")
            bad("boundary", "two-arc data needs a box domain");
        const Vec2 lo = cfg.domain.lo, hi = cfg.domain.hi;
        if (!(hi.x > lo.x)) bad("boundary", "two-arc data needs positive x extent");
        const double yc = 0.5 * (lo.y + hi.y);
        const double xc = 0.5 * (lo.x + hi.x);
        const double xr = 0.5 * (hi.x - lo.x);
        const double amp = bc.amplitude;
        // cosine arcs on the two x-faces, ramped odd in x; the taper rate is
        // capped at 1/xr so |grad g| never beats the straight pull between
        // the face midpoints, which makes that pull the binding
        // value/distance ratio with a tight midline geodesic at mu = amp/xr
        const double ell = std::max(bc.half_width, xr);
        return sample_boundary(dom, "g", [=](Vec2 p) {
            const double t =
                std::min(std::abs(p.y - yc) / ell, 0.5 * std::numbers::pi);
            return amp * std::cos(t) * (p.x - xc) / xr;
        });
    }
    return read_boundary_csv(dom, bc.csv_path);
}

}  // namespace

Problem build_problem(const RunConfig& cfg) {
    const auto& d = cfg.domain;
    std::shared_ptr<Shape> shape;
    if (d.shape == "box")
        shape = make_box(d.lo, d.hi);
    else if (d.shape == "disc")
        shape = make_disc(d.center, d.radius);
    else if (d.shape == "annulus")
        shape = make_annulus(d.center, d.r_in, d.r_out);
    else if (d.shape == "slit-annulus")
        shape = make_slit_annulus(d.center, d.r_in, d.r_out);
    else
        shape = make_mask(read_pgm_mask(d.mask_path), d.mask_origin, d.h);

    GridDomain dom = build_domain(shape, d.h, d.stencil_k);
    HamiltonianSpec ham = build_hamiltonian(cfg, shape);
    ScalarField g = build_boundary(cfg, dom);
    return {std::move(dom), std::move(ham), std::move(g)};
}

SolverParams solver_params(const RunConfig& cfg) {
    SolverParams p;
    p.tol_lambda_rel = cfg.solver.tol_lambda_rel;
    p.tol_feas = cfg.solver.tol_feas;
    p.lambda_cap = cfg.solver.lambda_cap;
    p.lambda_init = cfg.solver.lambda_init;
    return p;
}

AbsolutizeParams absolutize_params(const RunConfig& cfg, double h) {
    AbsolutizeParams p;
    p.patch_radius = cfg.solver.patch_radius_h * h;
    p.n_sweeps = cfg.solver.n_sweeps;
    p.n_polish = cfg.solver.n_polish;
    p.tol_fix = cfg.solver.tol_fix;
    p.rng_seed = cfg.solver.rng_seed;
    p.local_rel_tol = cfg.solver.local_rel_tol;
    p.tol_feas = cfg.solver.tol_feas;
    return p;
}

PointwiseParams pointwise_params(const RunConfig& cfg, double h) {
    PointwiseParams p;
    for (double r : cfg.pointwise.radii_h) p.radii.push_back(r * h);
    p.rel_tol = cfg.pointwise.rel_tol;
    return p;
}

InclusionParams inclusion_params(const RunConfig& cfg, double h) {
    InclusionParams p;
    for (double r : cfg.pointwise.radii_h) p.radii.push_back(r * h);
    p.tau_rel = cfg.pointwise.tau_rel;
    p.tau_fat_rel = cfg.pointwise.tau_fat_rel;
    p.max_chains = cfg.pointwise.max_chains;
    p.rel_tol = cfg.pointwise.rel_tol;
    return p;
}

}  // namespace supnorm
