#ifndef SUPNORM_CONFIG_HPP
#define SUPNORM_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "supnorm/field.hpp"
#include "supnorm/hamiltonian.hpp"
#include "supnorm/pointwise.hpp"
#include "supnorm/solver.hpp"

namespace supnorm {

struct RunConfig {
    struct Domain {
        std::string shape = "box";  // box | disc | annulus | slit-annulus | mask
        Vec2 lo{0.0, 0.0};
        Vec2 hi{1.0, 1.0};
        Vec2 center{0.0, 0.0};
        double radius = 1.0;
        double r_in = 0.5;
        double r_out = 1.0;
        std::string mask_path;
        Vec2 mask_origin{0.0, 0.0};
        double h = 1.0 / 64.0;
        int stencil_k = 16;
    } domain;

    struct Hamiltonian {
        std::string kind = "isotropic-power";
        double power = 1.0;
        // weighted-isotropic: w(x, y) = w0 + wx*x + wy*y
        double w0 = 1.0, wx = 0.0, wy = 0.0;
        double a11 = 1.0, a12 = 0.0, a22 = 1.0;
        std::string table_path;
        Vec2 table_origin{0.0, 0.0};
        double table_h = 1.0;
        int table_nx = 1, table_ny = 1;
        int n_dirs = 64;
    } hamiltonian;

    struct Boundary {
        std::string kind = "linear";  // linear | two-arc | custom-csv
        double ax = 1.0, ay = 0.0, c = 0.0;
        double amplitude = 0.5, half_width = 0.5;
        std::string csv_path;
    } boundary;

    struct Solver {
        double tol_lambda_rel = 1e-7;
        double tol_feas = 3e-9;
        double lambda_cap = 1e6;
        double lambda_init = 1.0;
        double patch_radius_h = 4.0;
        int n_sweeps = 3;
        int n_polish = 48;
        double tol_fix = 1e-8;
        double local_rel_tol = 1e-3;
        std::uint64_t rng_seed = 12345;
    } solver;

    struct Pointwise {
        std::vector<double> radii_h = {6.0, 4.0, 3.0};
        double tau_rel = 0.05;
        double tau_fat_rel = 0.10;
        double rel_tol = 1e-3;
        int max_chains = 6;
    } pointwise;

    struct Output {
        std::string prefix = "out";
        bool emit_heatmaps = false;
    } output;
};

// Strict JSON parse: unknown keys, malformed values, and missing referenced
// files raise with the offending key path; relative paths resolve against
// base_dir.
RunConfig parse_config(const std::string& json_text, const std::string& base_dir);
RunConfig load_config(const std::string& path);

struct Problem {
    GridDomain dom;
    HamiltonianSpec ham;
    ScalarField g;
};

Problem build_problem(const RunConfig& cfg);

SolverParams solver_params(const RunConfig& cfg);
AbsolutizeParams absolutize_params(const RunConfig& cfg, double h);
PointwiseParams pointwise_params(const RunConfig& cfg, double h);
InclusionParams inclusion_params(const RunConfig& cfg, double h);

}  // namespace supnorm

#endif
