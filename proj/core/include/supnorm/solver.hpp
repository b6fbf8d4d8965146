#ifndef SUPNORM_SOLVER_HPP
#define SUPNORM_SOLVER_HPP

#include <cstdint>
#include <vector>

#include "supnorm/field.hpp"
#include "supnorm/finsler.hpp"

namespace supnorm {

struct BisectionStep {
    double lambda = 0.0;
    bool ok = false;
    double residual = 0.0;
};

struct SolveResult {
    double mu = 0.0;
    ScalarField s_minus;
    ScalarField s_plus;
    // Boundary compatibility residual at mu: max over boundary x of
    // max_y {g(y) - d_mu(x, y)} - g(x).
    double residual = 0.0;
    std::vector<BisectionStep> trace;
};

struct SolverParams {
    // Final bracket width relative to the first feasible lambda found.
    double tol_lambda_rel = 1e-7;
    double tol_feas = 3e-9;
    double lambda_cap = 1e6;
    double lambda_init = 1.0;
};

struct Feasibility {
    bool ok = false;
    double residual = 0.0;
};

// Boundary data g is compatible at lambda iff g(y) - g(x) <= d_lambda(x, y)
// for all boundary pairs; checked with one reverse transform seeded (y, -g(y)).
Feasibility feasible(const EdgeWeightTable& wt, const ScalarField& g,
                     double lambda, double tol_feas = 3e-9);

// S^-_lambda(x) = max_y { g(y) - d_lambda(x, y) } over boundary nodes y.
ScalarField lower_extremal(const EdgeWeightTable& wt, const ScalarField& g,
                           double lambda);
// S^+_lambda(x) = min_y { g(y) + d_lambda(y, x) }.
ScalarField upper_extremal(const EdgeWeightTable& wt, const ScalarField& g,
                           double lambda);

// Smallest lambda keeping g compatible, located by exponential growth plus
// bisection; the returned mu is the feasible bracket endpoint.
SolveResult solve_mu(const EdgeWeightTable& wt, const ScalarField& g,
                     const SolverParams& p = {});

// Least-squares gradient of v over the stencil neighborhood of a node.
Vec2 lsq_gradient(const GridDomain& dom, const ScalarField& v, int node);

struct SupHResult {
    double value = 0.0;
    int argmax_node = -1;
    ScalarField h;
};

// H(x, grad v) over interior nodes; the discrete stand-in for the essential
// supremum of H(x, Dv).
SupHResult sup_h_of_field(const GridDomain& dom, const HamiltonianSpec& ham,
                          const ScalarField& v);

struct AbsolutizeParams {
    double patch_radius = 0.0;  // <= 0: use 4h
    int n_sweeps = 3;
    // Balancing sweeps after the patch sweeps; each revisits one node at a
    // time, so block-assignment artifacts can relax instead of being copied
    // wholesale into the next patch.
    int n_polish = 48;
    double tol_fix = 1e-8;
    std::uint64_t rng_seed = 12345;
    // Width of each local bisection, relative to mu.
    double local_rel_tol = 1e-3;
    double tol_feas = 3e-9;
};

// Local re-solve sweeps: on intrinsic balls V around interior nodes, replace
// v inside V by the average of the local extremal extensions of v|dV at the
// local optimal value, then polish with the one-node version of the same
// update. Fixed points are locally optimal on every patch.
ScalarField absolutize(const GridDomain& dom, const HamiltonianSpec& ham,
                       double mu, const ScalarField& v0,
                       const AbsolutizeParams& p = {});

// Max over sampled patches of (sup_h of v on V) - (local optimal value of
// v|dV); near zero when v minimizes on every subdomain.
double local_optimality_residual(const GridDomain& dom,
                                 const HamiltonianSpec& ham,
                                 const ScalarField& v, double patch_radius,
                                 int max_patches = 64,
                                 std::uint64_t rng_seed = 12345);

}  // namespace supnorm

#endif
