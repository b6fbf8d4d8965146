#ifndef SUPNORM_HAMILTONIAN_HPP
#define SUPNORM_HAMILTONIAN_HPP

#include <functional>
#include <string>
#include <vector>

#include "supnorm/vec2.hpp"

namespace supnorm {

// Per-node table of sublevel-set radii rho(node, direction, lambda).
// Directions are the angles 2*pi*k/n_dirs; the lambda grid must start at 0
// and rho must be non-decreasing in lambda. Queries interpolate linearly in
// angle and lambda; above the last lambda the profile is treated as frozen
// (the Hamiltonian is +inf beyond the largest tabulated sublevel).
struct TabulatedProfile {
    Vec2 origin;
    double h = 1.0;
    int nx = 0;
    int ny = 0;
    int n_dirs = 0;
    std::vector<double> lambdas;
    std::vector<double> rho;  // [(node * n_dirs + dir) * lambdas.size() + k]

    int node_count() const { return nx * ny; }
    int nearest_node(Vec2 x) const;
    double rho_at(int node, int dir, double lambda) const;
    double radial(Vec2 x, Vec2 e, double lambda) const;
    // smallest lambda whose sublevel radius in direction e reaches |p|;
    // +inf when |p| exceeds the largest tabulated radius
    double invert(Vec2 x, Vec2 e, double p_norm) const;
    void validate() const;
};

// Level-convex Hamiltonian H(x,p) with zero minimum at p=0 and convex
// compact sublevel sets. The class exposes exactly the geometry the distance
// pipeline needs: membership (eval), sublevel radii (radial_extent), the
// support function of sublevels (conjugate), and the uniform radius bounds
// alpha(lambda) <= rho <= M(lambda).
class HamiltonianSpec {
public:
    enum class Kind {
        IsotropicPower,     // H = |p|^s / s (s != 1), H = |p| (s == 1)
        WeightedIsotropic,  // H = |p| / w(x), w > 0
        AnisotropicNorm,    // H = sqrt(p . A p), A SPD
        PlateauRadial,      // radial profile with a flat stretch, see below
        TabulatedRadial,
    };

    // Structural assumption flags. d_local_only marks kinds where the
    // sublevel fattening property holds only on compact subsets.
    struct Flags {
        bool a = true;
        bool b = true;
        bool c = true;
        bool d = true;
        bool e = true;
        bool d_local_only = false;
    };

    static HamiltonianSpec isotropic_power(double s);
    static HamiltonianSpec weighted_isotropic(std::function<double(Vec2)> w,
                                              double w_min, double w_max);
    static HamiltonianSpec anisotropic_norm(double a11, double a12, double a22);
    static HamiltonianSpec plateau_radial();
    static HamiltonianSpec tabulated_radial(TabulatedProfile table);

    Kind kind() const { return kind_; }
    const Flags& flags() const { return flags_; }
    Flags& flags() { return flags_; }
    const std::string& kind_name() const { return kind_name_; }
    bool radially_symmetric() const;
    // true when H does not depend on x (edge quadrature is then exact)
    bool spatially_constant() const;

    int n_dirs() const { return n_dirs_; }
    void set_n_dirs(int n);

    double eval(Vec2 x, Vec2 p) const;

    // sup{ t >= 0 : H(x, t e) <= lambda } for a unit direction e.
    double radial_extent(Vec2 x, Vec2 e, double lambda) const;
    // Generic route: exponential search up to M(lambda) followed by
    // membership bisection to tol_rho = 1e-10 * max(M(lambda), 1).
    double radial_extent_bisect(Vec2 x, Vec2 e, double lambda) const;

    // Support function of the sublevel set {p : H(x,p) <= lambda} at q.
    double conjugate(Vec2 x, Vec2 q, double lambda) const;
    // Polygonal approximation: max over n_dirs uniform unit directions plus
    // q/|q| of radial_extent * (e.q), clamped below at 0. Underestimates the
    // support function by O(n_dirs^-2); exact for radially symmetric kinds.
    double conjugate_sampled(Vec2 x, Vec2 q, double lambda, int n_dirs) const;

    // Uniform radius bounds over the domain: alpha(lambda)|q| <= L <= M(lambda)|q|.
    double alpha(double lambda) const;
    double bound_m(double lambda) const;

    // Upper bound on bound_m(lambda) / alpha(lambda) over all lambda > 0;
    // controls how far a d_lambda geodesic can wander in intrinsic length.
    double anisotropy_ratio() const;

    // True when the sublevel shape does not change with lambda, so
    // d_lambda = (alpha(lambda) / alpha(ref)) * d_ref. Local optimal values
    // then come from distance ratios instead of bisection.
    bool scale_invariant_profile() const;
    // Smallest lambda with alpha(lambda) >= scale * alpha(lambda_ref).
    double lambda_for_scale(double scale, double lambda_ref) const;

    // Modulus for the sublevel continuity property: the largest growth of a
    // sublevel radius between lambda - delta and lambda. Meaningful for kinds
    // with flag e = true.
    double e_modulus(double lambda, double delta) const;

    const std::function<double(Vec2)>& weight() const { return weight_; }
    double power() const { return s_; }

private:
    HamiltonianSpec() = default;

    Kind kind_ = Kind::IsotropicPower;
    Flags flags_;
    std::string kind_name_;
    int n_dirs_ = 64;

    double s_ = 1.0;

    std::function<double(Vec2)> weight_;
    double w_min_ = 1.0;
    double w_max_ = 1.0;

    double a11_ = 1.0, a12_ = 0.0, a22_ = 1.0;
    double inv11_ = 1.0, inv12_ = 0.0, inv22_ = 1.0;
    double eig_min_ = 1.0, eig_max_ = 1.0;

    TabulatedProfile table_;

    double plateau_rho(double lambda) const;
};

}  // namespace supnorm

#endif
