#include "supnorm/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace supnorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// slack for the membership test H(x, t e) <= lambda + kMemberSlack
constexpr double kMemberSlack = 1e-12;

// The plateau profile: H(p) = |p| for |p| < 1/2, H = 1/2 for 1/2 <= |p| <= 3/4,
// H = |p| - 1/4 beyond. The level set {H = 1/2} has nonempty interior, which
// is exactly the sublevel-continuity failure the negative controls exercise.
constexpr double kPlateauLo = 0.5;
constexpr double kPlateauHi = 0.75;

void check_unit(Vec2 e) {
    if (std::abs(norm(e) - 1.0) > 1e-9)
        throw std::invalid_argument("radial_extent: direction must be a unit vector");
}

void check_lambda(double lambda) {
    if (!(lambda >= 0.0))
        throw std::invalid_argument("lambda must be non-negative");
}

}  // namespace

int TabulatedProfile::nearest_node(Vec2 x) const {
    auto clamp = [](int v, int lo, int hi) { return std::min(std::max(v, lo), hi); };
    int i = clamp(static_cast<int>(std::lround((x.x - origin.x) / h)), 0, nx - 1);
    int j = clamp(static_cast<int>(std::lround((x.y - origin.y) / h)), 0, ny - 1);
    return j * nx + i;
}

double TabulatedProfile::rho_at(int node, int dir, double lambda) const {
    const std::size_t nl = lambdas.size();
    const double* r = &rho[(static_cast<std::size_t>(node) * n_dirs + dir) * nl];
    if (lambda <= lambdas.front()) return r[0];
    if (lambda >= lambdas.back()) return r[nl - 1];
    auto it = std::upper_bound(lambdas.begin(), lambdas.end(), lambda);
    std::size_t k = static_cast<std::size_t>(it - lambdas.begin());
    double t = (lambda - lambdas[k - 1]) / (lambdas[k] - lambdas[k - 1]);
    return r[k - 1] + t * (r[k] - r[k - 1]);
}

double TabulatedProfile::radial(Vec2 x, Vec2 e, double lambda) const {
    int node = nearest_node(x);
    double theta = std::atan2(e.y, e.x);
    if (theta < 0) theta += 2.0 * std::numbers::pi;
    double u = theta / (2.0 * std::numbers::pi) * n_dirs;
    int k0 = static_cast<int>(std::floor(u)) % n_dirs;
    int k1 = (k0 + 1) % n_dirs;
    double frac = u - std::floor(u);
    double r0 = rho_at(node, k0, lambda);
    double r1 = rho_at(node, k1, lambda);
    return r0 + frac * (r1 - r0);
}

double TabulatedProfile::invert(Vec2 x, Vec2 e, double p_norm) const {
    if (p_norm <= 0.0) return 0.0;
    const std::size_t nl = lambdas.size();
    double prev_r = radial(x, e, lambdas[0]);
    if (p_norm <= prev_r) return lambdas[0];
    for (std::size_t k = 1; k < nl; ++k) {
        double r = radial(x, e, lambdas[k]);
        if (p_norm <= r) {
            double t = (p_norm - prev_r) / (r - prev_r);
            return lambdas[k - 1] + t * (lambdas[k] - lambdas[k - 1]);
        }
        prev_r = r;
    }
    return kInf;
}

void TabulatedProfile::validate() const {
    if (nx < 1 || ny < 1 || n_dirs < 4)
        throw std::invalid_argument("tabulated profile: need nx,ny >= 1 and n_dirs >= 4");
    if (lambdas.size() < 2)
        throw std::invalid_argument("tabulated profile: need at least two lambda values");
    if (lambdas.front() != 0.0)
        throw std::invalid_argument("tabulated profile: lambda grid must start at 0");
    for (std::size_t k = 1; k < lambdas.size(); ++k)
        if (!(lambdas[k] > lambdas[k - 1]))
            throw std::invalid_argument("tabulated profile: lambda grid must be strictly increasing");
    const std::size_t expect = static_cast<std::size_t>(node_count()) * n_dirs * lambdas.size();
    if (rho.size() != expect)
        throw std::invalid_argument("tabulated profile: rho size does not match node/dir/lambda counts");
    const std::size_t nl = lambdas.size();
    for (std::size_t base = 0; base < rho.size(); base += nl) {
        if (rho[base] < 0.0)
            throw std::invalid_argument("tabulated profile: negative radius");
        for (std::size_t k = 1; k < nl; ++k)
            if (rho[base + k] < rho[base + k - 1])
                throw std::invalid_argument("tabulated profile: radii must be non-decreasing in lambda");
    }
}

HamiltonianSpec HamiltonianSpec::isotropic_power(double s) {
    if (!(s > 0.0)) throw std::invalid_argument("isotropic_power: s must be > 0");
    HamiltonianSpec spec;
    spec.kind_ = Kind::IsotropicPower;
    spec.kind_name_ = "isotropic_power";
    spec.s_ = s;
    return spec;
}

HamiltonianSpec HamiltonianSpec::weighted_isotropic(std::function<double(Vec2)> w,
                                                    double w_min, double w_max) {
    if (!w) throw std::invalid_argument("weighted_isotropic: weight function required");
    if (!(w_min > 0.0) || !(w_max >= w_min))
        throw std::invalid_argument("weighted_isotropic: need 0 < w_min <= w_max");
    HamiltonianSpec spec;
    spec.kind_ = Kind::WeightedIsotropic;
    spec.kind_name_ = "weighted_isotropic";
    spec.weight_ = std::move(w);
    spec.w_min_ = w_min;
    spec.w_max_ = w_max;
    spec.flags_.d = false;
    spec.flags_.d_local_only = true;
    return spec;
}

HamiltonianSpec HamiltonianSpec::anisotropic_norm(double a11, double a12, double a22) {
    if (!(a11 > 0.0) || !(a11 * a22 - a12 * a12 > 0.0))
        throw std::invalid_argument("anisotropic_norm: matrix must be symmetric positive definite");
    HamiltonianSpec spec;
    spec.kind_ = Kind::AnisotropicNorm;
    spec.kind_name_ = "anisotropic_norm";
    spec.a11_ = a11;
    spec.a12_ = a12;
    spec.a22_ = a22;
    double det = a11 * a22 - a12 * a12;
    spec.inv11_ = a22 / det;
    spec.inv12_ = -a12 / det;
    spec.inv22_ = a11 / det;
    double tr = a11 + a22;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    spec.eig_min_ = tr / 2.0 - disc;
    spec.eig_max_ = tr / 2.0 + disc;
    return spec;
}

HamiltonianSpec HamiltonianSpec::plateau_radial() {
    HamiltonianSpec spec;
    spec.kind_ = Kind::PlateauRadial;
    spec.kind_name_ = "plateau_radial";
    spec.flags_.e = false;
    return spec;
}

HamiltonianSpec HamiltonianSpec::tabulated_radial(TabulatedProfile table) {
    table.validate();
    HamiltonianSpec spec;
    spec.kind_ = Kind::TabulatedRadial;
    spec.kind_name_ = "tabulated_radial";
    spec.table_ = std::move(table);
    return spec;
}

bool HamiltonianSpec::radially_symmetric() const {
    return kind_ == Kind::IsotropicPower || kind_ == Kind::WeightedIsotropic ||
           kind_ == Kind::PlateauRadial;
}

bool HamiltonianSpec::spatially_constant() const {
    return kind_ == Kind::IsotropicPower || kind_ == Kind::AnisotropicNorm ||
           kind_ == Kind::PlateauRadial;
}

void HamiltonianSpec::set_n_dirs(int n) {
    if (n < 8) throw std::invalid_argument("n_dirs must be at least 8");
    n_dirs_ = n;
}

double HamiltonianSpec::plateau_rho(double lambda) const {
    return lambda < kPlateauLo ? lambda : lambda + (kPlateauHi - kPlateauLo);
}

double HamiltonianSpec::eval(Vec2 x, Vec2 p) const {
    double r = norm(p);
    switch (kind_) {
        case Kind::IsotropicPower:
            if (s_ == 1.0) return r;
            return std::pow(r, s_) / s_;
        case Kind::WeightedIsotropic: {
            double w = weight_(x);
            if (!(w > 0.0))
                throw std::domain_error("weighted_isotropic: w(x) <= 0 at x=(" +
                                        std::to_string(x.x) + "," + std::to_string(x.y) + ")");
            return r / w;
        }
        case Kind::AnisotropicNorm:
            return std::sqrt(std::max(0.0, a11_ * p.x * p.x + 2.0 * a12_ * p.x * p.y +
                                               a22_ * p.y * p.y));
        case Kind::PlateauRadial:
            if (r < kPlateauLo) return r;
            if (r <= kPlateauHi) return kPlateauLo;
            return r - (kPlateauHi - kPlateauLo);
        case Kind::TabulatedRadial: {
            if (r == 0.0) return 0.0;
            return table_.invert(x, {p.x / r, p.y / r}, r);
        }
    }
    return 0.0;
}

double HamiltonianSpec::radial_extent(Vec2 x, Vec2 e, double lambda) const {
    check_unit(e);
    check_lambda(lambda);
    switch (kind_) {
        case Kind::IsotropicPower:
            return s_ == 1.0 ? lambda : std::pow(s_ * lambda, 1.0 / s_);
        case Kind::WeightedIsotropic: {
            double w = weight_(x);
            if (!(w > 0.0))
                throw std::domain_error("weighted_isotropic: w(x) <= 0");
            return lambda * w;
        }
        case Kind::AnisotropicNorm:
            return lambda / std::sqrt(a11_ * e.x * e.x + 2.0 * a12_ * e.x * e.y +
                                      a22_ * e.y * e.y);
        case Kind::PlateauRadial:
            return plateau_rho(lambda);
        case Kind::TabulatedRadial:
            return table_.radial(x, e, lambda);
    }
    return 0.0;
}

double HamiltonianSpec::radial_extent_bisect(Vec2 x, Vec2 e, double lambda) const {
    check_unit(e);
    check_lambda(lambda);
    const double m = bound_m(lambda);
    if (m <= 0.0) return 0.0;
    const double tol = 1e-10 * std::max(m, 1.0);
    auto member = [&](double t) { return eval(x, t * e) <= lambda + kMemberSlack; };

    const double cap = m * (1.0 + 1e-9);
    if (member(cap)) return cap;

    // grow t exponentially until it leaves the sublevel, then bisect
    double lo = 0.0;
    double t = std::max(tol, m * 0x1.0p-30);
    while (t < cap && member(t)) {
        lo = t;
        t *= 2.0;
    }
    double hi = std::min(t, cap);
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (member(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double HamiltonianSpec::conjugate(Vec2 x, Vec2 q, double lambda) const {
    check_lambda(lambda);
    double n = norm(q);
    if (n == 0.0) return 0.0;
    switch (kind_) {
        case Kind::IsotropicPower:
        case Kind::WeightedIsotropic:
        case Kind::PlateauRadial:
            // sublevels are balls: support = radius * |q|
            return radial_extent(x, {1.0, 0.0}, lambda) * n;
        case Kind::AnisotropicNorm:
            // sup{p.q : p.Ap <= lambda^2} = lambda * sqrt(q . A^-1 q)
            return lambda * std::sqrt(std::max(0.0, inv11_ * q.x * q.x +
                                                        2.0 * inv12_ * q.x * q.y +
                                                        inv22_ * q.y * q.y));
        case Kind::TabulatedRadial:
            return conjugate_sampled(x, q, lambda, n_dirs_);
    }
    return 0.0;
}

double HamiltonianSpec::conjugate_sampled(Vec2 x, Vec2 q, double lambda, int n_dirs) const {
    check_lambda(lambda);
    if (n_dirs < 8) throw std::invalid_argument("conjugate_sampled: n_dirs must be >= 8");
    double n = norm(q);
    if (n == 0.0) return 0.0;
    double best = 0.0;
    for (int k = 0; k < n_dirs; ++k) {
        double theta = 2.0 * std::numbers::pi * k / n_dirs;
        Vec2 e{std::cos(theta), std::sin(theta)};
        double v = radial_extent(x, e, lambda) * dot(e, q);
        if (v > best) best = v;
    }
    Vec2 eq{q.x / n, q.y / n};
    double v = radial_extent(x, eq, lambda) * dot(eq, q);
    if (v > best) best = v;
    return best;
}

double HamiltonianSpec::alpha(double lambda) const {
    check_lambda(lambda);
    switch (kind_) {
        case Kind::IsotropicPower:
            return s_ == 1.0 ? lambda : std::pow(s_ * lambda, 1.0 / s_);
        case Kind::WeightedIsotropic:
            return lambda * w_min_;
        case Kind::AnisotropicNorm:
            return lambda / std::sqrt(eig_max_);
        case Kind::PlateauRadial:
            return plateau_rho(lambda);
        case Kind::TabulatedRadial: {
            double best = kInf;
            for (int node = 0; node < table_.node_count(); ++node)
                for (int d = 0; d < table_.n_dirs; ++d)
                    best = std::min(best, table_.rho_at(node, d, lambda));
            return best;
        }
    }
    return 0.0;
}

double HamiltonianSpec::bound_m(double lambda) const {
    check_lambda(lambda);
    switch (kind_) {
        case Kind::IsotropicPower:
            return s_ == 1.0 ? lambda : std::pow(s_ * lambda, 1.0 / s_);
        case Kind::WeightedIsotropic:
            return lambda * w_max_;
        case Kind::AnisotropicNorm:
            return lambda / std::sqrt(eig_min_);
        case Kind::PlateauRadial:
            return plateau_rho(lambda);
        case Kind::TabulatedRadial: {
            double best = 0.0;
            for (int node = 0; node < table_.node_count(); ++node)
                for (int d = 0; d < table_.n_dirs; ++d)
                    best = std::max(best, table_.rho_at(node, d, lambda));
            return best;
        }
    }
    return 0.0;
}

double HamiltonianSpec::anisotropy_ratio() const {
    switch (kind_) {
        case Kind::IsotropicPower:
        case Kind::PlateauRadial:
            return 1.0;
        case Kind::WeightedIsotropic:
            return w_max_ / w_min_;
        case Kind::AnisotropicNorm:
            return std::sqrt(eig_max_ / eig_min_);
        case Kind::TabulatedRadial: {
            // Interpolated profiles keep each row's spread, so the worst row
            // bounds every lambda.
            const std::size_t nl = table_.lambdas.size();
            double worst = 1.0;
            for (std::size_t k = 0; k < nl; ++k) {
                double lo = kInf, hi = 0.0;
                for (int node = 0; node < table_.node_count(); ++node)
                    for (int d = 0; d < table_.n_dirs; ++d) {
                        const double v =
                            table_.rho[(static_cast<std::size_t>(node) * table_.n_dirs + d) * nl + k];
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                    }
                if (lo > 0.0) worst = std::max(worst, hi / lo);
            }
            return worst;
        }
    }
    return 1.0;
}

bool HamiltonianSpec::scale_invariant_profile() const {
    return kind_ != Kind::TabulatedRadial;
}

double HamiltonianSpec::lambda_for_scale(double scale, double lambda_ref) const {
    check_lambda(lambda_ref);
    if (!scale_invariant_profile())
        throw std::logic_error("lambda_for_scale: profile shape depends on lambda");
    if (!(scale > 0.0)) return 0.0;
    switch (kind_) {
        case Kind::IsotropicPower:
            return s_ == 1.0 ? scale * lambda_ref : std::pow(scale, s_) * lambda_ref;
        case Kind::WeightedIsotropic:
        case Kind::AnisotropicNorm:
            return scale * lambda_ref;
        case Kind::PlateauRadial: {
            const double t = scale * plateau_rho(lambda_ref);
            if (t < kPlateauLo) return t;
            if (t <= kPlateauHi) return kPlateauLo;
            return t - (kPlateauHi - kPlateauLo);
        }
        case Kind::TabulatedRadial:
            break;
    }
    return 0.0;
}

double HamiltonianSpec::e_modulus(double lambda, double delta) const {
    check_lambda(lambda);
    if (!(delta >= 0.0) || delta > lambda)
        throw std::invalid_argument("e_modulus: need 0 <= delta <= lambda");
    switch (kind_) {
        case Kind::IsotropicPower:
            if (s_ == 1.0) return delta;
            return std::pow(s_ * lambda, 1.0 / s_) - std::pow(s_ * (lambda - delta), 1.0 / s_);
        case Kind::WeightedIsotropic:
            return delta * w_max_;
        case Kind::AnisotropicNorm:
            return delta / std::sqrt(eig_min_);
        case Kind::PlateauRadial:
            return plateau_rho(lambda) - plateau_rho(lambda - delta);
        case Kind::TabulatedRadial: {
            double best = 0.0;
            for (int node = 0; node < table_.node_count(); ++node)
                for (int d = 0; d < table_.n_dirs; ++d)
                    best = std::max(best, table_.rho_at(node, d, lambda) -
                                              table_.rho_at(node, d, lambda - delta));
            return best;
        }
    }
    return 0.0;
}

}  // namespace supnorm
