#ifndef SUPNORM_FIELD_HPP
#define SUPNORM_FIELD_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "supnorm/grid.hpp"

namespace supnorm {

// Node-indexed scalar data; NaN marks nodes without a value (outside nodes,
// or non-boundary nodes of boundary data).
struct ScalarField {
    std::string name;
    std::vector<double> values;

    double operator[](int n) const { return values[static_cast<std::size_t>(n)]; }
    double& operator[](int n) { return values[static_cast<std::size_t>(n)]; }
    bool has(int n) const { return !std::isnan(values[static_cast<std::size_t>(n)]); }
};

inline ScalarField make_field(const GridDomain& dom, std::string name) {
    ScalarField f;
    f.name = std::move(name);
    f.values.assign(static_cast<std::size_t>(dom.node_count()),
                    std::numeric_limits<double>::quiet_NaN());
    return f;
}

// Samples fn at every inside node.
inline ScalarField sample_field(const GridDomain& dom, std::string name,
                                const std::function<double(Vec2)>& fn) {
    ScalarField f = make_field(dom, std::move(name));
    for (int n = 0; n < dom.node_count(); ++n)
        if (dom.inside[n]) f[n] = fn(dom.pos(n));
    return f;
}

// Samples fn at boundary nodes only.
inline ScalarField sample_boundary(const GridDomain& dom, std::string name,
                                   const std::function<double(Vec2)>& fn) {
    ScalarField f = make_field(dom, std::move(name));
    for (int n : dom.boundary_nodes) f[n] = fn(dom.pos(n));
    return f;
}

}  // namespace supnorm

#endif
