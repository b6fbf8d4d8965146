#ifndef SUPNORM_SHAPE_HPP
#define SUPNORM_SHAPE_HPP

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "supnorm/vec2.hpp"

namespace supnorm {

// Geometric description of the open set the grid discretizes. Membership is
// evaluated at node centers and at segment sample points; boundary_distance
// is the Euclidean distance to the boundary (exact for the analytic shapes).
class Shape {
public:
    virtual ~Shape() = default;
    virtual bool contains(Vec2 p) const = 0;
    virtual double boundary_distance(Vec2 p) const = 0;
    virtual std::array<Vec2, 2> bbox() const = 0;
    virtual std::string name() const = 0;
};

// Closed axis-aligned box; degenerate extents (lo == hi in one axis) give a
// 1-D interval domain.
std::shared_ptr<Shape> make_box(Vec2 lo, Vec2 hi);
std::shared_ptr<Shape> make_disc(Vec2 center, double radius);
std::shared_ptr<Shape> make_annulus(Vec2 center, double r_in, double r_out);
// Annulus with the radial segment {cx} x [cy - r_out, cy - r_in] removed.
std::shared_ptr<Shape> make_slit_annulus(Vec2 center, double r_in, double r_out);

struct MaskImage {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> inside;  // row 0 = top image row, nonzero = inside
};

// Raster mask; pixel (col,row) covers the node at origin + (col, height-1-row)*h.
std::shared_ptr<Shape> make_mask(MaskImage image, Vec2 origin, double h);

}  // namespace supnorm

#endif
