#ifndef SUPNORM_FIELDS_IO_HPP
#define SUPNORM_FIELDS_IO_HPP

#include <string>

#include "supnorm/field.hpp"
#include "supnorm/hamiltonian.hpp"
#include "supnorm/shape.hpp"

namespace supnorm {

// CSV with header i,j,x,y,value, one row per grid node in node-index order.
// Values print with 17 significant digits so a read-back is bitwise equal;
// nodes without a value round-trip as nan.
void write_field_csv(const ScalarField& f, const GridDomain& dom,
                     const std::string& path);
ScalarField read_field_csv(const GridDomain& dom, const std::string& path);

// Boundary data from a field CSV; every boundary node must carry a finite
// value, and values elsewhere are dropped.
ScalarField read_boundary_csv(const GridDomain& dom, const std::string& path);

// P2/P5 PGM; nonzero pixels are inside.
MaskImage read_pgm_mask(const std::string& path);

// 8-bit P5 heatmap (min -> 0, max -> 255, missing -> 0) plus a sidecar
// <path>.scale.json recording the value range.
void write_heatmap_pgm(const ScalarField& f, const GridDomain& dom,
                       const std::string& path);

// Radial profile table from CSV with header node,dir,lam,rho; the distinct
// lam values (which must include 0) define the lambda grid.
TabulatedProfile read_profile_csv(const std::string& path, Vec2 origin,
                                  double h, int nx, int ny);

}  // namespace supnorm

#endif
