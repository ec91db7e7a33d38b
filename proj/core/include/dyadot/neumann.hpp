#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dyadot/dyadic.hpp"

namespace dyadot {

/// Discrete no-flux Poisson problem -lap phi = f on an m x m grid of square
/// cells of side h. Unknowns sit at cell centres; the 5-point stencil uses a
/// mirrored ghost value across the boundary, so boundary face gradients are
/// exactly zero.
struct NeumannSolution {
  std::int64_t m = 0;
  double h = 0.0;
  /// Cell values, row-major (j outer), zero mean.
  std::vector<double> phi;
  /// d phi / dx on vertical faces, (m+1) per row: gx[j*(m+1) + i] sits at
  /// x = i h. Entries i = 0 and i = m are zero.
  std::vector<double> gx;
  /// d phi / dy on horizontal faces: gy[j*m + i] sits at y = j h, j in [0, m].
  std::vector<double> gy;
  /// max |f - (-lap_h phi)| / max |f| after refinement (0 when f = 0).
  double residual = 0.0;

  /// Centred difference gradient at the centre of cell (i, j): the average
  /// of the two faces on either side.
  std::array<double, 2> centred_gradient(std::int64_t i, std::int64_t j) const;
  /// int |grad phi|^2 for the field whose normal components are the face
  /// values and vary linearly across each cell, by the trapezoidal rule in
  /// the normal direction. Never below the exact integral of that field.
  double energy() const;
};

/// Solves by an even-symmetric cosine transform (the exact eigenbasis of the
/// stencil), then refines until the relative residual is <= 1e-10. The mean
/// of f must vanish to 1e-12 relative to max(1, max|f|); it is then
/// subtracted. Throws std::invalid_argument otherwise.
NeumannSolution solve_neumann(std::int64_t m, double h, std::span<const double> f);

/// Cube Q with the densities of its four children (lower-left, lower-right,
/// upper-left, upper-right) and its own density.
struct CellProblem {
  DyadicCube cube;
  std::array<double, 4> child_density{};
  double parent_density = 0.0;
  /// Grid spacing; must divide side/2.
  double h = 0.25;

  /// From the counts of a dyadic tree.
  static CellProblem from_tree(const DyadicTree& tree, const DyadicCube& Q, double h);
  /// rhs = parent - child density on each child quadrant.
  std::vector<double> rhs() const;
};

/// phi_Q on Q with piecewise constant right-hand side n_Q - n_Q'.
NeumannSolution solve_cell(const CellProblem& cp);

}  // namespace dyadot
