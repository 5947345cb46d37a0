#pragma once

#include "beltrami/grid.hpp"
#include "beltrami/solver.hpp"

namespace beltrami {

// Inner p-dilatation from the derivative pair of an inverse map:
//   (|a|^2 - |b|^2) / (|a| - |b|)^p,   p in (1, 2].
// +inf when the pair is degenerate (|a| <= |b|). At p = 2 this is the
// dilatation of the inverse coefficient, and for g = f^{-1} it equals the
// usual dilatation of f at the preimage point.
double inner_dilatation(cd a, cd b, double p);
double dilatation_from_derivatives(cd a, cd b);  // p = 2

// Integration region: a disk (size = radius) or an axis-aligned square
// (size = halfwidth) around a center.
struct Region {
  enum class Shape { disk, square };
  Shape shape = Shape::disk;
  cd center{0.0, 0.0};
  double size = 1.0;

  bool contains(cd z) const;
  double area() const;
};

// Fraction of the square cell with side h centered at the origin lying in the
// half plane { Re(conj(normal) z) + signed_distance <= 0 }. Exposed for
// testing; the integrators use it to weight boundary cells.
double halfplane_cell_fraction(double signed_distance, cd normal, double h);

struct DilatationReport {
  double p = 2.0;
  double integral = 0.0;
  double min_value = 0.0;  // over cells that contribute
  double max_value = 0.0;
  long long used = 0;      // cells with positive coverage
  long long flagged = 0;   // flagged cells inside the region, excluded
  bool flagged_warning = false;  // flagged exceed 1% of contributing cells
};

// Midpoint integral of the inner p-dilatation of g over the region, with
// fractional coverage on boundary cells (exact for squares, half-plane
// approximation for disks). Flagged nodes are excluded and counted.
DilatationReport integral_inner_p(const SampledMap& g, const Region& region, double p);

struct ChangeOfVariablesReport {
  double p = 2.0;
  double lhs = 0.0;      // integral over the region of (|f_z| + |f_zbar|)^p
  double rhs = 0.0;      // integral of the inner p-dilatation over the image
  double rel_gap = 0.0;  // |lhs - rhs| / max(lhs, rhs)
  long long flagged = 0;
  bool flagged_warning = false;
};

// Substitution identity check: the p-th power of the operator norm of f'
// integrated over C must equal the inner p-dilatation of g = f^{-1} integrated
// over f(C). The image-side membership runs through g itself (round trip), so
// the check exercises the inverse map, not the forward one twice.
ChangeOfVariablesReport change_of_variables_check(const SampledMap& f, const SampledMap& g,
                                                  const Region& region, double p);

}  // namespace beltrami
