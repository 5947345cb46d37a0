#pragma once

#include <memory>

#include "beltrami/grid.hpp"

namespace beltrami {

// Precomputed machinery for the two singular integral operators on one grid.
//
// The Cauchy transform (kernel 1/(pi z), the right inverse of d/dzbar that
// vanishes at infinity) is discretized as a linear convolution of node samples
// with per-cell kernel integrals: exact integrals over the 3x3 neighborhood of
// the singular cell, midpoint values beyond. The convolution runs on a 2x
// zero-padded grid through the FFT, so it is linear, not circular.
//
// The Beurling transform (principal-value kernel -1/(pi z^2)) acts in
// frequency space with the unit-modulus multiplier conj(xi)/xi on the padded
// grid; the zero-frequency multiplier is 0. That keeps the discrete operator
// an exact l2 isometry on mean-zero data.
//
// Plans are immutable once built; transform calls on one plan are safe to run
// concurrently (work buffers are per call).
class TransformPlan {
 public:
  explicit TransformPlan(const GridSpec& spec);
  ~TransformPlan();
  TransformPlan(TransformPlan&&) noexcept;
  TransformPlan& operator=(TransformPlan&&) noexcept;
  TransformPlan(const TransformPlan&) = delete;
  TransformPlan& operator=(const TransformPlan&) = delete;

  const GridSpec& spec() const;
  int padded_size() const;

  ComplexField cauchy(const ComplexField& h) const;
  ComplexField beurling(const ComplexField& h) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Operator forms; both require h supported strictly inside the window (zero on
// the outer 10% margin) and throw support_overflow_error otherwise.
ComplexField cauchy_transform(const ComplexField& h, const TransformPlan& plan);
ComplexField beurling_transform(const ComplexField& h, const TransformPlan& plan);

// Exact integral of 1/(pi (d - u)) over the square cell |Re u|, |Im u| <= h/2,
// for d outside the cell or d = 0 (principal value, which vanishes by
// symmetry). Exposed for direct testing against brute-force quadrature.
cd cauchy_cell_weight(cd d, double h);

}  // namespace beltrami
