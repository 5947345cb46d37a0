#pragma once

#include <vector>

#include "beltrami/grid.hpp"

namespace beltrami {

// Pair of Beltrami coefficients on a shared grid. The standing assumption is
// |mu| + |nu| < 1 wherever either is nonzero; violations are reported by
// coefficient_violations and joint_dilatation, never clamped.
struct CoefficientField {
  ComplexField mu;
  ComplexField nu;
  double support_radius = 0.0;  // smallest R with mu = nu = 0 outside |z| <= R
};

CoefficientField make_coefficient(ComplexField mu, ComplexField nu);

// Nodes where the coefficients are nonzero but |mu| + |nu| >= 1.
std::vector<GridIndex> coefficient_violations(const CoefficientField& c);

struct TruncationLevel {
  int n = 1;
  double bound = 0.0;  // (n - 1) / (n + 1), the sup bound after truncation
};

TruncationLevel truncation_level(int n);

// (1 + |mu| + |nu|) / (1 - |mu| - |nu|), extended to +inf when the sum
// reaches 1. Pointwise and field forms.
double joint_dilatation_value(cd mu, cd nu);

struct JointDilatation {
  ComplexField field;  // scalar, may contain +inf at violating nodes
  std::vector<GridIndex> violations;
};

JointDilatation joint_dilatation(const CoefficientField& c);

// (1 + |mu|) / (1 - |mu|); throws for |mu| >= 1.
double single_dilatation(cd mu);

// Keeps coefficient values where the joint dilatation is <= n, zeroes the
// rest. Idempotent; level 1 zeroes everything.
CoefficientField truncate(const CoefficientField& c, const TruncationLevel& level);

struct EffectiveMu {
  ComplexField field;
  std::vector<GridIndex> flagged;  // |f_z| below threshold: fell back to mu alone
};

// mu + nu * conj(f_z) / f_z: the single coefficient whose equation the solved
// map satisfies wherever f_z does not vanish.
EffectiveMu effective_mu(const CoefficientField& c, const ComplexField& f_z);

}  // namespace beltrami
