#pragma once

#include <optional>
#include <vector>

#include "beltrami/coefficients.hpp"
#include "beltrami/grid.hpp"
#include "beltrami/transforms.hpp"

namespace beltrami {

// A planar map held as node samples: the displacement f(z) - z plus both
// Wirtinger derivative fields. Point evaluation interpolates bilinearly, so
// maps stay usable between nodes; beyond the window everything clamps to the
// edge, which callers should treat as out of range. Nodes whose values came
// out unreliable (failed inversions and their difference-stencil neighbors)
// are flagged rather than repaired.
struct SampledMap {
  GridSpec spec;
  ComplexField displacement;  // f(z) - z
  ComplexField f_z;
  ComplexField f_zbar;
  std::vector<unsigned char> flags;  // nonzero marks an unreliable node
  int flagged_count = 0;
  std::optional<int> level;  // truncation level when produced by a ladder

  cd eval(cd z) const { return z + displacement.interpolate(z); }
  cd deriv_z(cd z) const { return f_z.interpolate(z); }
  cd deriv_zbar(cd z) const { return f_zbar.interpolate(z); }

  bool flagged(int i, int j) const {
    return flags[static_cast<size_t>(i) * spec.resolution + j] != 0;
  }

  static SampledMap from_function(const std::function<cd(cd)>& f, const GridSpec& spec);
};

struct SolveOptions {
  double tol = 1e-10;  // relative l2 gap between successive iterates
  int max_iter = 400;
};

struct SolveDiagnostics {
  int iterations = 0;
  double residual = 0.0;           // l2 norm of f_zbar - mu f_z - nu conj(f_z)
  double relative_residual = 0.0;  // residual / l2(f_z)
  double contraction_bound = 0.0;  // sup over nodes of |mu| + |nu|
  std::vector<double> gaps;        // l2 gap per iteration
};

struct PrincipalSolution {
  SampledMap map;
  SolveDiagnostics diagnostics;
};

// Fixed-point solve of the two-coefficient equation
//   f_zbar = mu f_z + nu conj(f_z),   f(z) = z + O(1/z) at infinity,
// iterating h -> mu + nu + mu Sh + nu conj(Sh) from h = 0, then f = z + Ch.
// Contracts at rate sup(|mu| + |nu|); inputs with sup >= 1 are not rejected up
// front but get caught by the divergence detector (three consecutive gap
// ratios above the expected contraction), which throws solver_error.
PrincipalSolution solve_principal(const CoefficientField& coeff, const TransformPlan& plan,
                                  const SolveOptions& opts = {});
PrincipalSolution solve_principal(const CoefficientField& coeff, const SolveOptions& opts = {});

struct InversionResult {
  cd z{0.0, 0.0};
  bool ok = false;
  int iterations = 0;
};

// Batch Newton inversion: for each target y find z with f(z) = y. Seeds come
// from the nearest node image through a spatial hash built once per batch;
// iterates are clamped to the window. Targets that fail to converge within 50
// steps come back with ok = false and the best point seen.
std::vector<InversionResult> invert_map(const SampledMap& f, const std::vector<cd>& targets);

// Inverse map sampled on its own grid: every node of `target` is inverted,
// failures are flagged (with their stencil neighbors) and excluded from
// nothing here; consumers decide. Derivatives come from difference stencils of
// the inverted displacement.
SampledMap sample_inverse(const SampledMap& f, const GridSpec& target);

// Mean deviation |f(z) - z| over circles |z| = R and the least-squares decay
// rate: deviation ~ C / R^exponent. NaN exponent when a circle mean vanishes
// or fewer than two radii are given.
struct FarFieldProfile {
  std::vector<double> radii;
  std::vector<double> deviation;
  double exponent = 0.0;
};

FarFieldProfile far_field_profile(const SampledMap& f, const std::vector<double>& radii,
                                  int samples_per_circle = 720);

struct LadderOptions {
  std::vector<int> levels;  // strictly increasing, each >= 1
  SolveOptions solve;
  double gap_radius = 1.2;  // sup gaps measured over nodes with |z| <= this
};

struct LadderLevel {
  int level = 0;
  double bound = 0.0;  // coefficient sup bound (n - 1) / (n + 1)
  PrincipalSolution solution;
};

// Truncation ladder: truncate the coefficient at each level, solve, and record
// sup gaps between consecutive maps. One transform plan is shared by all
// levels. Solver failures rethrow with the failing level filled in.
struct TruncationLadder {
  std::vector<LadderLevel> levels;
  std::vector<double> gaps;  // size levels.size() - 1
};

TruncationLadder run_ladder(const CoefficientField& coeff, const LadderOptions& opts);

}  // namespace beltrami
