#pragma once

#include <functional>

#include "beltrami/grid.hpp"

namespace beltrami::oracle {

// Closed-form radial test family on the unit disk, parameterized by
// alpha in (0, 2). The limit map stretches the annulus 1/2 < |z| < 1 onto the
// punctured disk by r -> (2r - 1)^(1/alpha) and collapses |z| <= 1/2 to the
// origin; its Beltrami coefficient is supported on the annulus. Truncating the
// coefficient where the dilatation exceeds k produces a homeomorphic family
// with explicit inverses and dilatations, which is what the numerical pipeline
// is checked against.
//
// Branch convention: points on the measure-zero branch circles evaluate the
// branch for larger |z| (the spatially outer branch).

struct ExampleParams {
  double alpha = 1.0;
  double k = 3.0;
  double rho = 0.0;  // truncation radius: dilatation <= k iff |z| >= rho
  double tau = 0.0;  // image of rho under the limit map
};

// Requires k * alpha > 2 so that rho(k) < 1; smaller k (down to 1/alpha) makes
// the truncated coefficient vanish identically, see truncation_trivial.
ExampleParams example_params(double alpha, double k);

// True when 1/alpha < k but rho(k) >= 1: the truncation keeps nothing and the
// truncated map is the identity.
bool truncation_trivial(double alpha, double k);

cd mu(cd z, double alpha);
cd limit_map(cd z, double alpha);
cd truncated_map(cd z, const ExampleParams& p);
cd inverse_map(cd y, const ExampleParams& p);

// Extended-real dilatations (+inf where |mu| = 1).
double max_dilatation(cd z, double alpha);
double truncated_dilatation(cd z, const ExampleParams& p);
double inverse_dilatation(cd y, const ExampleParams& p);

// Radial majorant dominating inverse_dilatation for every k; equals 1 outside
// the unit disk and +inf at the origin.
double majorant(cd y, double alpha);

struct PolarMu {
  cd value;
  bool degenerate = false;  // |denominator| vanished: map not sense-preserving there
};

// Beltrami coefficient recovered from polar finite differences of an arbitrary
// pointwise map; used to cross-check mu against the maps independently.
PolarMu mu_from_polar(const std::function<cd(cd)>& f, cd z, double rel_step = 1e-6);

}  // namespace beltrami::oracle
