#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "beltrami/dilatation.hpp"
#include "beltrami/grid.hpp"
#include "beltrami/solver.hpp"

namespace beltrami {

// Pointwise extended-real weight q(y) >= 0. Backed either by a closed-form
// function (floor 0, no window) or by a sampled field, in which case `floor`
// is the grid spacing and `window` bounds where evaluations are trustworthy.
// +inf values are legal; NaN is not.
struct Weight {
  std::function<double(cd)> eval;
  double floor = 0.0;
  std::optional<GridSpec> window;
};

Weight make_weight(std::function<double(cd)> fn);
// Copies the field; interpolation treats a cell with any non-finite corner as
// +inf rather than letting infinities leak into bilinear arithmetic.
Weight make_weight(const ComplexField& q);

// Uniform (trapezoid on a periodic integrand) average of q over the circle
// |y - y0| = r. Needs at least 720 samples; returns +inf if any sample is
// non-finite. Field-backed weights reject circles leaving the window.
double circle_average(const Weight& q, cd y0, double r, int samples = 720);
double circle_average(const ComplexField& q, cd y0, double r, int samples = 720);

struct IntegrabilityScan {
  bool pass = false;
  int scanned = 0;
  std::vector<double> witness_radii;  // radii with a finite circle average
};

// Scans `samples` radii equally spaced in [r1, r2] (midpoints) and passes when
// the finite-average fraction reaches min_fraction. Requires 0 < r1 < r2 < 1.
IntegrabilityScan circle_integrability_scan(const Weight& q, cd y0, double r1, double r2,
                                            int samples, double min_fraction = 0.1);

struct DivergenceReport {
  bool divergent = false;
  bool zero_average = false;  // q vanished at a quadrature radius: infinite integrand
  // Tail-extrapolated value of the integral of dt / (t q(t)) over (0, delta]
  // when convergent; +inf when divergent.
  double value = std::numeric_limits<double>::quiet_NaN();
  double tail_ratio = 0.0;  // median increment ratio over the last 5 octaves
  std::vector<double> octave_increments;
};

// Integrates dt / (t q_{w0}(t)) octave by octave down from delta on a
// geometric radius ladder. Divergent when the tail increments stop decaying
// (median ratio >= 0.95: constants give ratio 1, log-log divergence creeps up
// to 1, while any integrand with a power tail settles strictly below).
DivergenceReport divergence_check(const Weight& q, cd w0, double delta, int octaves = 40);

struct FmoReport {
  enum class Outcome { pass, fail, undetermined };
  Outcome outcome = Outcome::undetermined;
  double limsup_estimate = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> eps;          // usable ladder entries, descending
  std::vector<double> oscillation;  // mean oscillation at each entry
  int dropped = 0;                  // entries below 4 grid spacings
};

// Mean oscillation of q over disks B(z0, eps) down the given ladder
// (strictly decreasing). Pass when the tail stays bounded: max over the last
// half <= 2x the median. Undetermined when the ladder has fewer than 4 usable
// entries or reaches below the resolution floor of a field-backed weight.
FmoReport fmo_estimate(const Weight& q, cd z0, const std::vector<double>& eps_ladder);

// Condenser on a grid: plate1 at potential 1, plate0 at potential 0, the rest
// harmonic, window edges insulated.
struct CondenserMasks {
  GridSpec spec;
  std::vector<unsigned char> plate1;
  std::vector<unsigned char> plate0;
};

CondenserMasks annulus_condenser(const GridSpec& spec, cd center, double r1, double r2);
// Plates from thresholding |f(node) - y0|: the preimage of the round annulus
// under f. Flagged nodes join neither plate.
CondenserMasks map_annulus_condenser(const SampledMap& f, cd y0, double r1, double r2);

// Dirichlet energy of the five-point discrete harmonic potential, which is the
// capacity of the condenser and the modulus of the family of curves joining
// the plates. Conjugate gradients to relative residual `tol`. Plates that are
// empty, overlapping, or 4-adjacent throw invalid_argument.
double discrete_capacity(const CondenserMasks& masks, double tol = 1e-10,
                         int max_iter = 50000);

struct Annulus {
  cd center{0.0, 0.0};
  double r1 = 0.0;
  double r2 = 0.0;
};

enum class EtaKind { uniform, log_ring };

struct PoletskyReport {
  double lhs = 0.0;  // capacity of the preimage ring
  double rhs = 0.0;  // 2 pi int t eta(t)^2 q_{y0}(t) dt over [r1, r2]
  bool holds = false;
};

// Modulus bound for the preimage of the round annulus `ann` under f against
// the weighted admissible-density integral. Both test densities integrate to
// exactly 1 across the ring: uniform 1/(r2-r1) and log 1/(t log(r2/r1)). g
// parameterizes the image side; the annulus must sit inside its window.
// holds = lhs <= 1.05 * rhs.
PoletskyReport inverse_poletsky_check(const SampledMap& f, const SampledMap& g,
                                      const Weight& q, const Annulus& ann, EtaKind eta);

// Distance from the inner region to the boundary of the outer one, assuming
// inner sits inside outer; negative or zero means touching/overflow.
double region_gap(const Region& inner, const Region& outer);

struct EquicontinuityReport {
  double c_hat = 0.0;
  cd x{0.0, 0.0};  // maximizing pair
  cd y{0.0, 0.0};
  size_t map_index = 0;
  double gap = 0.0;  // d(K, boundary of G)
};

// C_hat = max over maps and seeded random node pairs x, y in K of
//   |f(x) - f(y)| * sqrt(log(1 + r0 / (2 |x - y|))),   r0 = d(K, dG).
// A uniform C of this shape is what equicontinuity of the family asserts; the
// sampled max estimates the best constant from below.
EquicontinuityReport equicontinuity_bound(const std::vector<const SampledMap*>& maps,
                                          const Region& K, const Region& G,
                                          int pairs = 10000, unsigned seed = 0);

struct ProbeFindings {
  cd probe{0.0, 0.0};
  bool usable = false;  // false when the probe sits too close to the boundary
  IntegrabilityScan integrability;
  FmoReport fmo;
  DivergenceReport divergence;
};

struct ClassifyOptions {
  double scan_r1 = 0.02;
  double scan_r2 = 0.9;  // clamped per probe to stay inside the domain
  int scan_radii = 50;
  double min_fraction = 0.1;
  double delta = 0.5;  // divergence ladder top, also clamped per probe
  std::vector<double> fmo_ladder = {0.16, 0.08, 0.04, 0.02, 0.01, 0.005};
};

struct ClassificationVerdict {
  enum class Kind { normal, compact, undetermined };
  Kind verdict = Kind::undetermined;
  bool circle_integrability = false;        // all probes passed the scan
  FmoReport::Outcome fmo = FmoReport::Outcome::undetermined;  // aggregated
  bool divergence = false;                  // divergent at all probes
  std::vector<ProbeFindings> probes;
};

const char* verdict_name(ClassificationVerdict::Kind kind);

// Normality / compactness classification of the family controlled by q:
// integrable circles at every probe make the family normal; on top of that,
// either finite mean oscillation at every probe or a divergent integral at
// every probe upgrades the verdict to compact. Probes where the scans cannot
// run (too close to the boundary, or failing integrability) leave the verdict
// undetermined.
ClassificationVerdict classify(const Weight& q, const Region& domain,
                               const std::vector<cd>& probes,
                               const ClassifyOptions& opt = {});

}  // namespace beltrami
