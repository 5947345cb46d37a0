#include "beltrami/dilatation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace beltrami {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_p(double p) {
  if (!(p > 1.0) || !(p <= 2.0)) {
    throw std::invalid_argument("inner dilatation exponent must lie in (1, 2]");
  }
}
}  // namespace

double inner_dilatation(cd a, cd b, double p) {
  check_p(p);
  const double aa = std::abs(a);
  const double bb = std::abs(b);
  if (!(aa > bb)) return kInf;  // degenerate or sense-reversing
  return (aa * aa - bb * bb) / std::pow(aa - bb, p);
}

double dilatation_from_derivatives(cd a, cd b) { return inner_dilatation(a, b, 2.0); }

bool Region::contains(cd z) const {
  const cd d = z - center;
  if (shape == Shape::disk) return std::abs(d) <= size;
  return std::max(std::abs(d.real()), std::abs(d.imag())) <= size;
}

double Region::area() const {
  if (shape == Shape::disk) return M_PI * size * size;
  return 4.0 * size * size;
}

double halfplane_cell_fraction(double signed_distance, cd normal, double h) {
  const double len = std::abs(normal);
  if (!(len > 0.0) || !(h > 0.0)) {
    throw std::invalid_argument("cell fraction needs a nonzero normal and positive cell side");
  }
  const double u = std::abs(normal.real()) / len;
  const double v = std::abs(normal.imag()) / len;
  const double c1 = 0.5 * h * (u + v);
  const double c2 = 0.5 * h * std::abs(u - v);
  const double t = -signed_distance;
  if (t <= -c1) return 0.0;
  if (t >= c1) return 1.0;
  if (std::abs(t) <= c2) return (c1 + c2 + 2.0 * t) / (2.0 * (c1 + c2));
  // ramp regions of the trapezoidal projection density
  const double denom = 2.0 * (c1 + c2) * (c1 - c2);
  if (t < 0.0) return (t + c1) * (t + c1) / denom;
  return 1.0 - (c1 - t) * (c1 - t) / denom;
}

namespace {

// coverage of the cell centered at z0 (side h) by the region: exact for
// squares, half-plane approximation at the rim of a disk
double region_cell_coverage(const Region& region, cd z0, double h) {
  if (region.shape == Region::Shape::square) {
    const double ox = std::min(region.center.real() + region.size, z0.real() + 0.5 * h) -
                      std::max(region.center.real() - region.size, z0.real() - 0.5 * h);
    const double oy = std::min(region.center.imag() + region.size, z0.imag() + 0.5 * h) -
                      std::max(region.center.imag() - region.size, z0.imag() - 0.5 * h);
    if (ox <= 0.0 || oy <= 0.0) return 0.0;
    return (ox * oy) / (h * h);
  }
  const cd d = z0 - region.center;
  const double r = std::abs(d);
  if (r < 1e-14) return 1.0;  // cell at the disk center
  return halfplane_cell_fraction(r - region.size, d / r, h);
}

void check_region_inside(const Region& region, const GridSpec& spec, const char* what) {
  const double slack = 1e-9 * std::max(1.0, spec.halfwidth);
  const bool ok =
      region.center.real() - region.size >= spec.center.real() - spec.halfwidth - slack &&
      region.center.real() + region.size <= spec.center.real() + spec.halfwidth + slack &&
      region.center.imag() - region.size >= spec.center.imag() - spec.halfwidth - slack &&
      region.center.imag() + region.size <= spec.center.imag() + spec.halfwidth + slack;
  if (!ok) {
    throw std::invalid_argument(std::string(what) + ": region extends beyond the map window");
  }
  if (!(region.size > 0.0)) {
    throw std::invalid_argument(std::string(what) + ": region size must be positive");
  }
}

}  // namespace

DilatationReport integral_inner_p(const SampledMap& g, const Region& region, double p) {
  check_p(p);
  check_region_inside(region, g.spec, "dilatation integral");

  const int n = g.spec.resolution;
  const double h = g.spec.spacing();
  DilatationReport rep;
  rep.p = p;
  rep.min_value = kInf;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double cov = region_cell_coverage(region, g.spec.node(i, j), h);
      if (cov <= 0.0) continue;
      if (g.flagged(i, j)) {
        ++rep.flagged;
        continue;
      }
      const double value = inner_dilatation(g.f_z.at(i, j), g.f_zbar.at(i, j), p);
      rep.integral += value * cov * h * h;
      rep.min_value = std::min(rep.min_value, value);
      rep.max_value = std::max(rep.max_value, value);
      ++rep.used;
    }
  }
  if (rep.used == 0) rep.min_value = 0.0;
  rep.flagged_warning = rep.flagged > 0.01 * std::max<long long>(rep.used, 1);
  return rep;
}

namespace {

// signed distance to the region boundary in the source plane, with the
// outward normal direction there
struct BoundaryGeometry {
  double distance = 0.0;
  cd normal{1.0, 0.0};
};

BoundaryGeometry region_boundary_geometry(const Region& region, cd z) {
  const cd d = z - region.center;
  if (region.shape == Region::Shape::disk) {
    const double r = std::abs(d);
    if (r < 1e-14) return {-region.size, cd(1.0, 0.0)};
    return {r - region.size, d / r};
  }
  const double sx = std::abs(d.real()) - region.size;
  const double sy = std::abs(d.imag()) - region.size;
  if (sx >= sy) return {sx, cd(d.real() >= 0.0 ? 1.0 : -1.0, 0.0)};
  return {sy, cd(0.0, d.imag() >= 0.0 ? 1.0 : -1.0)};
}

}  // namespace

ChangeOfVariablesReport change_of_variables_check(const SampledMap& f, const SampledMap& g,
                                                  const Region& region, double p) {
  check_p(p);
  check_region_inside(region, f.spec, "substitution check");

  ChangeOfVariablesReport rep;
  rep.p = p;

  // source side: operator norm of the differential, midpoint with coverage
  {
    const int n = f.spec.resolution;
    const double h = f.spec.spacing();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double cov = region_cell_coverage(region, f.spec.node(i, j), h);
        if (cov <= 0.0) continue;
        const double norm = std::abs(f.f_z.at(i, j)) + std::abs(f.f_zbar.at(i, j));
        rep.lhs += std::pow(norm, p) * cov * h * h;
      }
    }
  }

  // image bounding box from boundary samples; the image of the region is
  // enclosed by the image of its boundary
  double bx0 = kInf, bx1 = -kInf, by0 = kInf, by1 = -kInf;
  const int boundary_samples = 512;
  for (int s = 0; s < boundary_samples; ++s) {
    cd zb;
    if (region.shape == Region::Shape::disk) {
      zb = region.center + std::polar(region.size, 2.0 * M_PI * s / boundary_samples);
    } else {
      const double t = 8.0 * region.size * s / boundary_samples;  // walk the perimeter
      const double a = region.size;
      double x, y;
      if (t < 2.0 * a) {
        x = -a + t;
        y = -a;
      } else if (t < 4.0 * a) {
        x = a;
        y = -a + (t - 2.0 * a);
      } else if (t < 6.0 * a) {
        x = a - (t - 4.0 * a);
        y = a;
      } else {
        x = -a;
        y = a - (t - 6.0 * a);
      }
      zb = region.center + cd(x, y);
    }
    const cd w = f.eval(zb);
    bx0 = std::min(bx0, w.real());
    bx1 = std::max(bx1, w.real());
    by0 = std::min(by0, w.imag());
    by1 = std::max(by1, w.imag());
  }
  {
    const double margin = g.spec.spacing();
    const bool covered = bx0 >= g.spec.center.real() - g.spec.halfwidth + margin &&
                         bx1 <= g.spec.center.real() + g.spec.halfwidth - margin &&
                         by0 >= g.spec.center.imag() - g.spec.halfwidth + margin &&
                         by1 <= g.spec.center.imag() + g.spec.halfwidth - margin;
    if (!covered) {
      throw std::invalid_argument(
          "substitution check: the image of the region is not covered by the inverse grid");
    }
  }

  // image side: rasterize f(region) through the round trip w -> g(w), with
  // half-plane coverage from the pulled-back boundary gradient
  {
    const int n = g.spec.resolution;
    const double h = g.spec.spacing();
    const double pad = 2.0 * h;
    long long used = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const cd w = g.spec.node(i, j);
        const bool near_image = w.real() >= bx0 - pad && w.real() <= bx1 + pad &&
                                w.imag() >= by0 - pad && w.imag() <= by1 + pad;
        if (!near_image) continue;
        if (g.flagged(i, j)) {
          ++rep.flagged;
          continue;
        }
        const cd z_back = w + g.displacement.at(i, j);
        const BoundaryGeometry bg = region_boundary_geometry(region, z_back);
        const cd a = g.f_z.at(i, j);
        const cd b = g.f_zbar.at(i, j);
        // gradient of (distance o g) in the image plane: adjoint differential
        // applied to the source normal
        const cd m = std::conj(a) * bg.normal + b * std::conj(bg.normal);
        const double mlen = std::abs(m);
        double cov;
        if (mlen < 1e-14) {
          cov = bg.distance < 0.0 ? 1.0 : 0.0;
        } else {
          cov = halfplane_cell_fraction(bg.distance / mlen, m / mlen, h);
        }
        if (cov <= 0.0) continue;
        rep.rhs += inner_dilatation(a, b, p) * cov * h * h;
        ++used;
      }
    }
    rep.flagged_warning = rep.flagged > 0.01 * std::max<long long>(used, 1);
  }

  rep.rel_gap = std::abs(rep.lhs - rep.rhs) / std::max({rep.lhs, rep.rhs, 1e-300});
  return rep;
}

}  // namespace beltrami
