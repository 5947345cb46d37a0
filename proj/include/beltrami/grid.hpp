#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace beltrami {

using cd = std::complex<double>;

// Cell-centered square grid: resolution N is a power of two, nodes sit at cell
// centers, so the window center itself is never a node.
struct GridSpec {
  cd center{0.0, 0.0};
  double halfwidth = 0.0;
  int resolution = 0;

  double spacing() const { return 2.0 * halfwidth / resolution; }

  cd node(int i, int j) const {
    const double h = spacing();
    return center + cd(-halfwidth + (i + 0.5) * h, -halfwidth + (j + 0.5) * h);
  }

  bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(cd center, double halfwidth, int resolution);

struct GridIndex {
  int i = 0;
  int j = 0;
  bool operator==(const GridIndex&) const = default;
};

enum class Meaning { coefficient, displacement, derivative, scalar };

const char* meaning_name(Meaning m);
Meaning meaning_from_name(const std::string& name);

// Dense complex samples on a GridSpec; storage index = i * N + j with i the
// x-index and j the y-index. Real-valued data lives here with zero imaginary
// parts. Entries must be finite except under the `scalar` tag, which admits
// +infinity (extended-real dilatations) but never NaN.
struct ComplexField {
  GridSpec spec;
  Meaning meaning = Meaning::scalar;
  std::vector<cd> values;

  int n() const { return spec.resolution; }

  cd& at(int i, int j) { return values[static_cast<size_t>(i) * spec.resolution + j]; }
  const cd& at(int i, int j) const {
    return values[static_cast<size_t>(i) * spec.resolution + j];
  }

  // Bilinear interpolation; points beyond the node hull clamp to the edge.
  cd interpolate(cd z) const;
};

ComplexField make_field(const GridSpec& spec, Meaning meaning);

ComplexField sample(const std::function<cd(cd)>& fn, const GridSpec& spec, Meaning meaning);

struct WirtingerDerivatives {
  ComplexField f_z;
  ComplexField f_zbar;
};

// Central differences inside, one-sided second-order stencils on the boundary
// ring; exact for affine maps a*z + b*conj(z) + c.
WirtingerDerivatives wirtinger(const ComplexField& f);

// Continuum-scaled l2 norm: spacing * sqrt(sum |v|^2).
double l2_norm(const ComplexField& f);
double sup_norm(const ComplexField& f);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

}  // namespace beltrami
