#include "beltrami/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "beltrami/errors.hpp"

namespace beltrami {

static bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

GridSpec make_grid(cd center, double halfwidth, int resolution) {
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) {
    throw std::invalid_argument("grid halfwidth must be finite and positive");
  }
  if (!std::isfinite(center.real()) || !std::isfinite(center.imag())) {
    throw std::invalid_argument("grid center must be finite");
  }
  if (resolution < 8 || !power_of_two(resolution)) {
    throw std::invalid_argument("grid resolution must be a power of two >= 8");
  }
  return GridSpec{center, halfwidth, resolution};
}

const char* meaning_name(Meaning m) {
  switch (m) {
    case Meaning::coefficient: return "coefficient";
    case Meaning::displacement: return "displacement";
    case Meaning::derivative: return "derivative";
    case Meaning::scalar: return "scalar";
  }
  return "scalar";
}

Meaning meaning_from_name(const std::string& name) {
  if (name == "coefficient") return Meaning::coefficient;
  if (name == "displacement") return Meaning::displacement;
  if (name == "derivative") return Meaning::derivative;
  if (name == "scalar") return Meaning::scalar;
  throw std::invalid_argument("unknown field meaning: " + name);
}

ComplexField make_field(const GridSpec& spec, Meaning meaning) {
  ComplexField f;
  f.spec = spec;
  f.meaning = meaning;
  f.values.assign(static_cast<size_t>(spec.resolution) * spec.resolution, cd(0.0, 0.0));
  return f;
}

cd ComplexField::interpolate(cd z) const {
  const int N = spec.resolution;
  const double h = spec.spacing();
  // Continuous node coordinates: node(i, j) has coordinates (i, j).
  double u = (z.real() - (spec.center.real() - spec.halfwidth)) / h - 0.5;
  double v = (z.imag() - (spec.center.imag() - spec.halfwidth)) / h - 0.5;
  u = std::clamp(u, 0.0, static_cast<double>(N - 1));
  v = std::clamp(v, 0.0, static_cast<double>(N - 1));
  int i0 = std::min(static_cast<int>(u), N - 2);
  int j0 = std::min(static_cast<int>(v), N - 2);
  const double fu = u - i0;
  const double fv = v - j0;
  const cd v00 = at(i0, j0);
  const cd v10 = at(i0 + 1, j0);
  const cd v01 = at(i0, j0 + 1);
  const cd v11 = at(i0 + 1, j0 + 1);
  return v00 * ((1 - fu) * (1 - fv)) + v10 * (fu * (1 - fv)) + v01 * ((1 - fu) * fv) +
         v11 * (fu * fv);
}

ComplexField sample(const std::function<cd(cd)>& fn, const GridSpec& spec, Meaning meaning) {
  ComplexField out = make_field(spec, meaning);
  const int N = spec.resolution;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const cd z = spec.node(i, j);
      const cd w = fn(z);
      const bool nan = std::isnan(w.real()) || std::isnan(w.imag());
      bool bad = nan;
      if (meaning == Meaning::scalar) {
        // Extended-real data: +inf is a legitimate dilatation value.
        bad = nan || std::isinf(w.imag()) || w.real() == -std::numeric_limits<double>::infinity();
      } else {
        bad = nan || std::isinf(w.real()) || std::isinf(w.imag());
      }
      if (bad) {
        throw sampling_error(z, "sampled function returned a non-finite value");
      }
      out.at(i, j) = w;
    }
  }
  return out;
}

WirtingerDerivatives wirtinger(const ComplexField& f) {
  if (f.meaning != Meaning::displacement && f.meaning != Meaning::derivative) {
    throw std::invalid_argument("wirtinger expects a displacement or derivative field");
  }
  const int N = f.spec.resolution;
  if (N < 8) throw std::invalid_argument("wirtinger needs resolution >= 8");
  const double h = f.spec.spacing();

  WirtingerDerivatives out{make_field(f.spec, Meaning::derivative),
                           make_field(f.spec, Meaning::derivative)};

  auto d1 = [&](const cd& m2, const cd& m1, const cd& p1, const cd& p2, int pos, int n) -> cd {
    // pos 0: left edge, uses forward stencil on (m1 = f0, p1, p2);
    // pos n-1: right edge, backward; otherwise central.
    if (pos == 0) return (-3.0 * m1 + 4.0 * p1 - p2) / (2.0 * h);
    if (pos == n - 1) return (3.0 * p1 - 4.0 * m1 + m2) / (2.0 * h);
    return (p1 - m1) / (2.0 * h);
  };

  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      cd fx, fy;
      if (i == 0) {
        fx = d1(cd{}, f.at(0, j), f.at(1, j), f.at(2, j), 0, N);
      } else if (i == N - 1) {
        fx = d1(f.at(N - 3, j), f.at(N - 2, j), f.at(N - 1, j), cd{}, N - 1, N);
      } else {
        fx = d1(cd{}, f.at(i - 1, j), f.at(i + 1, j), cd{}, i, N);
      }
      if (j == 0) {
        fy = d1(cd{}, f.at(i, 0), f.at(i, 1), f.at(i, 2), 0, N);
      } else if (j == N - 1) {
        fy = d1(f.at(i, N - 3), f.at(i, N - 2), f.at(i, N - 1), cd{}, N - 1, N);
      } else {
        fy = d1(cd{}, f.at(i, j - 1), f.at(i, j + 1), cd{}, j, N);
      }
      out.f_z.at(i, j) = 0.5 * (fx - cd(0.0, 1.0) * fy);
      out.f_zbar.at(i, j) = 0.5 * (fx + cd(0.0, 1.0) * fy);
    }
  }
  return out;
}

double l2_norm(const ComplexField& f) {
  double s = 0.0;
  for (const cd& v : f.values) s += std::norm(v);
  return f.spec.spacing() * std::sqrt(s);
}

double sup_norm(const ComplexField& f) {
  double s = 0.0;
  for (const cd& v : f.values) s = std::max(s, std::abs(v));
  return s;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) + ": fields live on different grids");
  }
}

}  // namespace beltrami
