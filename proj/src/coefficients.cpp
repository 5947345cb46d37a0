#include "beltrami/coefficients.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace beltrami {

static constexpr double kInf = std::numeric_limits<double>::infinity();

CoefficientField make_coefficient(ComplexField mu, ComplexField nu) {
  require_same_grid(mu.spec, nu.spec, "make_coefficient");
  CoefficientField c;
  c.mu = std::move(mu);
  c.nu = std::move(nu);
  c.mu.meaning = Meaning::coefficient;
  c.nu.meaning = Meaning::coefficient;
  const int N = c.mu.spec.resolution;
  double r = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (c.mu.at(i, j) != cd(0.0, 0.0) || c.nu.at(i, j) != cd(0.0, 0.0)) {
        r = std::max(r, std::abs(c.mu.spec.node(i, j)));
      }
    }
  }
  c.support_radius = r;
  return c;
}

std::vector<GridIndex> coefficient_violations(const CoefficientField& c) {
  std::vector<GridIndex> bad;
  const int N = c.mu.spec.resolution;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const cd m = c.mu.at(i, j);
      const cd n = c.nu.at(i, j);
      if (m == cd(0.0, 0.0) && n == cd(0.0, 0.0)) continue;
      if (std::abs(m) + std::abs(n) >= 1.0) bad.push_back({i, j});
    }
  }
  return bad;
}

TruncationLevel truncation_level(int n) {
  if (n < 1) throw std::invalid_argument("truncation level must be >= 1");
  TruncationLevel t;
  t.n = n;
  t.bound = static_cast<double>(n - 1) / static_cast<double>(n + 1);
  return t;
}

double joint_dilatation_value(cd mu, cd nu) {
  const double s = std::abs(mu) + std::abs(nu);
  if (s >= 1.0) return kInf;
  return (1.0 + s) / (1.0 - s);
}

JointDilatation joint_dilatation(const CoefficientField& c) {
  JointDilatation out;
  out.field = make_field(c.mu.spec, Meaning::scalar);
  const int N = c.mu.spec.resolution;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const cd m = c.mu.at(i, j);
      const cd n = c.nu.at(i, j);
      const double k = joint_dilatation_value(m, n);
      out.field.at(i, j) = cd(k, 0.0);
      if (!(m == cd(0.0, 0.0) && n == cd(0.0, 0.0)) && !(std::abs(m) + std::abs(n) < 1.0)) {
        out.violations.push_back({i, j});
      }
    }
  }
  return out;
}

double single_dilatation(cd mu) {
  const double s = std::abs(mu);
  if (s >= 1.0) throw std::invalid_argument("single_dilatation needs |mu| < 1");
  return (1.0 + s) / (1.0 - s);
}

CoefficientField truncate(const CoefficientField& c, const TruncationLevel& level) {
  ComplexField mu = c.mu;
  ComplexField nu = c.nu;
  const int N = mu.spec.resolution;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double k = joint_dilatation_value(mu.at(i, j), nu.at(i, j));
      if (!(k <= static_cast<double>(level.n))) {
        mu.at(i, j) = cd(0.0, 0.0);
        nu.at(i, j) = cd(0.0, 0.0);
      }
    }
  }
  return make_coefficient(std::move(mu), std::move(nu));
}

EffectiveMu effective_mu(const CoefficientField& c, const ComplexField& f_z) {
  require_same_grid(c.mu.spec, f_z.spec, "effective_mu");
  EffectiveMu out;
  out.field = make_field(c.mu.spec, Meaning::coefficient);
  const int N = c.mu.spec.resolution;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const cd m = c.mu.at(i, j);
      const cd n = c.nu.at(i, j);
      const cd d = f_z.at(i, j);
      if (std::abs(d) < 1e-14) {
        out.field.at(i, j) = m;
        out.flagged.push_back({i, j});
      } else {
        out.field.at(i, j) = m + n * std::conj(d) / d;
      }
    }
  }
  return out;
}

}  // namespace beltrami
