#include "beltrami/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace beltrami::oracle {

static constexpr double kInf = std::numeric_limits<double>::infinity();

static void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 2.0)) {
    throw std::invalid_argument("oracle family needs alpha in (0, 2)");
  }
}

ExampleParams example_params(double alpha, double k) {
  check_alpha(alpha);
  if (!(k * alpha > 1.0)) {
    throw std::invalid_argument("oracle family needs k > 1/alpha");
  }
  ExampleParams p;
  p.alpha = alpha;
  p.k = k;
  p.rho = 0.5 * k * alpha / (k * alpha - 1.0);
  p.tau = std::pow(1.0 / (k * alpha - 1.0), 1.0 / alpha);
  if (p.rho >= 1.0) {
    throw std::invalid_argument(
        "degenerate truncation: k*alpha <= 2 keeps nothing of the coefficient");
  }
  return p;
}

bool truncation_trivial(double alpha, double k) {
  check_alpha(alpha);
  if (!(k * alpha > 1.0)) {
    throw std::invalid_argument("oracle family needs k > 1/alpha");
  }
  return k * alpha <= 2.0;
}

cd mu(cd z, double alpha) {
  check_alpha(alpha);
  const double r = std::abs(z);
  if (r < 0.5 || r >= 1.0) return cd(0.0, 0.0);
  const cd dir = z / r;  // e^{i theta}
  const double num = 2.0 * r - alpha * (2.0 * r - 1.0);
  const double den = 2.0 * r + alpha * (2.0 * r - 1.0);
  return dir * dir * (num / den);
}

cd limit_map(cd z, double alpha) {
  check_alpha(alpha);
  const double r = std::abs(z);
  if (r <= 0.5) return cd(0.0, 0.0);
  if (r >= 1.0) return z;
  return (z / r) * std::pow(2.0 * r - 1.0, 1.0 / alpha);
}

cd truncated_map(cd z, const ExampleParams& p) {
  const double r = std::abs(z);
  if (r >= 1.0) return z;
  if (r >= p.rho) return (z / r) * std::pow(2.0 * r - 1.0, 1.0 / p.alpha);
  return z * (p.tau / p.rho);
}

cd inverse_map(cd y, const ExampleParams& p) {
  const double s = std::abs(y);
  if (s >= 1.0) return y;
  if (s >= p.tau) return y * ((std::pow(s, p.alpha) + 1.0) / (2.0 * s));
  return y * (p.rho / p.tau);
}

double max_dilatation(cd z, double alpha) {
  check_alpha(alpha);
  const double r = std::abs(z);
  if (r < 0.5 || r >= 1.0) return 1.0;
  const double den = alpha * (2.0 * r - 1.0);
  if (den == 0.0) return kInf;
  return 2.0 * r / den;
}

double truncated_dilatation(cd z, const ExampleParams& p) {
  const double r = std::abs(z);
  if (r < p.rho || r >= 1.0) return 1.0;
  return 2.0 * r / (p.alpha * (2.0 * r - 1.0));
}

double inverse_dilatation(cd y, const ExampleParams& p) {
  const double s = std::abs(y);
  if (s < p.tau || s >= 1.0) return 1.0;
  const double sa = std::pow(s, p.alpha);
  return (sa + 1.0) / (p.alpha * sa);
}

double majorant(cd y, double alpha) {
  check_alpha(alpha);
  const double s = std::abs(y);
  if (s >= 1.0) return 1.0;
  if (s == 0.0) return kInf;
  const double sa = std::pow(s, alpha);
  return (sa + 1.0) / (alpha * sa);
}

PolarMu mu_from_polar(const std::function<cd(cd)>& f, cd z, double rel_step) {
  const double r = std::abs(z);
  if (r == 0.0) {
    throw std::invalid_argument("mu_from_polar is undefined at the origin");
  }
  const double theta = std::arg(z);
  const double dr = rel_step * std::max(r, 1.0);
  const double dt = rel_step;
  auto at = [&](double rr, double tt) { return f(std::polar(rr, tt)); };
  const cd f_r = (at(r + dr, theta) - at(r - dr, theta)) / (2.0 * dr);
  const cd f_t = (at(r, theta + dt) - at(r, theta - dt)) / (2.0 * dt);
  const cd i{0.0, 1.0};
  const cd num = r * f_r + i * f_t;
  const cd den = r * f_r - i * f_t;
  const cd dir = std::polar(1.0, 2.0 * theta);
  PolarMu out;
  // central differences carry a roundoff floor near eps/step, so the
  // degeneracy cutoff sits well above it
  const double scale = std::abs(r * f_r) + std::abs(f_t);
  if (std::abs(den) <= 1e-8 * std::max(scale, 1e-300)) {
    out.value = cd(kInf, 0.0);
    out.degenerate = true;
    return out;
  }
  out.value = dir * (num / den);
  out.degenerate = false;
  return out;
}

}  // namespace beltrami::oracle
