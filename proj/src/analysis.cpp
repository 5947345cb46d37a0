#include "beltrami/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>

#include "beltrami/errors.hpp"

namespace beltrami {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Quadrature {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre nodes by Newton iteration on the recurrence-evaluated
// Legendre polynomial; plenty for the orders used here.
Quadrature gauss_legendre(int n) {
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[k] = x;
    q.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

void check_weight(const Weight& q, const char* what) {
  if (!q.eval) throw std::invalid_argument(std::string(what) + ": empty weight");
}

double weight_at(const Weight& q, cd y) {
  const double v = q.eval(y);
  if (std::isnan(v)) throw std::invalid_argument("weight evaluated to NaN");
  return v;
}

// Distance from a point to the window hull edge in the max metric; negative
// outside.
double window_margin(const GridSpec& spec, cd z) {
  const cd d = z - spec.center;
  return spec.halfwidth - std::max(std::abs(d.real()), std::abs(d.imag()));
}

void require_circle_inside(const Weight& q, cd y0, double r, const char* what) {
  if (q.window && window_margin(*q.window, y0) < r) {
    throw std::invalid_argument(std::string(what) + ": circle leaves the sampled window");
  }
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

size_t node_count(const GridSpec& spec) {
  return static_cast<size_t>(spec.resolution) * spec.resolution;
}

}  // namespace

Weight make_weight(std::function<double(cd)> fn) {
  if (!fn) throw std::invalid_argument("make_weight: empty function");
  Weight w;
  w.eval = std::move(fn);
  return w;
}

Weight make_weight(const ComplexField& q) {
  for (const cd& v : q.values) {
    if (std::isnan(v.real()) || std::isnan(v.imag())) {
      throw std::invalid_argument("make_weight: field contains NaN");
    }
    if (std::isfinite(v.real()) && v.imag() != 0.0) {
      throw std::invalid_argument("make_weight: field is not real-valued");
    }
  }
  auto data = std::make_shared<const ComplexField>(q);
  Weight w;
  w.floor = q.spec.spacing();
  w.window = q.spec;
  w.eval = [data](cd z) -> double {
    const GridSpec& spec = data->spec;
    const int N = spec.resolution;
    const double h = spec.spacing();
    double u = (z.real() - (spec.center.real() - spec.halfwidth)) / h - 0.5;
    double v = (z.imag() - (spec.center.imag() - spec.halfwidth)) / h - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(N - 1));
    v = std::clamp(v, 0.0, static_cast<double>(N - 1));
    const int i0 = std::min(static_cast<int>(u), N - 2);
    const int j0 = std::min(static_cast<int>(v), N - 2);
    const double fu = u - i0;
    const double fv = v - j0;
    const double c00 = data->at(i0, j0).real();
    const double c10 = data->at(i0 + 1, j0).real();
    const double c01 = data->at(i0, j0 + 1).real();
    const double c11 = data->at(i0 + 1, j0 + 1).real();
    if (!std::isfinite(c00) || !std::isfinite(c10) || !std::isfinite(c01) ||
        !std::isfinite(c11)) {
      return kInf;
    }
    return c00 * ((1 - fu) * (1 - fv)) + c10 * (fu * (1 - fv)) + c01 * ((1 - fu) * fv) +
           c11 * (fu * fv);
  };
  return w;
}

double circle_average(const Weight& q, cd y0, double r, int samples) {
  check_weight(q, "circle_average");
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("circle_average: radius must be positive and finite");
  }
  if (samples < 720) {
    throw std::invalid_argument("circle_average: at least 720 samples required");
  }
  require_circle_inside(q, y0, r, "circle_average");
  double acc = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / samples;
    const double v = weight_at(q, y0 + std::polar(r, theta));
    if (!std::isfinite(v)) return kInf;
    acc += v;
  }
  return acc / samples;
}

double circle_average(const ComplexField& q, cd y0, double r, int samples) {
  return circle_average(make_weight(q), y0, r, samples);
}

IntegrabilityScan circle_integrability_scan(const Weight& q, cd y0, double r1, double r2,
                                            int samples, double min_fraction) {
  check_weight(q, "circle_integrability_scan");
  if (!(0.0 < r1 && r1 < r2 && r2 < 1.0)) {
    throw std::invalid_argument("circle_integrability_scan: need 0 < r1 < r2 < 1");
  }
  if (samples < 1) throw std::invalid_argument("circle_integrability_scan: samples < 1");
  if (!(min_fraction > 0.0 && min_fraction <= 1.0)) {
    throw std::invalid_argument("circle_integrability_scan: min_fraction outside (0, 1]");
  }
  IntegrabilityScan out;
  out.scanned = samples;
  for (int i = 0; i < samples; ++i) {
    const double r = r1 + (r2 - r1) * (i + 0.5) / samples;
    if (std::isfinite(circle_average(q, y0, r))) out.witness_radii.push_back(r);
  }
  out.pass = static_cast<double>(out.witness_radii.size()) >= min_fraction * samples;
  return out;
}

DivergenceReport divergence_check(const Weight& q, cd w0, double delta, int octaves) {
  check_weight(q, "divergence_check");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("divergence_check: delta must be positive and finite");
  }
  if (octaves < 8) throw std::invalid_argument("divergence_check: need at least 8 octaves");
  if (q.window && window_margin(*q.window, w0) < delta) {
    throw std::invalid_argument("divergence_check: disk leaves the sampled window");
  }

  // Substituting t = b e^{-u} turns each octave [b/2, b] into
  // int_0^{log 2} du / q(b e^{-u}).
  static const Quadrature gl = gauss_legendre(16);
  const double half = 0.5 * std::numbers::ln2;

  DivergenceReport rep;
  double total = 0.0;
  for (int j = 0; j < octaves; ++j) {
    const double b = delta * std::pow(0.5, j);
    double inc = 0.0;
    for (size_t k = 0; k < gl.nodes.size(); ++k) {
      const double u = half * (gl.nodes[k] + 1.0);
      const double t = b * std::exp(-u);
      const double qt = circle_average(q, w0, t);
      if (qt < 0.0) throw std::invalid_argument("divergence_check: negative circle average");
      if (qt == 0.0) {
        // infinite integrand on this octave: the integral blows up outright
        rep.zero_average = true;
        rep.divergent = true;
        rep.value = kInf;
        return rep;
      }
      if (std::isinf(qt)) continue;  // integrand vanishes
      inc += half * gl.weights[k] / qt;
    }
    rep.octave_increments.push_back(inc);
    total += inc;
  }

  std::vector<double> ratios;
  const auto& d = rep.octave_increments;
  for (size_t i = d.size() - 5; i < d.size(); ++i) {
    ratios.push_back(d[i - 1] > 0.0 ? d[i] / d[i - 1] : 0.0);
  }
  rep.tail_ratio = median_of(ratios);
  if (rep.tail_ratio >= 0.95) {
    rep.divergent = true;
    rep.value = kInf;
  } else {
    // geometric tail below the last octave
    const double r = rep.tail_ratio;
    rep.value = total + (r > 0.0 ? d.back() * r / (1.0 - r) : 0.0);
  }
  return rep;
}

FmoReport fmo_estimate(const Weight& q, cd z0, const std::vector<double>& eps_ladder) {
  check_weight(q, "fmo_estimate");
  if (eps_ladder.empty()) throw std::invalid_argument("fmo_estimate: empty ladder");
  for (size_t i = 0; i < eps_ladder.size(); ++i) {
    if (!(eps_ladder[i] > 0.0) || !std::isfinite(eps_ladder[i])) {
      throw std::invalid_argument("fmo_estimate: ladder entries must be positive");
    }
    if (i > 0 && eps_ladder[i] >= eps_ladder[i - 1]) {
      throw std::invalid_argument("fmo_estimate: ladder must be strictly decreasing");
    }
  }
  if (q.window && window_margin(*q.window, z0) < eps_ladder.front()) {
    throw std::invalid_argument("fmo_estimate: disk leaves the sampled window");
  }

  FmoReport rep;
  for (double e : eps_ladder) {
    if (e >= 4.0 * q.floor) {
      rep.eps.push_back(e);
    } else {
      ++rep.dropped;
    }
  }

  // Graded radial panels handle integrable singularities at the center; the
  // quadrature area reproduces pi eps^2 exactly, so the constant weight has
  // zero oscillation in exact arithmetic.
  static const Quadrature gl = gauss_legendre(16);
  const double panel_edges[] = {0.0, 1.0 / 64.0, 1.0 / 16.0, 0.25, 1.0};
  const int angles = 64;

  for (double e : rep.eps) {
    std::vector<double> rs, rws;  // radius and (GL weight * r * dtheta) products
    for (int p = 0; p < 4; ++p) {
      const double a = e * panel_edges[p], b = e * panel_edges[p + 1];
      for (size_t k = 0; k < gl.nodes.size(); ++k) {
        const double r = 0.5 * (b - a) * (gl.nodes[k] + 1.0) + a;
        rs.push_back(r);
        rws.push_back(0.5 * (b - a) * gl.weights[k] * r * (2.0 * std::numbers::pi / angles));
      }
    }
    std::vector<double> vals(rs.size() * angles);
    bool infinite = false;
    double mass = 0.0;
    for (size_t i = 0; i < rs.size() && !infinite; ++i) {
      for (int k = 0; k < angles; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / angles;
        const double v = weight_at(q, z0 + std::polar(rs[i], theta));
        if (!std::isfinite(v)) {
          infinite = true;
          break;
        }
        vals[i * angles + k] = v;
        mass += rws[i] * v;
      }
    }
    if (infinite) {
      rep.oscillation.push_back(kInf);
      continue;
    }
    const double area = std::numbers::pi * e * e;
    const double mean = mass / area;
    double osc = 0.0;
    for (size_t i = 0; i < rs.size(); ++i) {
      for (int k = 0; k < angles; ++k) {
        osc += rws[i] * std::abs(vals[i * angles + k] - mean);
      }
    }
    osc /= area;
    // flush quadrature roundoff so exact constants report zero
    if (osc < 1e-13 * std::max(1.0, std::abs(mean))) osc = 0.0;
    rep.oscillation.push_back(osc);
  }

  if (rep.dropped > 0 || rep.eps.size() < 4) {
    rep.outcome = FmoReport::Outcome::undetermined;
    if (!rep.oscillation.empty()) {
      rep.limsup_estimate =
          *std::max_element(rep.oscillation.begin() + rep.oscillation.size() / 2,
                            rep.oscillation.end());
    }
    return rep;
  }
  const double med = median_of(rep.oscillation);
  const double tail_max = *std::max_element(
      rep.oscillation.begin() + rep.oscillation.size() / 2, rep.oscillation.end());
  rep.limsup_estimate = tail_max;
  rep.outcome =
      tail_max <= 2.0 * med ? FmoReport::Outcome::pass : FmoReport::Outcome::fail;
  return rep;
}

CondenserMasks annulus_condenser(const GridSpec& spec, cd center, double r1, double r2) {
  if (!(0.0 < r1 && r1 < r2) || !std::isfinite(r2)) {
    throw std::invalid_argument("annulus_condenser: need 0 < r1 < r2");
  }
  CondenserMasks m;
  m.spec = spec;
  m.plate1.assign(node_count(spec), 0);
  m.plate0.assign(node_count(spec), 0);
  const int N = spec.resolution;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double d = std::abs(spec.node(i, j) - center);
      const size_t idx = static_cast<size_t>(i) * N + j;
      if (d <= r1) {
        m.plate1[idx] = 1;
      } else if (d >= r2) {
        m.plate0[idx] = 1;
      }
    }
  }
  return m;
}

CondenserMasks map_annulus_condenser(const SampledMap& f, cd y0, double r1, double r2) {
  if (!(0.0 < r1 && r1 < r2) || !std::isfinite(r2)) {
    throw std::invalid_argument("map_annulus_condenser: need 0 < r1 < r2");
  }
  CondenserMasks m;
  m.spec = f.spec;
  m.plate1.assign(node_count(f.spec), 0);
  m.plate0.assign(node_count(f.spec), 0);
  const int N = f.spec.resolution;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const size_t idx = static_cast<size_t>(i) * N + j;
      if (f.flags[idx]) continue;
      const cd node = f.spec.node(i, j);
      const double d = std::abs(node + f.displacement.values[idx] - y0);
      if (d <= r1) {
        m.plate1[idx] = 1;
      } else if (d >= r2) {
        m.plate0[idx] = 1;
      }
    }
  }
  return m;
}

double discrete_capacity(const CondenserMasks& masks, double tol, int max_iter) {
  const int N = masks.spec.resolution;
  const size_t total = node_count(masks.spec);
  if (N < 4) throw std::invalid_argument("discrete_capacity: grid too small");
  if (masks.plate1.size() != total || masks.plate0.size() != total) {
    throw std::invalid_argument("discrete_capacity: mask size mismatch");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("discrete_capacity: tol must be positive");

  bool have1 = false, have0 = false;
  for (size_t k = 0; k < total; ++k) {
    if (masks.plate1[k] && masks.plate0[k]) {
      throw std::invalid_argument("discrete_capacity: plates overlap");
    }
    have1 = have1 || masks.plate1[k];
    have0 = have0 || masks.plate0[k];
  }
  if (!have1 || !have0) throw std::invalid_argument("discrete_capacity: empty plate");

  auto at = [N](const std::vector<unsigned char>& v, int i, int j) {
    return v[static_cast<size_t>(i) * N + j] != 0;
  };
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (!at(masks.plate1, i, j)) continue;
      const bool touch = (i > 0 && at(masks.plate0, i - 1, j)) ||
                         (i + 1 < N && at(masks.plate0, i + 1, j)) ||
                         (j > 0 && at(masks.plate0, i, j - 1)) ||
                         (j + 1 < N && at(masks.plate0, i, j + 1));
      if (touch) throw std::invalid_argument("discrete_capacity: continua touch");
    }
  }

  // compact indexing of free nodes
  std::vector<int> idx(total, -1);
  std::vector<int> free_nodes;
  for (size_t k = 0; k < total; ++k) {
    if (!masks.plate1[k] && !masks.plate0[k]) {
      idx[k] = static_cast<int>(free_nodes.size());
      free_nodes.push_back(static_cast<int>(k));
    }
  }
  if (free_nodes.empty()) throw std::invalid_argument("discrete_capacity: no ring interior");
  const size_t n = free_nodes.size();

  std::vector<double> deg(n, 0.0), b(n, 0.0);
  auto neighbors = [N](int k, int out[4]) {
    const int i = k / N, j = k % N;
    int c = 0;
    if (i > 0) out[c++] = k - N;
    if (i + 1 < N) out[c++] = k + N;
    if (j > 0) out[c++] = k - 1;
    if (j + 1 < N) out[c++] = k + 1;
    return c;
  };
  for (size_t a = 0; a < n; ++a) {
    int nb[4];
    const int c = neighbors(free_nodes[a], nb);
    deg[a] = c;  // window edges insulated: missing neighbors drop out
    for (int t = 0; t < c; ++t) {
      if (masks.plate1[nb[t]]) b[a] += 1.0;
    }
  }

  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (size_t a = 0; a < n; ++a) {
      int nb[4];
      const int c = neighbors(free_nodes[a], nb);
      double acc = deg[a] * x[a];
      for (int t = 0; t < c; ++t) {
        const int fa = idx[nb[t]];
        if (fa >= 0) acc -= x[fa];
      }
      y[a] = acc;
    }
  };

  // Jacobi-preconditioned conjugate gradients
  std::vector<double> x(n, 0.0), r(b), z(n), p(n), Ap(n);
  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) {
    throw std::invalid_argument("discrete_capacity: plates are not connected to the ring");
  }
  for (size_t a = 0; a < n; ++a) z[a] = r[a] / deg[a];
  p = z;
  double rz = 0.0;
  for (size_t a = 0; a < n; ++a) rz += r[a] * z[a];
  bool converged = false;
  int used_iters = 0;
  for (int it = 0; it < max_iter; ++it) {
    apply(p, Ap);
    double pAp = 0.0;
    for (size_t a = 0; a < n; ++a) pAp += p[a] * Ap[a];
    const double alpha = rz / pAp;
    double rnorm = 0.0;
    for (size_t a = 0; a < n; ++a) {
      x[a] += alpha * p[a];
      r[a] -= alpha * Ap[a];
      rnorm += r[a] * r[a];
    }
    used_iters = it + 1;
    if (std::sqrt(rnorm) <= tol * bnorm) {
      converged = true;
      break;
    }
    double rz_next = 0.0;
    for (size_t a = 0; a < n; ++a) {
      z[a] = r[a] / deg[a];
      rz_next += r[a] * z[a];
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (size_t a = 0; a < n; ++a) p[a] = z[a] + beta * p[a];
  }
  if (!converged) {
    double rnorm = 0.0;
    for (double v : r) rnorm += v * v;
    throw solver_error(solver_error::Kind::no_convergence, 0, used_iters,
                       std::sqrt(rnorm) / bnorm,
                       "discrete_capacity: conjugate gradients did not converge");
  }

  std::vector<double> u(total, 0.0);
  for (size_t k = 0; k < total; ++k) {
    if (masks.plate1[k]) {
      u[k] = 1.0;
    } else if (idx[k] >= 0) {
      u[k] = x[idx[k]];
    }
  }
  double energy = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const size_t k = static_cast<size_t>(i) * N + j;
      if (i + 1 < N) {
        const double d = u[k + N] - u[k];
        energy += d * d;
      }
      if (j + 1 < N) {
        const double d = u[k + 1] - u[k];
        energy += d * d;
      }
    }
  }
  return energy;
}

PoletskyReport inverse_poletsky_check(const SampledMap& f, const SampledMap& g,
                                      const Weight& q, const Annulus& ann, EtaKind eta) {
  check_weight(q, "inverse_poletsky_check");
  if (!(0.0 < ann.r1 && ann.r1 < ann.r2) || !std::isfinite(ann.r2)) {
    throw std::invalid_argument("inverse_poletsky_check: need 0 < r1 < r2");
  }
  if (window_margin(g.spec, ann.center) < ann.r2) {
    throw std::invalid_argument("inverse_poletsky_check: annulus leaves the image window");
  }

  PoletskyReport rep;
  CondenserMasks masks = map_annulus_condenser(f, ann.center, ann.r1, ann.r2);
  rep.lhs = discrete_capacity(masks);

  const double L = std::log(ann.r2 / ann.r1);
  auto eta_sq = [&](double t) {
    if (eta == EtaKind::uniform) {
      const double e = 1.0 / (ann.r2 - ann.r1);
      return e * e;
    }
    const double e = 1.0 / (t * L);
    return e * e;
  };

  static const Quadrature gl = gauss_legendre(12);
  const int panels = 8;
  double rhs = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = ann.r1 + (ann.r2 - ann.r1) * p / panels;
    const double b = ann.r1 + (ann.r2 - ann.r1) * (p + 1) / panels;
    for (size_t k = 0; k < gl.nodes.size(); ++k) {
      const double t = 0.5 * (b - a) * (gl.nodes[k] + 1.0) + a;
      const double w = 0.5 * (b - a) * gl.weights[k];
      const double qt = circle_average(q, ann.center, t);
      rhs += w * t * eta_sq(t) * (2.0 * std::numbers::pi * qt);
    }
  }
  rep.rhs = rhs;
  rep.holds = rep.lhs <= 1.05 * rep.rhs;
  return rep;
}

double region_gap(const Region& inner, const Region& outer) {
  const cd d = inner.center - outer.center;
  // farthest reach of the inner set from the outer center / axes
  if (outer.shape == Region::Shape::disk) {
    double reach;
    if (inner.shape == Region::Shape::disk) {
      reach = std::abs(d) + inner.size;
    } else {
      reach = 0.0;
      for (double sx : {-1.0, 1.0}) {
        for (double sy : {-1.0, 1.0}) {
          reach = std::max(reach, std::abs(d + cd(sx * inner.size, sy * inner.size)));
        }
      }
    }
    return outer.size - reach;
  }
  const double rx = std::abs(d.real()) + inner.size;
  const double ry = std::abs(d.imag()) + inner.size;
  return outer.size - std::max(rx, ry);
}

EquicontinuityReport equicontinuity_bound(const std::vector<const SampledMap*>& maps,
                                          const Region& K, const Region& G, int pairs,
                                          unsigned seed) {
  if (maps.empty()) throw std::invalid_argument("equicontinuity_bound: no maps");
  for (const SampledMap* m : maps) {
    if (m == nullptr) throw std::invalid_argument("equicontinuity_bound: null map");
  }
  if (pairs < 1) throw std::invalid_argument("equicontinuity_bound: pairs < 1");
  const double r0 = region_gap(K, G);
  if (!(r0 > 0.0)) {
    throw std::invalid_argument("equicontinuity_bound: K touches the boundary of G");
  }
  for (const SampledMap* m : maps) {
    const Region window{Region::Shape::square, m->spec.center, m->spec.halfwidth};
    if (region_gap(G, window) < -1e-9 * std::max(1.0, m->spec.halfwidth)) {
      throw std::invalid_argument("equicontinuity_bound: G exceeds a map window");
    }
  }

  EquicontinuityReport rep;
  rep.gap = r0;
  std::mt19937_64 gen(seed);
  for (size_t mi = 0; mi < maps.size(); ++mi) {
    const SampledMap& f = *maps[mi];
    const int N = f.spec.resolution;
    std::vector<size_t> inside;
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        const size_t k = static_cast<size_t>(i) * N + j;
        if (!f.flags[k] && K.contains(f.spec.node(i, j))) inside.push_back(k);
      }
    }
    if (inside.size() < 2) {
      throw std::invalid_argument("equicontinuity_bound: K covers fewer than two nodes");
    }
    std::uniform_int_distribution<size_t> pick(0, inside.size() - 1);
    for (int t = 0; t < pairs; ++t) {
      const size_t ka = inside[pick(gen)];
      const size_t kb = inside[pick(gen)];
      if (ka == kb) continue;
      const cd x = f.spec.node(static_cast<int>(ka) / N, static_cast<int>(ka) % N);
      const cd y = f.spec.node(static_cast<int>(kb) / N, static_cast<int>(kb) % N);
      const double dist = std::abs(x - y);
      const double diff = std::abs(x + f.displacement.values[ka] -
                                   (y + f.displacement.values[kb]));
      const double c = diff * std::sqrt(std::log1p(r0 / (2.0 * dist)));
      if (c > rep.c_hat) {
        rep.c_hat = c;
        rep.x = x;
        rep.y = y;
        rep.map_index = mi;
      }
    }
  }
  return rep;
}

const char* verdict_name(ClassificationVerdict::Kind kind) {
  switch (kind) {
    case ClassificationVerdict::Kind::normal: return "normal";
    case ClassificationVerdict::Kind::compact: return "compact";
    case ClassificationVerdict::Kind::undetermined: return "undetermined";
  }
  return "undetermined";
}

ClassificationVerdict classify(const Weight& q, const Region& domain,
                               const std::vector<cd>& probes, const ClassifyOptions& opt) {
  check_weight(q, "classify");
  if (probes.empty()) throw std::invalid_argument("classify: no probes");
  if (!(0.0 < opt.scan_r1 && opt.scan_r1 < opt.scan_r2 && opt.scan_r2 < 1.0)) {
    throw std::invalid_argument("classify: need 0 < scan_r1 < scan_r2 < 1");
  }
  if (opt.scan_radii < 10) throw std::invalid_argument("classify: scan_radii < 10");
  if (!(opt.delta > 0.0)) throw std::invalid_argument("classify: delta must be positive");
  for (cd p : probes) {
    if (!domain.contains(p)) throw std::invalid_argument("classify: probe outside domain");
  }

  ClassificationVerdict out;
  bool all_usable = true;
  bool all_integrable = true;
  bool any_fmo_fail = false, all_fmo_pass = true;
  bool all_divergent = true;

  for (cd probe : probes) {
    ProbeFindings pf;
    pf.probe = probe;
    double margin = region_gap(Region{Region::Shape::disk, probe, 0.0}, domain);
    if (q.window) margin = std::min(margin, window_margin(*q.window, probe));
    const double reach = 0.95 * margin;

    const double r2 = std::min(opt.scan_r2, reach);
    if (!(r2 > opt.scan_r1)) {
      all_usable = false;
      out.probes.push_back(pf);
      continue;
    }
    pf.usable = true;
    pf.integrability =
        circle_integrability_scan(q, probe, opt.scan_r1, r2, opt.scan_radii,
                                  opt.min_fraction);
    all_integrable = all_integrable && pf.integrability.pass;

    std::vector<double> ladder;
    for (double e : opt.fmo_ladder) {
      if (e <= reach) ladder.push_back(e);
    }
    if (ladder.size() >= 2) {
      pf.fmo = fmo_estimate(q, probe, ladder);
    }  // else: default-constructed undetermined report
    any_fmo_fail = any_fmo_fail || pf.fmo.outcome == FmoReport::Outcome::fail;
    all_fmo_pass = all_fmo_pass && pf.fmo.outcome == FmoReport::Outcome::pass;

    pf.divergence = divergence_check(q, probe, std::min(opt.delta, reach));
    all_divergent = all_divergent && pf.divergence.divergent;

    out.probes.push_back(std::move(pf));
  }

  out.circle_integrability = all_usable && all_integrable;
  out.fmo = all_fmo_pass ? FmoReport::Outcome::pass
            : any_fmo_fail ? FmoReport::Outcome::fail
                           : FmoReport::Outcome::undetermined;
  out.divergence = all_usable && all_divergent;

  if (!all_usable || !all_integrable) {
    out.verdict = ClassificationVerdict::Kind::undetermined;
  } else if (out.fmo == FmoReport::Outcome::pass || out.divergence) {
    out.verdict = ClassificationVerdict::Kind::compact;
  } else {
    out.verdict = ClassificationVerdict::Kind::normal;
  }
  return out;
}

}  // namespace beltrami
