#include "beltrami/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "beltrami/errors.hpp"

namespace beltrami {

SampledMap SampledMap::from_function(const std::function<cd(cd)>& f, const GridSpec& spec) {
  SampledMap out;
  out.spec = spec;
  out.displacement = sample([&](cd z) { return f(z) - z; }, spec, Meaning::displacement);
  WirtingerDerivatives d = wirtinger(out.displacement);
  for (cd& v : d.f_z.values) v += cd(1.0, 0.0);
  out.f_z = std::move(d.f_z);
  out.f_zbar = std::move(d.f_zbar);
  out.flags.assign(out.displacement.values.size(), 0);
  return out;
}

PrincipalSolution solve_principal(const CoefficientField& coeff, const TransformPlan& plan,
                                  const SolveOptions& opts) {
  const GridSpec& spec = coeff.mu.spec;
  require_same_grid(spec, plan.spec(), "solve");
  if (!(opts.tol > 0.0) || !std::isfinite(opts.tol)) {
    throw std::invalid_argument("solve tolerance must be positive and finite");
  }
  if (opts.max_iter < 1) throw std::invalid_argument("solve needs at least one iteration");

  const std::vector<cd>& mu = coeff.mu.values;
  const std::vector<cd>& nu = coeff.nu.values;
  const size_t total = mu.size();
  const double h_cell = spec.spacing();

  double bound = 0.0;
  for (size_t t = 0; t < total; ++t) bound = std::max(bound, std::abs(mu[t]) + std::abs(nu[t]));

  SolveDiagnostics diag;
  diag.contraction_bound = bound;

  ComplexField h = make_field(spec, Meaning::derivative);
  const double ratio_limit = std::min(bound, 1.0) + 0.05;
  double prev_gap = std::numeric_limits<double>::infinity();
  int rising = 0;
  bool converged = false;

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    ComplexField sh = plan.beurling(h);
    // next iterate overwrites sh in place: one big buffer fewer per pass
    double gap_sq = 0.0;
    double norm_sq = 0.0;
    for (size_t t = 0; t < total; ++t) {
      const cd next = mu[t] + nu[t] + mu[t] * sh.values[t] + nu[t] * std::conj(sh.values[t]);
      gap_sq += std::norm(next - h.values[t]);
      norm_sq += std::norm(next);
      h.values[t] = next;
    }
    const double gap = h_cell * std::sqrt(gap_sq);
    const double norm = h_cell * std::sqrt(norm_sq);
    diag.gaps.push_back(gap);
    diag.iterations = iter;

    if (!std::isfinite(gap)) {
      throw solver_error(solver_error::Kind::divergence, 0, iter, gap,
                         "iteration blew up to non-finite values");
    }
    if (gap <= opts.tol * std::max(norm, 0.0) || gap == 0.0) {
      converged = true;
      break;
    }
    // divergence detector: gaps should shrink by roughly the contraction
    // bound; three consecutive ratios above it (while clear of the roundoff
    // floor) mean the series is not going to come back
    if (gap > ratio_limit * prev_gap && gap > 1e-14 * std::max(norm, 1.0)) {
      if (++rising >= 3) {
        throw solver_error(solver_error::Kind::divergence, 0, iter, gap / std::max(norm, 1e-300),
                           "iteration gaps grew for three consecutive steps");
      }
    } else {
      rising = 0;
    }
    prev_gap = gap;
  }

  if (!converged) {
    throw solver_error(solver_error::Kind::no_convergence, 0, diag.iterations,
                       diag.gaps.empty() ? 0.0 : diag.gaps.back(),
                       "iteration limit reached before the gap fell under tolerance");
  }

  ComplexField sh = plan.beurling(h);
  ComplexField f_z = make_field(spec, Meaning::derivative);
  double res_sq = 0.0;
  double fz_sq = 0.0;
  for (size_t t = 0; t < total; ++t) {
    const cd fz = cd(1.0, 0.0) + sh.values[t];
    f_z.values[t] = fz;
    const cd res = h.values[t] - mu[t] * fz - nu[t] * std::conj(fz);
    res_sq += std::norm(res);
    fz_sq += std::norm(fz);
  }
  diag.residual = h_cell * std::sqrt(res_sq);
  const double fz_norm = h_cell * std::sqrt(fz_sq);
  diag.relative_residual = fz_norm > 0.0 ? diag.residual / fz_norm : 0.0;

  PrincipalSolution out;
  out.map.spec = spec;
  out.map.displacement = plan.cauchy(h);
  out.map.f_z = std::move(f_z);
  out.map.f_zbar = std::move(h);
  out.map.f_zbar.meaning = Meaning::derivative;
  out.map.flags.assign(total, 0);
  out.diagnostics = std::move(diag);
  return out;
}

PrincipalSolution solve_principal(const CoefficientField& coeff, const SolveOptions& opts) {
  TransformPlan plan(coeff.mu.spec);
  return solve_principal(coeff, plan, opts);
}

namespace {

cd clamp_to_window(cd z, const GridSpec& spec) {
  const double x = std::clamp(z.real(), spec.center.real() - spec.halfwidth,
                              spec.center.real() + spec.halfwidth);
  const double y = std::clamp(z.imag(), spec.center.imag() - spec.halfwidth,
                              spec.center.imag() + spec.halfwidth);
  return cd(x, y);
}

// uniform bucket hash over the node images, used to seed Newton
struct ImageHash {
  double xmin = 0.0, ymin = 0.0, inv_w = 0.0;
  int bins = 1;
  std::vector<int> start;    // bins * bins + 1 prefix offsets
  std::vector<int> indices;  // node storage indices, bucket-sorted

  int bucket_x(double x) const {
    return std::clamp(static_cast<int>((x - xmin) * inv_w), 0, bins - 1);
  }
  int bucket_y(double y) const {
    return std::clamp(static_cast<int>((y - ymin) * inv_w), 0, bins - 1);
  }
};

ImageHash build_image_hash(const SampledMap& f, const std::vector<cd>& images) {
  ImageHash hash;
  const int n = f.spec.resolution;
  const size_t total = images.size();
  double xmin = images[0].real(), xmax = xmin;
  double ymin = images[0].imag(), ymax = ymin;
  for (const cd& w : images) {
    xmin = std::min(xmin, w.real());
    xmax = std::max(xmax, w.real());
    ymin = std::min(ymin, w.imag());
    ymax = std::max(ymax, w.imag());
  }
  hash.bins = std::clamp(n / 2, 8, 2048);
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  hash.xmin = xmin;
  hash.ymin = ymin;
  hash.inv_w = hash.bins / (span * (1.0 + 1e-12));
  const int nb = hash.bins * hash.bins;
  std::vector<int> counts(nb, 0);
  auto bucket_of = [&](const cd& w) {
    return hash.bucket_x(w.real()) * hash.bins + hash.bucket_y(w.imag());
  };
  for (const cd& w : images) ++counts[bucket_of(w)];
  hash.start.assign(nb + 1, 0);
  for (int b = 0; b < nb; ++b) hash.start[b + 1] = hash.start[b] + counts[b];
  hash.indices.assign(total, 0);
  std::vector<int> cursor(hash.start.begin(), hash.start.end() - 1);
  for (size_t t = 0; t < total; ++t) {
    const int b = bucket_of(images[t]);
    hash.indices[cursor[b]++] = static_cast<int>(t);
  }
  return hash;
}

// nearest node image to y: scan bucket rings outward until one ring past the
// first hit
int nearest_image(const ImageHash& hash, const std::vector<cd>& images, cd y) {
  const int bx = hash.bucket_x(y.real());
  const int by = hash.bucket_y(y.imag());
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  int stop_ring = std::numeric_limits<int>::max();
  for (int ring = 0; ring < hash.bins && ring <= stop_ring; ++ring) {
    const int x0 = std::max(bx - ring, 0), x1 = std::min(bx + ring, hash.bins - 1);
    const int y0 = std::max(by - ring, 0), y1 = std::min(by + ring, hash.bins - 1);
    for (int cx = x0; cx <= x1; ++cx) {
      for (int cy = y0; cy <= y1; ++cy) {
        if (ring > 0 && cx != x0 && cx != x1 && cy != y0 && cy != y1) continue;  // ring shell only
        const int b = cx * hash.bins + cy;
        for (int t = hash.start[b]; t < hash.start[b + 1]; ++t) {
          const int idx = hash.indices[t];
          const double d = std::abs(images[idx] - y);
          if (d < best_d) {
            best_d = d;
            best = idx;
          }
        }
      }
    }
    if (best >= 0 && stop_ring == std::numeric_limits<int>::max()) stop_ring = ring + 1;
  }
  return best;
}

InversionResult invert_one(const SampledMap& f, cd y, cd seed) {
  const double tol = 1e-10 * std::max(1.0, std::abs(y));
  const double step_cap = f.spec.halfwidth;
  const double fd = 0.25 * f.spec.spacing();
  cd z = clamp_to_window(seed, f.spec);
  cd best_z = z;
  double best_err = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= 50; ++iter) {
    const cd e = y - f.eval(z);
    const double err = std::abs(e);
    if (err < best_err) {
      best_err = err;
      best_z = z;
    }
    if (err <= tol) return {z, true, iter};
    cd fz, fzb;
    if (iter <= 10) {
      fz = f.deriv_z(z);
      fzb = f.deriv_zbar(z);
    } else {
      // near derivative creases the sampled fields stop matching the local
      // slope of the interpolated map and plain Newton stalls; differencing
      // the evaluation itself is exact within a bilinear cell
      const cd ex = (f.eval(z + cd(fd, 0)) - f.eval(z - cd(fd, 0))) / (2.0 * fd);
      const cd ey = (f.eval(z + cd(0, fd)) - f.eval(z - cd(0, fd))) / (2.0 * fd);
      fz = 0.5 * (ex - cd(0, 1) * ey);
      fzb = 0.5 * (ex + cd(0, 1) * ey);
    }
    const double det = std::norm(fz) - std::norm(fzb);
    if (!(std::abs(det) > 1e-30)) break;
    cd step = (std::conj(fz) * e - fzb * std::conj(e)) / det;
    const double len = std::abs(step);
    if (len > step_cap) step *= step_cap / len;
    z = clamp_to_window(z + step, f.spec);
  }
  return {best_z, false, 50};
}

}  // namespace

std::vector<InversionResult> invert_map(const SampledMap& f, const std::vector<cd>& targets) {
  std::vector<InversionResult> out(targets.size());
  if (targets.empty()) return out;

  const int n = f.spec.resolution;
  std::vector<cd> images(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      images[static_cast<size_t>(i) * n + j] = f.spec.node(i, j) + f.displacement.at(i, j);
    }
  }
  const ImageHash hash = build_image_hash(f, images);

  for (size_t t = 0; t < targets.size(); ++t) {
    const int idx = nearest_image(hash, images, targets[t]);
    const cd seed = f.spec.node(idx / n, idx % n);
    out[t] = invert_one(f, targets[t], seed);
  }
  return out;
}

SampledMap sample_inverse(const SampledMap& f, const GridSpec& target) {
  const int n = target.resolution;
  std::vector<cd> targets(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) targets[static_cast<size_t>(i) * n + j] = target.node(i, j);
  }
  const std::vector<InversionResult> inv = invert_map(f, targets);

  SampledMap g;
  g.spec = target;
  g.displacement = make_field(target, Meaning::displacement);
  std::vector<unsigned char> failed(targets.size(), 0);
  for (size_t t = 0; t < targets.size(); ++t) {
    if (inv[t].ok) {
      g.displacement.values[t] = inv[t].z - targets[t];
    } else {
      failed[t] = 1;  // leave zero displacement; the flag excludes the node
    }
  }

  WirtingerDerivatives d = wirtinger(g.displacement);
  for (cd& v : d.f_z.values) v += cd(1.0, 0.0);
  g.f_z = std::move(d.f_z);
  g.f_zbar = std::move(d.f_zbar);

  // difference stencils reach two cells at the window edge, so a failure
  // taints everything within that reach
  g.flags.assign(targets.size(), 0);
  g.flagged_count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      bool tainted = false;
      for (int di = -2; di <= 2 && !tainted; ++di) {
        for (int dj = -2; dj <= 2 && !tainted; ++dj) {
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
          if (failed[static_cast<size_t>(ii) * n + jj]) tainted = true;
        }
      }
      if (tainted) {
        g.flags[static_cast<size_t>(i) * n + j] = 1;
        ++g.flagged_count;
      }
    }
  }
  return g;
}

FarFieldProfile far_field_profile(const SampledMap& f, const std::vector<double>& radii,
                                  int samples_per_circle) {
  if (samples_per_circle < 8) throw std::invalid_argument("far field needs at least 8 samples");
  FarFieldProfile out;
  out.radii = radii;
  out.deviation.reserve(radii.size());
  for (double r : radii) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("far field radii must be positive and finite");
    }
    double acc = 0.0;
    for (int s = 0; s < samples_per_circle; ++s) {
      const double theta = 2.0 * M_PI * s / samples_per_circle;
      const cd z = std::polar(r, theta);
      acc += std::abs(f.eval(z) - z);
    }
    out.deviation.push_back(acc / samples_per_circle);
  }

  out.exponent = std::numeric_limits<double>::quiet_NaN();
  if (radii.size() >= 2) {
    bool usable = true;
    for (double d : out.deviation) usable = usable && d > 0.0;
    if (usable) {
      // least-squares slope of log(dev) against log(R)
      const size_t m = radii.size();
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      for (size_t t = 0; t < m; ++t) {
        const double x = std::log(radii[t]);
        const double y = std::log(out.deviation[t]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double denom = m * sxx - sx * sx;
      if (denom > 0.0) out.exponent = -(m * sxy - sx * sy) / denom;
    }
  }
  return out;
}

TruncationLadder run_ladder(const CoefficientField& coeff, const LadderOptions& opts) {
  if (opts.levels.empty()) throw std::invalid_argument("ladder needs at least one level");
  for (size_t t = 0; t < opts.levels.size(); ++t) {
    if (opts.levels[t] < 1) throw std::invalid_argument("ladder levels must be >= 1");
    if (t > 0 && opts.levels[t] <= opts.levels[t - 1]) {
      throw std::invalid_argument("ladder levels must be strictly increasing");
    }
  }
  if (!(opts.gap_radius > 0.0)) throw std::invalid_argument("gap radius must be positive");

  const GridSpec& spec = coeff.mu.spec;
  TransformPlan plan(spec);
  TruncationLadder ladder;
  ladder.levels.reserve(opts.levels.size());

  for (int n : opts.levels) {
    const TruncationLevel level = truncation_level(n);
    const CoefficientField cut = truncate(coeff, level);
    PrincipalSolution sol;
    try {
      sol = solve_principal(cut, plan, opts.solve);
    } catch (const solver_error& e) {
      throw solver_error(e.kind, n, e.iterations, e.residual, e.what());
    }
    sol.map.level = n;

    if (!ladder.levels.empty()) {
      const SampledMap& prev = ladder.levels.back().solution.map;
      double gap = 0.0;
      const int N = spec.resolution;
      for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
          const cd z = spec.node(i, j);
          if (std::abs(z) > opts.gap_radius) continue;
          gap = std::max(gap,
                         std::abs(sol.map.displacement.at(i, j) - prev.displacement.at(i, j)));
        }
      }
      ladder.gaps.push_back(gap);
    }
    ladder.levels.push_back(LadderLevel{n, level.bound, std::move(sol)});
  }
  return ladder;
}

}  // namespace beltrami
