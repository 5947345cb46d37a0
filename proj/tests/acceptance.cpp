// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Heavier solves are shared between criteria where the same map is
// examined from different angles.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "beltrami/analysis.hpp"
#include "beltrami/coefficients.hpp"
#include "beltrami/dilatation.hpp"
#include "beltrami/grid.hpp"
#include "beltrami/oracle.hpp"
#include "beltrami/solver.hpp"
#include "beltrami/transforms.hpp"
#include "testutil.hpp"

using namespace beltrami;

namespace {

constexpr double kPi = std::numbers::pi;

using Outcome = std::pair<bool, std::string>;

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

CoefficientField radial_coefficient(const GridSpec& spec, double alpha) {
  ComplexField mu =
      sample([alpha](cd z) { return oracle::mu(z, alpha); }, spec, Meaning::coefficient);
  ComplexField nu = make_field(spec, Meaning::coefficient);
  return make_coefficient(std::move(mu), std::move(nu));
}

double median_of(std::vector<double>& v) {
  auto mid = v.begin() + static_cast<long>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

struct ForwardError {
  double sup = 0.0;
  double median = 0.0;
};

ForwardError forward_error(const SampledMap& f, const oracle::ExampleParams& prm,
                           double radius) {
  std::vector<double> errs;
  const int n = f.spec.resolution;
  double sup = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cd z = f.spec.node(i, j);
      if (std::abs(z) > radius) continue;
      const double e = std::abs(z + f.displacement.at(i, j) - oracle::truncated_map(z, prm));
      sup = std::max(sup, e);
      errs.push_back(e);
    }
  }
  return {sup, median_of(errs)};
}

}  // namespace

int main() {
  int failures = 0;
  const auto run = [&failures](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
      std::tie(pass, detail) = fn();
    } catch (const std::exception& e) {
      pass = false;
      detail = std::string("exception: ") + e.what();
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s (%s; %.1f s)\n", pass ? "PASS" : "FAIL", id, name,
                detail.c_str(), dt);
    std::fflush(stdout);
    if (!pass) ++failures;
  };

  // shared heavyweight artifacts
  std::optional<PrincipalSolution> f3_fine;  // level 3 at 1024^2
  std::optional<TruncationLadder> ladder;    // levels 2..17 at 512^2

  run(1, "zero coefficient solves to the identity", []() -> Outcome {
    const auto spec = make_grid(cd(0, 0), 1.5, 256);
    const CoefficientField zero{make_field(spec, Meaning::coefficient),
                                make_field(spec, Meaning::coefficient), 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve_principal(zero);
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double sup = sup_norm(sol.map.displacement);
    return {sup <= 1e-10 && dt < 1.0, fmt("sup %.1e, solve %.2f s", sup, dt)};
  });

  run(2, "solved truncations match the radial family", [&]() -> Outcome {
    const auto spec = make_grid(cd(0, 0), 1.5, 1024);
    const auto coeff = radial_coefficient(spec, 1.0);
    TransformPlan plan(spec);
    bool pass = true;
    std::string detail;
    double sup3 = 0.0;
    for (int k : {3, 5}) {
      auto sol = solve_principal(truncate(coeff, truncation_level(k)), plan);
      const auto err = forward_error(sol.map, oracle::example_params(1.0, k), 1.2);
      pass = pass && err.sup <= 0.05 && err.median <= 0.01;
      detail += fmt("k=%d sup %.2e median %.2e; ", k, err.sup, err.median);
      if (k == 3) {
        sup3 = err.sup;
        sol.map.level = 3;
        f3_fine = std::move(sol);
      }
    }
    {
      const auto spec2 = make_grid(cd(0, 0), 1.5, 2048);
      const auto coeff2 = radial_coefficient(spec2, 1.0);
      TransformPlan plan2(spec2);
      const auto sol2 = solve_principal(truncate(coeff2, truncation_level(3)), plan2);
      const auto err2 = forward_error(sol2.map, oracle::example_params(1.0, 3), 1.2);
      pass = pass && err2.sup < sup3;
      detail += fmt("k=3 at 2048^2 sup %.2e", err2.sup);
    }
    return {pass, detail};
  });

  run(3, "numerical inversion matches the closed-form inverse", [&]() -> Outcome {
    if (!f3_fine) return {false, "prerequisite solve unavailable"};
    const auto prm = oracle::example_params(1.0, 3.0);
    auto gen = testutil::rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cd> inner, outer;
    while (inner.size() < 2000) {
      const cd y(u(gen) * 0.45, u(gen) * 0.45);
      if (std::abs(y) <= 0.45) inner.push_back(y);
    }
    while (outer.size() < 2000) {
      const cd y(u(gen) * 0.9, u(gen) * 0.9);
      const double r = std::abs(y);
      if (r >= 0.55 && r <= 0.9) outer.push_back(y);
    }
    auto band_err = [&](const std::vector<cd>& ys, bool relative) {
      const auto results = invert_map(f3_fine->map, ys);
      double worst = 0.0;
      for (size_t i = 0; i < ys.size(); ++i) {
        if (!results[i].ok) return std::numeric_limits<double>::infinity();
        const cd truth = oracle::inverse_map(ys[i], prm);
        double e = std::abs(results[i].z - truth);
        if (relative) e /= std::abs(truth);
        worst = std::max(worst, e);
      }
      return worst;
    };
    const double sup_inner = band_err(inner, false);
    const double rel_outer = band_err(outer, true);
    return {sup_inner <= 1e-3 && rel_outer <= 0.01,
            fmt("inner sup %.2e, outer rel %.2e", sup_inner, rel_outer)};
  });

  run(4, "difference-stencil dilatation of the inverse family", []() -> Outcome {
    const auto prm = oracle::example_params(1.0, 3.0);
    const auto ygrid = make_grid(cd(0, 0), 0.95, 1024);
    const auto g = SampledMap::from_function(
        [&](cd y) { return oracle::inverse_map(y, prm); }, ygrid);
    auto truth = [&](double r) {
      return r <= prm.tau ? 1.0 : (r + 1.0) / r;  // alpha = 1
    };
    double worst = 0.0;
    const int n = ygrid.resolution;
    const double guard = std::max(0.05, 3.0 * ygrid.spacing());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double r = std::abs(ygrid.node(i, j));
        if (r < 0.1 || r > 0.92 || std::abs(r - prm.tau) < guard) continue;
        const double got = dilatation_from_derivatives(g.f_z.at(i, j), g.f_zbar.at(i, j));
        worst = std::max(worst, std::abs(got - truth(r)) / truth(r));
      }
    }
    const cd probe(0.8, 0.0);
    const double k_probe =
        dilatation_from_derivatives(g.deriv_z(probe), g.deriv_zbar(probe));
    const bool pass = worst <= 0.05 && std::abs(k_probe - 2.25) <= 0.005 * 2.25;
    return {pass, fmt("rel sup %.2e, K(0.8) = %.4f", worst, k_probe)};
  });

  run(5, "substitution identity for the p-dilatation", [&]() -> Outcome {
    auto doubling_gap = [](int n) {
      const auto f = SampledMap::from_function([](cd z) { return 2.0 * z; },
                                               make_grid(cd(0, 0), 1.0, n));
      const auto g = SampledMap::from_function([](cd w) { return 0.5 * w; },
                                               make_grid(cd(0.05, -0.03), 1.9, n));
      return change_of_variables_check(f, g, Region{Region::Shape::disk, cd(0, 0), 0.8}, 2.0)
          .rel_gap;
    };
    const double gap256 = doubling_gap(256);
    const double gap512 = doubling_gap(512);
    bool pass = gap512 <= 1e-6 && gap512 < gap256;
    std::string detail = fmt("doubling map gap %.1e -> %.1e; ", gap256, gap512);

    if (!f3_fine) return {false, detail + "prerequisite solve unavailable"};
    const auto g3 = sample_inverse(f3_fine->map, make_grid(cd(0, 0), 1.2, 1024));
    for (double p : {2.0, 1.5}) {
      const auto rep = change_of_variables_check(
          f3_fine->map, g3, Region{Region::Shape::disk, cd(0, 0), 1.0}, p);
      pass = pass && rep.rel_gap <= 0.05;
      detail += fmt("family p=%.1f gap %.2e; ", p, rep.rel_gap);
    }
    f3_fine.reset();  // done with the fine solve
    return {pass, detail};
  });

  run(6, "integral transform oracles", []() -> Outcome {
    // norm preservation on spectrally concentrated data
    const auto spec = make_grid(cd(0, 0), 1.0, 256);
    const double sigma = 0.08, freq = 100.0;
    const auto h = sample(
        [&](cd z) {
          if (std::abs(z.real()) > 0.5 || std::abs(z.imag()) > 0.5) return cd(0, 0);
          return std::exp(cd(-std::norm(z) / (2 * sigma * sigma), 0)) *
                 std::exp(cd(0, freq * z.real()));
        },
        spec, Meaning::coefficient);
    TransformPlan plan(spec);
    const double iso_dev = std::abs(l2_norm(plan.beurling(h)) / l2_norm(h) - 1.0);

    // area transform of the unit disk against the closed form and a direct sum
    const auto dspec = make_grid(cd(0, 0), 1.5, 512);
    const auto ind = sample([](cd z) { return std::abs(z) < 1.0 ? cd(1, 0) : cd(0, 0); },
                            dspec, Meaning::coefficient);
    TransformPlan dplan(dspec);
    const auto c = dplan.cauchy(ind);
    auto closed = [](cd z) { return std::abs(z) < 1.0 ? std::conj(z) : 1.0 / z; };
    const int n = dspec.resolution;
    const double h2 = dspec.spacing() * dspec.spacing();
    // direct midpoint sum of the kernel; the probe's own cell, when excluded,
    // contributes exactly zero by symmetry, which is why the interior probes
    // below sit on grid nodes
    auto direct_sum = [&](cd z, int skip_i, int skip_j) {
      cd acc = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i == skip_i && j == skip_j) continue;
          if (ind.at(i, j) == cd(0, 0)) continue;
          acc += h2 / (kPi * (z - dspec.node(i, j)));
        }
      }
      return acc;
    };
    auto gen = testutil::rng(5);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_closed = 0.0, worst_direct = 0.0;
    auto record = [&](cd got, cd z, cd direct) {
      worst_closed = std::max(worst_closed, std::abs(got - closed(z)) / std::abs(closed(z)));
      worst_direct = std::max(worst_direct, std::abs(got - direct) / std::abs(direct));
    };
    for (int taken = 0; taken < 12;) {
      const int i = pick(gen), j = pick(gen);
      const cd z = dspec.node(i, j);
      if (std::abs(z) > 0.75) continue;
      record(c.at(i, j), z, direct_sum(z, i, j));
      ++taken;
    }
    for (int taken = 0; taken < 8;) {
      const cd z(u(gen) * 1.35, u(gen) * 1.35);
      if (std::abs(z) < 1.1 || std::abs(z) > 1.35) continue;
      record(c.interpolate(z), z, direct_sum(z, -1, -1));
      ++taken;
    }
    const bool pass = iso_dev <= 1e-10 && worst_closed <= 0.01 && worst_direct <= 0.01;
    return {pass, fmt("norm ratio dev %.1e, disk identity rel %.2e, direct sum rel %.2e",
                      iso_dev, worst_closed, worst_direct)};
  });

  run(7, "far field of a compact perturbation decays", []() -> Outcome {
    const auto spec = make_grid(cd(0, 0), 6.0, 512);
    auto gen = testutil::rng(2026);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto mu_fn = testutil::bump_field(0.5, cd(u(gen), u(gen)), cd(4.0 * u(gen), 4.0 * u(gen)));
    const auto nu_fn = testutil::bump_field(0.5, cd(u(gen), u(gen)), cd(4.0 * u(gen), 4.0 * u(gen)));
    auto mu = sample(mu_fn, spec, Meaning::coefficient);
    auto nu = sample(nu_fn, spec, Meaning::coefficient);
    double sup = 0.0;
    for (size_t t = 0; t < mu.values.size(); ++t) {
      sup = std::max(sup, std::abs(mu.values[t]) + std::abs(nu.values[t]));
    }
    for (size_t t = 0; t < mu.values.size(); ++t) {
      mu.values[t] *= 0.5 / sup;
      nu.values[t] *= 0.5 / sup;
    }
    const auto sol = solve_principal(make_coefficient(std::move(mu), std::move(nu)));
    const auto prof = far_field_profile(sol.map, {1.0, 2.0, 4.0});
    return {prof.exponent >= 0.9,
            fmt("exponent %.3f, deviations %.2e %.2e %.2e", prof.exponent, prof.deviation[0],
                prof.deviation[1], prof.deviation[2])};
  });

  run(8, "truncation ladder gaps shrink monotonically", [&]() -> Outcome {
    const auto spec = make_grid(cd(0, 0), 1.5, 512);
    const auto coeff = radial_coefficient(spec, 1.0);
    LadderOptions opts;
    opts.levels = {2, 3, 5, 9, 17};
    ladder = run_ladder(coeff, opts);
    bool decreasing = true;
    std::string detail = "gaps";
    for (size_t i = 0; i < ladder->gaps.size(); ++i) {
      if (i > 0 && ladder->gaps[i] >= ladder->gaps[i - 1]) decreasing = false;
      detail += fmt(" %.3f", ladder->gaps[i]);
    }
    return {decreasing && ladder->gaps.size() == 4, detail};
  });

  run(9, "discrete capacity of round annuli", []() -> Outcome {
    bool pass = true;
    std::string detail;
    for (double r2 : {2.0, std::exp(1.0)}) {
      const auto masks =
          annulus_condenser(make_grid(cd(0, 0), 1.25 * r2, 512), cd(0, 0), 1.0, r2);
      const double cap = discrete_capacity(masks);
      const double truth = 2.0 * kPi / std::log(r2);
      const double rel = std::abs(cap - truth) / truth;
      pass = pass && rel <= 0.05;
      detail += fmt("r2=%.3f rel %.2e; ", r2, rel);
    }
    return {pass, detail};
  });

  run(10, "modulus inequality for the inverse maps", [&]() -> Outcome {
    const auto id = SampledMap::from_function([](cd z) { return z; },
                                              make_grid(cd(0, 0), 2.2, 512));
    const Weight one = make_weight([](cd) { return 1.0; });
    const Annulus ring{cd(0, 0), 1.0, 2.0};
    const auto uni = inverse_poletsky_check(id, id, one, ring, EtaKind::uniform);
    const auto lg = inverse_poletsky_check(id, id, one, ring, EtaKind::log_ring);
    const double eq_gap = std::abs(lg.lhs - lg.rhs) / lg.rhs;
    bool pass = uni.holds && lg.holds && eq_gap <= 0.05;
    std::string detail = fmt("round ring log-equality gap %.2e; ", eq_gap);

    if (!ladder) return {false, detail + "prerequisite ladder unavailable"};
    const SampledMap& f3 = ladder->levels[1].solution.map;  // level 3 at 512^2
    const auto g3 = sample_inverse(f3, make_grid(cd(0, 0), 0.85, 512));
    const Weight q = make_weight([](cd y) { return oracle::majorant(y, 1.0); });
    for (auto [r1, r2] : {std::pair{0.1, 0.3}, {0.2, 0.5}, {0.35, 0.7}}) {
      for (EtaKind ek : {EtaKind::uniform, EtaKind::log_ring}) {
        const auto rep = inverse_poletsky_check(f3, g3, q, Annulus{cd(0, 0), r1, r2}, ek);
        pass = pass && rep.holds;
        if (ek == EtaKind::uniform) {
          detail += fmt("(%.2f,%.2f) lhs/rhs %.2f; ", r1, r2, rep.lhs / rep.rhs);
        }
      }
    }
    return {pass, detail};
  });

  run(11, "classifier separates bounded and unbounded weights", []() -> Outcome {
    const Region G{Region::Shape::disk, cd(0, 0), 1.0};
    const std::vector<cd> probes = {cd(0, 0), cd(0.25, -0.35)};
    const auto v1 = classify(make_weight([](cd) { return 1.0; }), G, probes);
    const Weight q = make_weight([](cd y) { return oracle::majorant(y, 1.0); });
    const auto v2 = classify(q, G, probes);
    const auto div = divergence_check(q, cd(0, 0), 0.5);
    const double truth = std::log(1.5);
    const double rel = std::abs(div.value - truth) / truth;
    const bool pass = v1.verdict == ClassificationVerdict::Kind::compact &&
                      v2.verdict == ClassificationVerdict::Kind::normal && !div.divergent &&
                      rel <= 0.01;
    return {pass, fmt("unit weight %s, radial weight %s, integral rel err %.1e",
                      verdict_name(v1.verdict), verdict_name(v2.verdict), rel)};
  });

  run(12, "uniform equicontinuity constant across the ladder", [&]() -> Outcome {
    if (!ladder) return {false, "prerequisite ladder unavailable"};
    const Region K{Region::Shape::disk, cd(0, 0), 0.6};
    const Region G{Region::Shape::disk, cd(0, 0), 1.0};
    std::vector<const SampledMap*> maps;
    for (const auto& lv : ladder->levels) maps.push_back(&lv.solution.map);
    const auto upto5 = equicontinuity_bound({maps[0], maps[1], maps[2]}, K, G);
    const auto upto17 = equicontinuity_bound(maps, K, G);
    ladder.reset();
    const double variation = std::abs(upto17.c_hat - upto5.c_hat) / upto5.c_hat;
    const bool pass =
        std::isfinite(upto17.c_hat) && upto17.c_hat > 0.0 && variation < 0.10;
    return {pass, fmt("C(k<=5) %.4f, C(k<=17) %.4f, variation %.1e", upto5.c_hat,
                      upto17.c_hat, variation)};
  });

  std::printf("%d of 12 criteria passed\n", 12 - failures);
  return failures;
}
