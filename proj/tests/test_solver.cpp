#include <doctest.h>

#include <cmath>

#include "beltrami/coefficients.hpp"
#include "beltrami/errors.hpp"
#include "beltrami/oracle.hpp"
#include "beltrami/solver.hpp"
#include "testutil.hpp"

using namespace beltrami;

namespace {

CoefficientField radial_example_coefficient(const GridSpec& spec, double alpha) {
  auto mu = sample([&](cd z) { return oracle::mu(z, alpha); }, spec, Meaning::coefficient);
  auto nu = make_field(spec, Meaning::coefficient);
  return make_coefficient(std::move(mu), std::move(nu));
}

CoefficientField constant_disk_coefficient(const GridSpec& spec, cd mu_val, cd nu_val,
                                           double radius) {
  auto on_disk = [&](cd v) {
    return [v, radius](cd z) { return std::abs(z) < radius ? v : cd(0, 0); };
  };
  return make_coefficient(sample(on_disk(mu_val), spec, Meaning::coefficient),
                          sample(on_disk(nu_val), spec, Meaning::coefficient));
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("zero coefficient solves to the identity") {
  const auto spec = make_grid(cd(0, 0), 1.5, 64);
  const auto coeff = make_coefficient(make_field(spec, Meaning::coefficient),
                                      make_field(spec, Meaning::coefficient));
  const auto sol = solve_principal(coeff);
  CHECK(sol.diagnostics.iterations <= 2);
  CHECK(sup_norm(sol.map.displacement) <= 1e-12);
  CHECK(std::abs(sol.map.deriv_z(cd(0.3, 0.4)) - cd(1, 0)) <= 1e-12);
  CHECK(std::abs(sol.map.deriv_zbar(cd(0.3, 0.4))) <= 1e-12);
  CHECK(sol.diagnostics.residual <= 1e-14);
}

TEST_CASE("radial example at level 3 matches the closed form") {
  const auto spec = make_grid(cd(0, 0), 1.5, 512);
  const auto p = oracle::example_params(1.0, 3.0);
  const auto cut = truncate(radial_example_coefficient(spec, 1.0), truncation_level(3));
  const auto sol = solve_principal(cut);

  CHECK(sol.diagnostics.contraction_bound > 0.45);
  CHECK(sol.diagnostics.contraction_bound <= 0.5);

  double sup_err = 0.0, sup_ref = 0.0;
  std::vector<double> errs;
  const int n = spec.resolution;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cd z = spec.node(i, j);
      const cd got = z + sol.map.displacement.at(i, j);
      const double e = std::abs(got - oracle::truncated_map(z, p));
      sup_err = std::max(sup_err, e);
      sup_ref = std::max(sup_ref, std::abs(oracle::truncated_map(z, p)));
      errs.push_back(e);
    }
  std::sort(errs.begin(), errs.end());
  CHECK(sup_err / sup_ref < 0.003);              // measured 0.0011 at this size
  CHECK(errs[errs.size() / 2] / sup_ref < 5e-4);  // measured 1.4e-5

  SUBCASE("iteration gaps contract at the coefficient bound") {
    const auto& g = sol.diagnostics.gaps;
    REQUIRE(g.size() >= 5);
    for (size_t t = 1; t + 1 < g.size(); ++t) {
      CHECK(g[t + 1] <= (sol.diagnostics.contraction_bound + 0.05) * g[t]);
    }
  }
  SUBCASE("residual meets the solver contract") {
    const double fz_norm = l2_norm(sol.map.f_z);
    CHECK(sol.diagnostics.residual <= 10.0 * 1e-10 * fz_norm);
    CHECK(sol.diagnostics.relative_residual <= 1e-9);
  }
  SUBCASE("solution is sense-preserving almost everywhere") {
    int good = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (std::abs(sol.map.f_z.at(i, j)) > std::abs(sol.map.f_zbar.at(i, j))) ++good;
      }
    CHECK(good >= static_cast<int>(0.999 * n * n));
  }
  SUBCASE("derivative fields match the map equation pointwise") {
    // f_zbar = mu f_z at a mid-annulus probe, since nu = 0
    const cd z(0.85, 0.0);
    const cd lhs = sol.map.deriv_zbar(z);
    const cd rhs = oracle::mu(z, 1.0) * sol.map.deriv_z(z);
    CHECK(std::abs(lhs - rhs) < 5e-3);
  }
}

TEST_CASE("solves are deterministic") {
  const auto spec = make_grid(cd(0, 0), 1.5, 128);
  const auto cut = truncate(radial_example_coefficient(spec, 1.0), truncation_level(3));
  const auto a = solve_principal(cut);
  const auto b = solve_principal(cut);
  REQUIRE(a.map.displacement.values.size() == b.map.displacement.values.size());
  for (size_t t = 0; t < a.map.displacement.values.size(); ++t) {
    CHECK(a.map.displacement.values[t] == b.map.displacement.values[t]);
  }
  CHECK(a.diagnostics.iterations == b.diagnostics.iterations);
  CHECK(a.diagnostics.residual == b.diagnostics.residual);
}

TEST_CASE("coefficient past the contraction threshold raises divergence") {
  const auto spec = make_grid(cd(0, 0), 1.5, 128);
  const auto coeff = constant_disk_coefficient(spec, cd(0.7, 0), cd(0.5, 0), 0.5);
  CHECK_THROWS_AS(solve_principal(coeff), solver_error);
  try {
    solve_principal(coeff);
  } catch (const solver_error& e) {
    CHECK(e.kind == solver_error::Kind::divergence);
    CHECK(e.iterations >= 3);
  }
}

TEST_CASE("iteration cap raises no_convergence") {
  const auto spec = make_grid(cd(0, 0), 1.5, 128);
  const auto cut = truncate(radial_example_coefficient(spec, 1.0), truncation_level(5));
  SolveOptions opts;
  opts.max_iter = 3;
  try {
    solve_principal(cut, opts);
    FAIL("expected solver_error");
  } catch (const solver_error& e) {
    CHECK(e.kind == solver_error::Kind::no_convergence);
    CHECK(e.iterations == 3);
  }
}

TEST_CASE("options are validated") {
  const auto spec = make_grid(cd(0, 0), 1.0, 16);
  const auto coeff = make_coefficient(make_field(spec, Meaning::coefficient),
                                      make_field(spec, Meaning::coefficient));
  SolveOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(solve_principal(coeff, bad), std::invalid_argument);
  bad.tol = 1e-10;
  bad.max_iter = 0;
  CHECK_THROWS_AS(solve_principal(coeff, bad), std::invalid_argument);
}

TEST_CASE("map inversion") {
  SUBCASE("identity inverts in one step") {
    const auto spec = make_grid(cd(0, 0), 1.0, 64);
    const auto f = SampledMap::from_function([](cd z) { return z; }, spec);
    const std::vector<cd> targets{cd(0.3, 0.2), cd(-0.5, 0.1), cd(0, 0)};
    const auto res = invert_map(f, targets);
    for (size_t t = 0; t < targets.size(); ++t) {
      CHECK(res[t].ok);
      CHECK(res[t].iterations <= 2);
      CHECK(std::abs(res[t].z - targets[t]) < 1e-10);
    }
  }
  SUBCASE("linear stretch inverts exactly") {
    const auto spec = make_grid(cd(0, 0), 1.0, 64);
    const auto f = SampledMap::from_function([](cd z) { return 2.0 * z + cd(0.1, 0); }, spec);
    const auto res = invert_map(f, {cd(0.5, 0.3)});
    REQUIRE(res.size() == 1);
    CHECK(res[0].ok);
    CHECK(std::abs(res[0].z - cd(0.2, 0.15)) < 1e-10);
  }
  SUBCASE("target outside the image is marked failed") {
    const auto spec = make_grid(cd(0, 0), 1.0, 64);
    const auto f = SampledMap::from_function([](cd z) { return z; }, spec);
    const auto res = invert_map(f, {cd(10.0, 10.0)});
    REQUIRE(res.size() == 1);
    CHECK_FALSE(res[0].ok);
  }
}

TEST_CASE("sampled inverse of the solved radial example") {
  const auto spec = make_grid(cd(0, 0), 1.5, 512);
  const auto p = oracle::example_params(1.0, 3.0);
  const auto cut = truncate(radial_example_coefficient(spec, 1.0), truncation_level(3));
  const auto sol = solve_principal(cut);

  const auto target = make_grid(cd(0, 0), 1.0, 256);
  const auto g = sample_inverse(sol.map, target);
  CHECK(g.flagged_count == 0);

  double sup_inner = 0.0, sup_rel_outer = 0.0;
  for (int i = 0; i < 256; ++i)
    for (int j = 0; j < 256; ++j) {
      const cd y = target.node(i, j);
      const double s = std::abs(y);
      const cd got = y + g.displacement.at(i, j);
      const cd ref = oracle::inverse_map(y, p);
      if (s <= 0.45) sup_inner = std::max(sup_inner, std::abs(got - ref));
      if (s >= 0.55 && s <= 0.9)
        sup_rel_outer = std::max(sup_rel_outer, std::abs(got - ref) / std::abs(ref));
    }
  CHECK(sup_inner < 1.5e-3);      // measured 8.0e-4
  CHECK(sup_rel_outer < 1e-3);    // measured 2.7e-4

  // derivative fields of the inverse: dilatation at y = 0.8 has closed form 9/4
  const cd y(0.8, 0.0);
  const cd gw = g.deriv_z(y), gwb = g.deriv_zbar(y);
  const double k =
      (std::norm(gw) - std::norm(gwb)) /
      ((std::abs(gw) - std::abs(gwb)) * (std::abs(gw) - std::abs(gwb)));
  CHECK(k == doctest::Approx(2.25).epsilon(0.005));
}

TEST_CASE("inverse sampling flags failures and their stencil reach") {
  // a window much larger than the image of the map forces failures at the rim
  const auto spec = make_grid(cd(0, 0), 1.0, 64);
  const auto f = SampledMap::from_function([](cd z) { return z; }, spec);
  const auto target = make_grid(cd(0, 0), 2.0, 64);
  const auto g = sample_inverse(f, target);
  CHECK(g.flagged_count > 0);
  // the center still inverts fine and is unflagged
  CHECK_FALSE(g.flagged(32, 32));
  CHECK(std::abs(g.displacement.at(32, 32)) < 1e-9);
  // a corner node targets |y| ~ 2.8, far outside the unit window: flagged
  CHECK(g.flagged(0, 0));
}

TEST_CASE("far field profile") {
  SUBCASE("synthetic 1/z tail has exponent one") {
    const auto spec = make_grid(cd(0, 0), 4.0, 512);
    const auto f = SampledMap::from_function([](cd z) { return z + 1.0 / z; }, spec);
    const auto prof = far_field_profile(f, {1.0, 2.0, 3.0});
    REQUIRE(prof.deviation.size() == 3);
    CHECK(prof.deviation[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(prof.deviation[1] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(prof.exponent == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("identity has no usable profile") {
    const auto spec = make_grid(cd(0, 0), 2.0, 64);
    const auto f = SampledMap::from_function([](cd z) { return z; }, spec);
    const auto prof = far_field_profile(f, {0.5, 1.0});
    CHECK(std::isnan(prof.exponent));
  }
  SUBCASE("validation") {
    const auto spec = make_grid(cd(0, 0), 2.0, 64);
    const auto f = SampledMap::from_function([](cd z) { return z; }, spec);
    CHECK_THROWS_AS(far_field_profile(f, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(far_field_profile(f, {1.0}, 4), std::invalid_argument);
  }
}

TEST_CASE("truncation ladder") {
  const auto spec = make_grid(cd(0, 0), 1.5, 256);
  const auto coeff = radial_example_coefficient(spec, 1.0);

  SUBCASE("gaps decrease and match the closed-form ladder") {
    LadderOptions opts;
    opts.levels = {2, 3, 5, 9, 17};
    const auto lad = run_ladder(coeff, opts);
    REQUIRE(lad.levels.size() == 5);
    REQUIRE(lad.gaps.size() == 4);

    // level 2 keeps nothing of this coefficient, so its map is the identity
    CHECK(sup_norm(lad.levels[0].solution.map.displacement) < 1e-12);
    CHECK(lad.levels[0].bound == doctest::Approx(1.0 / 3.0));
    CHECK(lad.levels[1].solution.map.level.value() == 3);

    const double expected[] = {0.25, 1.0 / 6.0, 0.1, 0.05555555555555555};
    for (int t = 0; t < 4; ++t) {
      CHECK(lad.gaps[t] == doctest::Approx(expected[t]).epsilon(0.03));
      if (t > 0) CHECK(lad.gaps[t] < lad.gaps[t - 1]);
    }
  }

  SUBCASE("repeated runs are bitwise identical") {
    LadderOptions opts;
    opts.levels = {3, 5};
    const auto a = run_ladder(coeff, opts);
    const auto b = run_ladder(coeff, opts);
    for (size_t t = 0; t < a.levels.size(); ++t) {
      const auto& da = a.levels[t].solution.map.displacement.values;
      const auto& db = b.levels[t].solution.map.displacement.values;
      REQUIRE(da.size() == db.size());
      bool same = true;
      for (size_t u = 0; u < da.size(); ++u) same = same && da[u] == db[u];
      CHECK(same);
    }
    CHECK(a.gaps == b.gaps);
  }

  SUBCASE("solver failures carry the level") {
    LadderOptions opts;
    opts.levels = {3, 5};
    opts.solve.max_iter = 3;
    try {
      run_ladder(coeff, opts);
      FAIL("expected solver_error");
    } catch (const solver_error& e) {
      CHECK(e.level == 3);
      CHECK(e.kind == solver_error::Kind::no_convergence);
    }
  }

  SUBCASE("validation") {
    LadderOptions opts;
    CHECK_THROWS_AS(run_ladder(coeff, opts), std::invalid_argument);  // empty
    opts.levels = {3, 3};
    CHECK_THROWS_AS(run_ladder(coeff, opts), std::invalid_argument);  // not increasing
    opts.levels = {0, 3};
    CHECK_THROWS_AS(run_ladder(coeff, opts), std::invalid_argument);  // below one
    opts.levels = {3};
    opts.gap_radius = 0.0;
    CHECK_THROWS_AS(run_ladder(coeff, opts), std::invalid_argument);
  }
}

TEST_CASE("from_function carries exact derivatives for affine maps") {
  const auto spec = make_grid(cd(0.2, -0.1), 1.0, 32);
  const cd a(1.3, 0.4), b(0.2, -0.6), c(0.05, 0.02);
  const auto f =
      SampledMap::from_function([&](cd z) { return a * z + b * std::conj(z) + c; }, spec);
  CHECK(std::abs(f.deriv_z(cd(0.5, 0.2)) - a) < 1e-11);
  CHECK(std::abs(f.deriv_zbar(cd(0.5, 0.2)) - b) < 1e-11);
  CHECK(std::abs(f.eval(cd(0.5, 0.2)) - (a * cd(0.5, 0.2) + b * cd(0.5, -0.2) + c)) < 1e-12);
  CHECK(f.flagged_count == 0);
}

}  // TEST_SUITE
