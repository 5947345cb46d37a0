#include <doctest.h>

#include <cmath>

#include "beltrami/oracle.hpp"
#include "testutil.hpp"

using namespace beltrami;
using testutil::rel_err;

TEST_SUITE("oracle") {

TEST_CASE("parameters") {
  const auto p = oracle::example_params(1.0, 3.0);
  CHECK(p.rho == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p.tau == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(oracle::example_params(1.0, 0.9), std::invalid_argument);   // k <= 1/alpha
  CHECK_THROWS_AS(oracle::example_params(1.0, 2.0), std::invalid_argument);   // rho = 1
  CHECK_THROWS_AS(oracle::example_params(0.5, 3.0), std::invalid_argument);   // rho = 1.5
  CHECK_THROWS_AS(oracle::example_params(2.5, 3.0), std::invalid_argument);   // alpha out of range
  CHECK(oracle::truncation_trivial(0.5, 3.0));
  CHECK(oracle::truncation_trivial(1.0, 2.0));
  CHECK_FALSE(oracle::truncation_trivial(1.0, 2.1));
}

TEST_CASE("coefficient hand values") {
  CHECK(std::abs(oracle::mu(cd(0.75, 0), 1.0) - cd(0.5, 0)) < 1e-14);
  // on the imaginary axis e^{2 i theta} = -1
  CHECK(std::abs(oracle::mu(cd(0, 0.75), 1.0) - cd(-0.5, 0)) < 1e-14);
  CHECK(oracle::mu(cd(0.4, 0), 1.0) == cd(0, 0));
  CHECK(oracle::mu(cd(1.1, 0), 1.0) == cd(0, 0));
  CHECK(oracle::mu(cd(-2.0, 1.0), 1.0) == cd(0, 0));
}

TEST_CASE("limit map hand values") {
  CHECK(std::abs(oracle::limit_map(cd(0.9, 0), 1.0) - cd(0.8, 0)) < 1e-14);
  CHECK(oracle::limit_map(cd(0.3, 0.2), 1.0) == cd(0, 0));
  CHECK(oracle::limit_map(cd(1.5, -0.5), 1.0) == cd(1.5, -0.5));
  // alpha = 0.5: r -> (2r-1)^2
  CHECK(std::abs(oracle::limit_map(cd(0, 0.9), 0.5) - cd(0, 0.64)) < 1e-14);
}

TEST_CASE("truncated map and inverse hand values") {
  const auto p = oracle::example_params(1.0, 3.0);
  CHECK(std::abs(oracle::truncated_map(cd(0.9, 0), p) - cd(0.8, 0)) < 1e-14);
  CHECK(std::abs(oracle::truncated_map(cd(0.5, 0), p) - cd(1.0 / 3.0, 0)) < 1e-14);
  CHECK(std::abs(oracle::truncated_map(cd(2.0, 0.5), p) - cd(2.0, 0.5)) < 1e-15);
  CHECK(std::abs(oracle::inverse_map(cd(0.8, 0), p) - cd(0.9, 0)) < 1e-14);
  CHECK(std::abs(oracle::inverse_map(cd(0.3, 0), p) - cd(0.45, 0)) < 1e-14);
}

TEST_CASE("branch continuity across the joining circles") {
  const auto p = oracle::example_params(1.0, 3.0);
  for (double r : {p.rho, 1.0}) {
    for (double theta : {0.1, 1.7, 3.0}) {
      const cd just_in = std::polar(r - 1e-11, theta);
      const cd just_out = std::polar(r + 1e-11, theta);
      CHECK(std::abs(oracle::truncated_map(just_in, p) - oracle::truncated_map(just_out, p)) <
            1e-9);
    }
  }
  for (double s : {p.tau, 1.0}) {
    for (double theta : {0.4, 2.2}) {
      const cd in = std::polar(s - 1e-11, theta);
      const cd out = std::polar(s + 1e-11, theta);
      CHECK(std::abs(oracle::inverse_map(in, p) - oracle::inverse_map(out, p)) < 1e-9);
    }
  }
}

TEST_CASE("round trip over random points") {
  const auto p = oracle::example_params(1.0, 3.0);
  auto gen = testutil::rng(42);
  for (int t = 0; t < 10000; ++t) {
    const cd z = testutil::random_point(gen, 2.0);
    const cd back = oracle::inverse_map(oracle::truncated_map(z, p), p);
    CHECK(std::abs(back - z) <= 1e-12 * std::max(1.0, std::abs(z)));
  }
  const auto p2 = oracle::example_params(1.5, 4.0);
  for (int t = 0; t < 2000; ++t) {
    const cd z = testutil::random_point(gen, 1.5);
    const cd back = oracle::inverse_map(oracle::truncated_map(z, p2), p2);
    CHECK(std::abs(back - z) <= 1e-11 * std::max(1.0, std::abs(z)));
  }
}

TEST_CASE("radial profile is monotone: the truncated map is a homeomorphism") {
  const auto p = oracle::example_params(1.0, 5.0);
  double prev = -1.0;
  for (int t = 0; t <= 1000; ++t) {
    const double r = 1.5 * t / 1000.0;
    const double image = std::abs(oracle::truncated_map(cd(r, 0), p));
    if (t > 0) CHECK(image > prev);
    prev = image;
  }
}

TEST_CASE("dilatations") {
  const auto p = oracle::example_params(1.0, 3.0);
  CHECK(oracle::truncated_dilatation(std::polar(p.rho, 0.3), p) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(oracle::truncated_dilatation(cd(0.5, 0), p) == doctest::Approx(1.0));
  CHECK(oracle::truncated_dilatation(cd(1.2, 0), p) == doctest::Approx(1.0));
  CHECK(oracle::inverse_dilatation(cd(0.8, 0), p) == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(oracle::inverse_dilatation(cd(0.3, 0), p) == doctest::Approx(1.0));

  // K of the truncated map agrees with K of the full map on the kept annulus
  for (double r : {0.76, 0.85, 0.99}) {
    CHECK(oracle::truncated_dilatation(cd(r, 0), p) ==
          doctest::Approx(oracle::max_dilatation(cd(r, 0), 1.0)).epsilon(1e-13));
  }

  // inverse dilatation at y equals forward dilatation at the preimage
  for (double s : {0.55, 0.7, 0.9}) {
    const cd y(s, 0);
    const cd z = oracle::inverse_map(y, p);
    CHECK(rel_err(oracle::inverse_dilatation(y, p), oracle::truncated_dilatation(z, p)) < 1e-12);
  }

  // majorant dominates for every k
  for (double k : {3.0, 5.0, 9.0, 17.0}) {
    const auto pk = oracle::example_params(1.0, k);
    for (double s = 0.05; s < 1.0; s += 0.02) {
      CHECK(oracle::inverse_dilatation(cd(0, s), pk) <= oracle::majorant(cd(0, s), 1.0) + 1e-12);
    }
  }
}

TEST_CASE("majorant values") {
  CHECK(oracle::majorant(cd(0.5, 0), 1.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(oracle::majorant(cd(1.3, 0), 1.0) == doctest::Approx(1.0));
  CHECK(std::isinf(oracle::majorant(cd(0, 0), 1.0)));
}

TEST_CASE("mu recovered from polar finite differences") {
  SUBCASE("identity gives zero") {
    const auto m = oracle::mu_from_polar([](cd z) { return z; }, cd(0.6, 0.3));
    CHECK_FALSE(m.degenerate);
    CHECK(std::abs(m.value) < 1e-9);
  }
  SUBCASE("limit map reproduces the coefficient formula") {
    for (double alpha : {0.8, 1.0, 1.3}) {
      for (cd z : {cd(0.75, 0), cd(0.3, 0.62), cd(-0.55, 0.48)}) {
        if (std::abs(z) <= 0.5 || std::abs(z) >= 1.0) continue;
        const auto m =
            oracle::mu_from_polar([&](cd w) { return oracle::limit_map(w, alpha); }, z);
        CHECK_FALSE(m.degenerate);
        CHECK(std::abs(m.value - oracle::mu(z, alpha)) < 1e-7);
      }
    }
  }
  SUBCASE("truncated map has zero coefficient below the truncation circle") {
    const auto p = oracle::example_params(1.0, 3.0);
    const auto m =
        oracle::mu_from_polar([&](cd w) { return oracle::truncated_map(w, p); }, cd(0.4, 0.2));
    CHECK_FALSE(m.degenerate);
    CHECK(std::abs(m.value) < 1e-9);
  }
  SUBCASE("sense-reversing map is flagged") {
    const auto m = oracle::mu_from_polar([](cd z) { return std::conj(z); }, cd(0.5, 0.1));
    CHECK(m.degenerate);
  }
  SUBCASE("origin rejected") {
    CHECK_THROWS_AS(oracle::mu_from_polar([](cd z) { return z; }, cd(0, 0)),
                    std::invalid_argument);
  }
}

TEST_CASE("truncated maps converge to the limit map as k grows") {
  auto limit_ext = [](cd z) { return oracle::limit_map(z, 1.0); };
  auto gen = testutil::rng(3);
  double prev_gap = 1e9;
  for (double k : {3.0, 5.0, 9.0, 17.0, 33.0}) {
    const auto p = oracle::example_params(1.0, k);
    double gap = 0.0;
    auto g2 = gen;  // same points for every k
    for (int t = 0; t < 4000; ++t) {
      const cd z = testutil::random_point(g2, 1.5);
      gap = std::max(gap, std::abs(oracle::truncated_map(z, p) - limit_ext(z)));
    }
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

}  // TEST_SUITE
