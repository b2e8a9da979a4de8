// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nfsense/capacity.hpp"

using namespace nfsense;

namespace {

CapacityQuery reference_query(double r) {
  CapacityQuery q;
  q.r = r;
  q.delta_r = 0.1;
  q.beta = 50.0;
  q.cfg.lambda = 0.06;
  q.cfg.alpha = 4.0;
  q.cfg.eta = 1.0;
  q.cfg.b = 1.0;
  q.cfg.g_tilde = 1.0;
  q.K = 2;
  return q;
}

}  // namespace

TEST_CASE("radial series closed values and high-precision sums") {
  CHECK(radial_series(4, 4.0) == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(radial_series(3, 2.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  // mpmath, 40 digits.
  CHECK(radial_series(3, 4.0) == doctest::Approx(32.0 / 9.0).epsilon(1e-14));
  CHECK(radial_series(10, 4.0) == doctest::Approx(244.2).epsilon(1e-13));
  CHECK(radial_series(20, 4.0) == doctest::Approx(3644.2).epsilon(1e-13));
  CHECK_THROWS_AS(radial_series(2, 4.0), std::domain_error);
}

TEST_CASE("radial series is increasing in N and alpha") {
  for (int n = 3; n < 60; ++n) CHECK(radial_series(n + 1, 4.0) > radial_series(n, 4.0));
  for (double a = 2.0; a < 4.0; a += 0.25) CHECK(radial_series(12, a + 0.25) > radial_series(12, a));
}

TEST_CASE("published radial fit") {
  const FitParams p = FitParams::alpha4_k2();
  CHECK(std::abs(radial_fit(20, p) / radial_series(20, 4.0) - 1.0) < 0.05);
  for (int n = 12; n <= 60; ++n) CHECK(std::abs(radial_fit(n, p) / radial_series(n, 4.0) - 1.0) < 0.05);
  // At N = 3 the constant p3 dominates; only the order of magnitude holds.
  const double r3 = radial_fit(3, p) / radial_series(3, 4.0);
  CHECK(r3 > 1.0);
  CHECK(r3 < 100.0);
  FitParams flat = p;
  flat.p1 = 0.0;
  CHECK(radial_fit(7, flat) == 38.0);
  CHECK(radial_fit(45, flat) == 38.0);
}

TEST_CASE("mirror series") {
  CHECK(mirror_series(1, std::numbers::pi / 3.0, 4.0) == doctest::Approx(16.0).epsilon(1e-14));
  // mpmath, 40 digits.
  CHECK(mirror_series(2, std::numbers::pi / 6.0, 4.0) == doctest::Approx(238.8512516844081).epsilon(1e-13));
  CHECK(mirror_series(5, 0.2, 0.0) == 5.0);
  CHECK_THROWS_AS(mirror_series(2, std::numbers::pi / 4.0, 4.0), std::domain_error);
  CHECK_THROWS_AS(mirror_series(2, 0.0, 4.0), std::domain_error);
}

TEST_CASE("recomputed fits match the published alpha = 4 coefficients") {
  const FitParams r = fit_radial(4.0);
  CHECK(r.p1 == doctest::Approx(0.0230).epsilon(0.02));
  CHECK(r.p2 == doctest::Approx(3.99).epsilon(0.005));
  const FitParams m = fit_mirror(4.0, 2);
  CHECK(m.q1 == doctest::Approx(1.06).epsilon(0.01));
  CHECK(m.q2 == doctest::Approx(-4.0).epsilon(0.005));
  const FitParams pub = fit_params_for(4.0, 2);
  CHECK(pub.p1 == 0.0230);
  CHECK(pub.q3 == 6.57);
}

TEST_CASE("n_max at the reference setting") {
  const FitParams p = FitParams::alpha4_k2();
  CHECK(n_max(reference_query(3.1), p) == 51);
  CapacityQuery far = reference_query(3.1);
  far.delta_r = 1.0;  // G~ dr^-a = 1 < eta lambda^2 beta + b r^a beta
  CHECK(n_max(far, p) == 0);
  CHECK(n_max_exact(far) == 0);
}

TEST_CASE("n_max is non-increasing in beta and delta_r") {
  const FitParams p = FitParams::alpha4_k2();
  for (double r : {1.0, 2.0, 3.0}) {
    int prev = n_max(reference_query(r), p);
    for (double beta : {60.0, 80.0, 120.0, 200.0}) {
      CapacityQuery q = reference_query(r);
      q.beta = beta;
      const int cur = n_max(q, p);
      CHECK(cur <= prev);
      prev = cur;
    }
    prev = n_max(reference_query(r), p);
    for (double dr : {0.11, 0.13, 0.16, 0.2}) {
      CapacityQuery q = reference_query(r);
      q.delta_r = dr;
      const int cur = n_max(q, p);
      CHECK(cur <= prev);
      prev = cur;
    }
  }
}

TEST_CASE("fitted and exact n_max differ by at most one where N >= 8") {
  const FitParams p = FitParams::alpha4_k2();
  for (double r = 0.3; r <= 4.0; r += 0.01) {
    const CapacityQuery q = reference_query(r);
    const int exact = n_max_exact(q);
    if (exact >= 8) CHECK(std::abs(n_max(q, p) - exact) <= 1);
  }
}

TEST_CASE("delta_d_min is non-decreasing in beta and close to the bisection oracle") {
  const FitParams p = FitParams::alpha4_k2();
  for (double r : {0.5, 1.5, 2.5}) {
    double prev = delta_d_min(reference_query(r), p).meters;
    for (double beta : {55.0, 70.0, 100.0}) {
      CapacityQuery q = reference_query(r);
      q.beta = beta;
      const Spacing s = delta_d_min(q, p);
      CHECK(s.meters >= prev);
      prev = s.meters;
    }
  }
  for (double r = 0.35; r <= 3.7; r += 0.05) {
    const Spacing fit = delta_d_min(reference_query(r), p);
    const Spacing exact = delta_d_min_exact(reference_query(r));
    if (fit.feasible && exact.feasible) CHECK(std::abs(fit.meters / exact.meters - 1.0) < 0.10);
  }
}

TEST_CASE("capacity curve shape and output") {
  const FitParams p = FitParams::alpha4_k2();
  CHECK(capacity_curve(reference_query(1.0), p, 2.0, 1.0, 0.01).empty());
  CHECK_THROWS(capacity_curve(reference_query(1.0), p, 0.3, 1.0, 0.0));

  const auto rows = capacity_curve(reference_query(1.0), p, 0.3, 4.0, 0.01);
  REQUIRE(rows.size() >= 371);
  CHECK(std::is_sorted(rows.begin(), rows.end(), [](const CapacityRow& a, const CapacityRow& b) { return a.r < b.r; }));
  // Unimodal: non-decreasing up to the peak, non-increasing after it.
  const auto peak = std::max_element(rows.begin(), rows.end(),
                                     [](const CapacityRow& a, const CapacityRow& b) { return a.n_max_fit < b.n_max_fit; });
  CHECK(peak->n_max_fit == 51);
  for (auto it = rows.begin(); it + 1 <= peak; ++it) CHECK((it + 1)->n_max_fit >= it->n_max_fit);
  for (auto it = peak; it + 1 != rows.end(); ++it) CHECK((it + 1)->n_max_fit <= it->n_max_fit);

  std::ostringstream os;
  write_capacity_csv(os, rows);
  CHECK(os.str().rfind("r_m,n_max_fit,n_max_exact,dd_min_fit_m,dd_min_exact_m,feasible\n", 0) == 0);
  std::ostringstream again;
  write_capacity_csv(again, capacity_curve(reference_query(1.0), p, 0.3, 4.0, 0.01));
  CHECK(os.str() == again.str());
}
