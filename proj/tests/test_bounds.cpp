#include <doctest.h>

#include <cmath>

#include "sindex/bounds.hpp"

using namespace sindex;

TEST_CASE("sphere moments: pinned values and asymptotics") {
  CHECK(sphere_moment(1, 10) == 0.0);
  CHECK(sphere_moment(3, 10) == 0.0);
  // p = 2: E[(w.w')^2] = 1/d exactly.
  CHECK(sphere_moment(2, 7) == doctest::Approx(1.0 / 7).epsilon(1e-12));
  // p = 4: 3 / (d (d+2)).
  CHECK(sphere_moment(4, 9) == doctest::Approx(3.0 / (9.0 * 11.0)).epsilon(1e-12));
  // Large d: d^{p/2} E[(w.w')^p] -> (p-1)!!.
  CHECK(std::pow(1e8, 3) * sphere_moment(6, 1e8) == doctest::Approx(15.0).epsilon(1e-5));
}

TEST_CASE("exact low-degree norm: invariants") {
  BoundsQuery q;
  q.kstar = 4;
  q.lambda = 0.48;
  q.d = 1000;
  q.D = 16;
  q.n = 1e5;
  const double base = ld_norm_exact(q);
  CHECK(base >= 1.0);
  // Monotone in n.
  BoundsQuery q2 = q;
  q2.n = 2e5;
  CHECK(ld_norm_exact(q2) > base);
  // Zero signal collapses to 1.
  BoundsQuery q0 = q;
  q0.lambda = 0.0;
  CHECK(ld_norm_exact(q0) == doctest::Approx(1.0).epsilon(1e-14));
  // Guard rails.
  BoundsQuery qd = q;
  qd.D = 500;
  CHECK_THROWS(ld_norm_exact(qd));
}

TEST_CASE("kstar = 2 asymptotic norm matches the closed form") {
  // sum_j (2j-1)!! x^j / j! = (1 - 2x)^{-1/2} for x < 1/2.
  BoundsQuery q;
  q.kstar = 2;
  q.lambda = 0.4;
  q.delta = 1.5;
  q.D = 180;
  const double x = q.lambda * q.lambda * q.delta;
  REQUIRE(x < 0.5);
  CHECK(ld_norm_asymptotic(q) ==
        doctest::Approx(1.0 / std::sqrt(1.0 - 2.0 * x)).epsilon(1e-10));
}

TEST_CASE("exact norm approaches the asymptotic norm at large d") {
  BoundsQuery q;
  q.kstar = 4;
  q.lambda = 0.4795;
  q.D = 20;
  q.d = 1e6;
  for (double delta : {0.25, 0.5, 1.0}) {
    q.delta = delta;
    q.n = delta * q.d * q.d;
    const double ex = ld_norm_exact(q);
    const double as = ld_norm_asymptotic(q);
    CHECK(std::abs(ex - as) / as < 0.02);
  }
}

TEST_CASE("SQ bound scales as stated") {
  BoundsQuery q;
  q.kstar = 4;
  q.lambda = 0.5;
  q.d = 100;
  q.r = 1.0;
  CHECK(sq_bound(q) == doctest::Approx(4.0 * 1e4).epsilon(1e-12));
  q.r = 2.0;  // more queries allowed, weaker per-sample requirement
  CHECK(sq_bound(q) == doctest::Approx(4.0 * 1e4 / 16.0).epsilon(1e-12));
}

TEST_CASE("BBP predictions: identities and degeneracy") {
  const BbpPrediction p = bbp_predictions(0.0228, 0.00226, 4, 64.0, 32768.0);
  CHECK(p.edge == doctest::Approx(2.0 * p.R).epsilon(1e-14));
  CHECK(p.outlier == doctest::Approx(0.0228 + p.R * p.R / 0.0228).epsilon(1e-12));
  CHECK(p.overlap == doctest::Approx(1.0 - (p.R / 0.0228) * (p.R / 0.0228)).epsilon(1e-10));
  // delta_star = Ey2 / (beta^2 k (k-1)!!) with k (k-1)!! = 12.
  CHECK(p.delta_star ==
        doctest::Approx(0.00226 / (0.0228 * 0.0228 * 12.0)).epsilon(1e-12));
  CHECK_FALSE(p.degenerate);
  CHECK(bbp_predictions(0.0, 0.00226, 4, 64.0, 32768.0).degenerate);
  CHECK_THROWS(bbp_predictions(0.1, 1.0, 3, 64.0, 1000.0));
}
