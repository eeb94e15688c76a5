#include <doctest.h>

#include <cmath>

#include "sindex/hermite.hpp"

using namespace sindex;

TEST_CASE("Hermite polynomial pinned values") {
  CHECK(hermite_unnormalized(0, 1.7) == 1.0);
  CHECK(hermite_unnormalized(1, 1.7) == 1.7);
  CHECK(hermite_unnormalized(3, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(hermite_normalized(2, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(hermite_normalized(4, 0.0) ==
        doctest::Approx(3.0 / std::sqrt(24.0)).epsilon(1e-14));
}

TEST_CASE("Three-term recurrence holds at high degree") {
  const double z = 0.87;
  for (int k = 2; k <= 40; ++k) {
    const double lhs = hermite_unnormalized(k, z);
    const double rhs = z * hermite_unnormalized(k - 1, z) -
                       (k - 1) * hermite_unnormalized(k - 2, z);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("h_k orthonormal under the Gauss-Hermite rule") {
  const QuadratureRule rule = gauss_hermite_rule(40);
  for (int j = 0; j <= 8; ++j)
    for (int k = 0; k <= 8; ++k) {
      const double ip = rule.integrate([&](double z) {
        return hermite_normalized(j, z) * hermite_normalized(k, z);
      });
      CHECK(ip == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("Gauss-Hermite nodes and weights, n = 2 and 3") {
  const QuadratureRule r2 = gauss_hermite_rule(2);
  REQUIRE(r2.nodes.size() == 2);
  CHECK(r2.nodes[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(r2.nodes[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r2.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r2.weights[1] == doctest::Approx(0.5).epsilon(1e-14));

  const QuadratureRule r3 = gauss_hermite_rule(3);
  REQUIRE(r3.nodes.size() == 3);
  const double s3 = std::sqrt(3.0);
  CHECK(r3.nodes[0] == doctest::Approx(-s3).epsilon(1e-14));
  CHECK(r3.nodes[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r3.nodes[2] == doctest::Approx(s3).epsilon(1e-14));
  CHECK(r3.weights[0] == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(r3.weights[1] == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(r3.weights[2] == doctest::Approx(1.0 / 6).epsilon(1e-14));
}

TEST_CASE("Gauss-Hermite rule integrates moments exactly") {
  const QuadratureRule rule = gauss_hermite_rule(12);
  // E[z^{2m}] = (2m-1)!! up to degree 2n-1 = 23.
  double dfact = 1.0;
  for (int m = 1; m <= 11; ++m) {
    dfact *= 2 * m - 1;
    const int p = 2 * m;
    CHECK(rule.integrate([&](double z) { return std::pow(z, p); }) ==
          doctest::Approx(dfact).epsilon(1e-12));
  }
}

TEST_CASE("chi2_poly pinned value and orthogonality") {
  // p_1^{(d)}(r) = r - d at k=1; with d=3: p_1(15+3)=15 means r=18... pin
  // the direct small case instead: p_2^{(3)}(0) = 3 * 5 = 15.
  CHECK(chi2_poly(2, 3, 0.0) == doctest::Approx(15.0).epsilon(1e-14));
  CHECK(chi2_poly(1, 3, 5.0) == doctest::Approx(2.0).epsilon(1e-14));
  // Orthogonality under chi^2(d) by exact moments: E[R^m] = prod (d + 2i)
  // over i < m, so the polynomial inner products are finite sums.
  for (int d : {1, 3, 10}) {
    auto coeffs = [&](int k) {
      std::vector<double> c(static_cast<size_t>(k) + 1);
      double binom = 1.0;
      for (int j = 0; j <= k; ++j) {
        double prod = 1.0;
        for (int i = j; i < k; ++i) prod *= d + 2.0 * i;
        c[static_cast<size_t>(j)] = (((k - j) % 2) ? -1.0 : 1.0) * binom * prod;
        binom = binom * (k - j) / (j + 1.0);
      }
      return c;
    };
    auto moment = [&](int m) {
      double p = 1.0;
      for (int i = 0; i < m; ++i) p *= d + 2.0 * i;
      return p;
    };
    for (int j = 0; j <= 4; ++j)
      for (int k = j + 1; k <= 4; ++k) {
        const std::vector<double> cj = coeffs(j), ck = coeffs(k);
        double ip = 0.0, nj = 0.0;
        for (size_t a = 0; a < cj.size(); ++a)
          for (size_t b = 0; b < ck.size(); ++b)
            ip += cj[a] * ck[b] * moment(static_cast<int>(a + b));
        for (size_t a = 0; a < cj.size(); ++a)
          for (size_t b = 0; b < cj.size(); ++b)
            nj += cj[a] * cj[b] * moment(static_cast<int>(a + b));
        CHECK(std::abs(ip) / std::max(1.0, nj) < 1e-9);
      }
  }
}

TEST_CASE("sym_poly_Q and vandermonde weights at He_3 roots") {
  CHECK(sym_poly_Q({1.0, 2.0, 3.0}) == doctest::Approx(12.0).epsilon(1e-14));
  // Q vanishes on symmetric pairs: the degenerate configuration that the
  // forge jitter must avoid.
  CHECK(sym_poly_Q({-1.0, 1.0}) == doctest::Approx(0.0).scale(1.0));

  // He_3 roots {-sqrt3, 0, sqrt3} reproduce the GH weights (1/6, 2/3, 1/6).
  PointConfig cfg({-std::sqrt(3.0), 0.0, std::sqrt(3.0)});
  const std::vector<double> v = vandermonde_weights(cfg);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(v[2] == doctest::Approx(1.0 / 6).epsilon(1e-12));
}
