// Closed-form sample-complexity calculators: sphere moments, low-degree
// likelihood-ratio norms (exact and asymptotic), the SQ bound, and the BBP
// spectral predictions. Combinatorial factors are accumulated in log space.
#ifndef SINDEX_BOUNDS_HPP
#define SINDEX_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sindex {

struct BoundsQuery {
  double lambda = 0.0;   // lambda_{kstar}
  int kstar = 2;
  double d = 0.0;
  double n = 0.0;
  int D = 0;             // polynomial degree budget
  double r = 1.0;        // query exponent: q = d^r
  double delta = 0.0;    // n / d^{kstar/2}, used by the asymptotic norm
};

/// E[(w . w')^p] for independent uniform unit vectors in R^d:
/// 0 for odd p, (p-1)!! / prod_{i<p/2} (d+2i) for even p.
inline double sphere_moment(int p, double d) {
  if (p < 0 || d < 1) throw std::invalid_argument("sphere_moment: p >= 0, d >= 1");
  if (p % 2 == 1) return 0.0;
  // log[(p-1)!!] = lgamma(p+1) - (p/2) log 2 - lgamma(p/2+1)
  const double half = p / 2.0;
  double lg = std::lgamma(p + 1.0) - half * std::log(2.0) - std::lgamma(half + 1.0);
  // prod (d+2i) = 2^{p/2} Gamma(d/2 + p/2) / Gamma(d/2)
  lg -= half * std::log(2.0) + std::lgamma(d / 2.0 + half) - std::lgamma(d / 2.0);
  return std::exp(lg);
}

namespace bounds_detail {

/// log[(m-1)!!] for even m >= 0.
inline double log_double_factorial_even(int m) {
  const double half = m / 2.0;
  return std::lgamma(m + 1.0) - half * std::log(2.0) - std::lgamma(half + 1.0);
}

inline double log_sum(const std::vector<double>& logs) {
  const double mx = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double l : logs) s += std::exp(l - mx);
  return mx + std::log(s);
}

}  // namespace bounds_detail

/// Exact low-degree norm: sum_{j <= D/kstar, kstar*j even} C(n,j) lambda^{2j}
/// (kstar j - 1)!! / prod_{i < kstar j / 2} (d + 2i). Always >= 1 (j = 0).
inline double ld_norm_exact(const BoundsQuery& q) {
  if (q.D > 200) throw std::invalid_argument("ld_norm_exact: D <= 200");
  if (q.d < 1 || q.n < 0 || q.kstar < 1)
    throw std::invalid_argument("ld_norm_exact: bad query");
  std::vector<double> logs{0.0};  // j = 0
  if (q.lambda > 0) {
    for (int j = 1; j <= q.D / q.kstar && static_cast<double>(j) <= q.n; ++j) {
      const int m = q.kstar * j;
      if (m % 2 != 0) continue;
      const double half = m / 2.0;
      double lg = std::lgamma(q.n + 1.0) - std::lgamma(j + 1.0) -
                  std::lgamma(q.n - j + 1.0);
      lg += 2.0 * j * std::log(q.lambda);
      lg += bounds_detail::log_double_factorial_even(m);
      lg -= half * std::log(2.0) + std::lgamma(q.d / 2.0 + half) -
            std::lgamma(q.d / 2.0);
      logs.push_back(lg);
    }
  }
  const double v = std::exp(bounds_detail::log_sum(logs));
  if (!std::isfinite(v)) throw std::overflow_error("ld_norm_exact: overflow");
  return v;
}

/// Asymptotic norm: sum_{j <= D/kstar, kstar*j even} (kstar j - 1)!!
/// (lambda^2 delta)^j / j!. Valid in the regime D / lambda^2 << sqrt(d).
inline double ld_norm_asymptotic(const BoundsQuery& q) {
  if (q.kstar < 1 || q.delta < 0) throw std::invalid_argument("ld_norm_asymptotic: bad query");
  std::vector<double> logs{0.0};
  const double x = q.lambda * q.lambda * q.delta;
  if (x > 0) {
    for (int j = 1; j <= q.D / q.kstar; ++j) {
      const int m = q.kstar * j;
      if (m % 2 != 0) continue;
      logs.push_back(bounds_detail::log_double_factorial_even(m) +
                     j * std::log(x) - std::lgamma(j + 1.0));
    }
  }
  return std::exp(bounds_detail::log_sum(logs));
}

/// SQ lower bound n >= (c_k / lambda^2) (d / r^2)^{k/2} on the sample count
/// simulating q = d^r statistical queries.
inline double sq_bound(const BoundsQuery& q, double c_k = 1.0) {
  if (q.lambda <= 0 || q.r <= 0 || q.d < 1)
    throw std::invalid_argument("sq_bound: lambda, r > 0 and d >= 1");
  return c_k / (q.lambda * q.lambda) *
         std::pow(q.d / (q.r * q.r), q.kstar / 2.0);
}

struct BbpPrediction {
  double R = 0.0;
  double edge = 0.0;       // predicted bulk edge 2R
  double outlier = 0.0;    // beta + R^2/beta
  double overlap = 0.0;    // 1 - (R/beta)^2, clamped at 0
  double delta_star = 0.0; // Ey2 / (beta^2 k (k-1)!!)
  bool degenerate = false; // beta = 0: outlier/overlap undefined
};

/// Spiked-matrix predictions at sample size n: R^2 = Ey2 d^{k/2} / (n k (k-1)!!).
inline BbpPrediction bbp_predictions(double beta_k, double Ey2, int k, double d,
                                     double n) {
  if (k < 4 || k % 2 != 0)
    throw std::invalid_argument("bbp_predictions: k even, k >= 4");
  if (Ey2 < 0 || d < 1 || n <= 0) throw std::invalid_argument("bbp_predictions: bad inputs");
  double kfac = k;  // k (k-1)!!
  for (int i = k - 1; i >= 1; i -= 2) kfac *= i;
  BbpPrediction p;
  p.R = std::sqrt(Ey2 * std::pow(d, k / 2.0) / (n * kfac));
  p.edge = 2.0 * p.R;
  if (beta_k == 0.0) {
    p.degenerate = true;
  } else {
    p.outlier = std::abs(beta_k) + p.R * p.R / std::abs(beta_k);
    p.overlap = std::max(0.0, 1.0 - (p.R / beta_k) * (p.R / beta_k));
    p.delta_star = Ey2 / (beta_k * beta_k * kfac);
  }
  return p;
}

}  // namespace sindex

#endif  // SINDEX_BOUNDS_HPP
