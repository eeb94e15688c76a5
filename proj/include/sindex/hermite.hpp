// Scalar Hermite kernel: probabilists' Hermite polynomials in both
// normalizations, chi^2-orthogonal polynomials, Gauss-Hermite rules and
// the symmetric-function machinery (Q, Vandermonde weights) used by the
// link forge.
#ifndef SINDEX_HERMITE_HPP
#define SINDEX_HERMITE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sindex {

inline constexpr int kMaxHermiteDegree = 64;

/// Unnormalized probabilists' Hermite polynomial He_k(z),
/// He_{k+1}(z) = z He_k(z) - k He_{k-1}(z).
inline double hermite_unnormalized(int k, double z) {
  if (k < 0) throw std::invalid_argument("hermite: negative degree");
  if (k > kMaxHermiteDegree) throw std::invalid_argument("hermite: degree cap exceeded");
  double hm = 1.0;          // He_0
  if (k == 0) return hm;
  double h = z;             // He_1
  for (int j = 1; j < k; ++j) {
    const double hn = z * h - static_cast<double>(j) * hm;
    hm = h;
    h = hn;
  }
  return h;
}

inline double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

/// Normalized Hermite polynomial h_k = He_k / sqrt(k!), orthonormal in
/// L^2(gamma).
inline double hermite_normalized(int k, double z) {
  return hermite_unnormalized(k, z) / std::sqrt(factorial(k));
}

enum class HermiteKind { kUnnormalized, kNormalized };

inline double eval_hermite(HermiteKind kind, int k, double z) {
  return kind == HermiteKind::kUnnormalized ? hermite_unnormalized(k, z)
                                            : hermite_normalized(k, z);
}

/// Monic orthogonal polynomial p_k^{(d)} for chi^2(d) variables,
/// p_k^{(d)}(r) = sum_j C(k,j) r^j (-1)^{k-j} prod_{i=j}^{k-1}(d+2i).
inline double chi2_poly(int k, int d, double r) {
  if (k < 0) throw std::invalid_argument("chi2_poly: negative degree");
  if (d < 1) throw std::invalid_argument("chi2_poly: dimension must be positive");
  // Coefficients via the downward product recurrence; evaluated by Horner
  // in r after assembling c_j = C(k,j) (-1)^{k-j} prod_{i=j}^{k-1}(d+2i).
  std::vector<double> coef(static_cast<size_t>(k) + 1);
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    double prod = 1.0;
    for (int i = j; i < k; ++i) prod *= d + 2.0 * i;
    coef[static_cast<size_t>(j)] = (((k - j) % 2) ? -1.0 : 1.0) * binom * prod;
    binom = binom * (k - j) / (j + 1.0);
  }
  double acc = 0.0;
  for (int j = k; j >= 0; --j) acc = acc * r + coef[static_cast<size_t>(j)];
  return acc;
}

struct QuadratureRule {
  std::vector<double> nodes;    // roots of He_n, increasing
  std::vector<double> weights;  // Christoffel numbers, sum to 1

  /// Integrate f against the standard Gaussian measure.
  template <typename F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

/// Gauss-Hermite rule for the standard Gaussian weight: nodes are the
/// roots of He_n (symmetric Jacobi matrix eigenvalues plus one Newton
/// polish), weights w_i = 1 / sum_{k<n} h_k(r_i)^2.
inline QuadratureRule gauss_hermite_rule(int n) {
  if (n < 1 || n > kMaxHermiteDegree)
    throw std::invalid_argument("gauss_hermite_rule: need 1 <= n <= 64");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    const double b = std::sqrt(static_cast<double>(i + 1));
    jacobi(i, i + 1) = b;
    jacobi(i + 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<size_t>(n));
  rule.weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double r = es.eigenvalues()(i);
    // One Newton step on He_n; He_n'(z) = n He_{n-1}(z).
    const double fp = n * hermite_unnormalized(n - 1, r);
    if (fp != 0.0) r -= hermite_unnormalized(n, r) / fp;
    const double residual = std::abs(hermite_unnormalized(n, r)) /
                            std::max(1.0, std::abs(n * hermite_unnormalized(n - 1, r)));
    if (!(residual < 1e-12))
      throw std::runtime_error("gauss_hermite_rule: root refinement did not converge");
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double hk = hermite_normalized(k, r);
      s += hk * hk;
    }
    rule.nodes[static_cast<size_t>(i)] = r;
    rule.weights[static_cast<size_t>(i)] = 1.0 / s;
  }
  return rule;
}

/// A configuration of pairwise-distinct real points.
struct PointConfig {
  std::vector<double> points;
  static constexpr double kMinGap = 1e-8;

  explicit PointConfig(std::vector<double> pts) : points(std::move(pts)) {
    for (size_t i = 0; i < points.size(); ++i)
      for (size_t j = i + 1; j < points.size(); ++j)
        if (std::abs(points[i] - points[j]) <= kMinGap)
          throw std::invalid_argument("PointConfig: coincident points");
  }
};

/// Q(u) = E_{z~gamma} prod_i (u_i + z) = sum_i (2i-1)!! e_{n-2i}(u).
inline double sym_poly_Q(const std::vector<double>& u) {
  const size_t n = u.size();
  // Elementary symmetric polynomials by the standard DP recurrence.
  std::vector<double> e(n + 1, 0.0);
  e[0] = 1.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t k = std::min(i + 1, n); k >= 1; --k) e[k] += u[i] * e[k - 1];
  double acc = 0.0;
  double dfact = 1.0;  // (2i-1)!!, starting at i=0
  for (size_t i = 0; 2 * i <= n; ++i) {
    if (i > 0) dfact *= 2.0 * i - 1.0;
    acc += dfact * e[n - 2 * i];
  }
  return acc;
}

inline double sym_poly_Q(const PointConfig& u) { return sym_poly_Q(u.points); }

/// v(u)_i = Q(u with u_i removed) / prod_{j != i} (u_j - u_i).
inline std::vector<double> vandermonde_weights(const PointConfig& cfg) {
  const std::vector<double>& u = cfg.points;
  const size_t n = u.size();
  std::vector<double> v(n);
  std::vector<double> rest;
  rest.reserve(n - 1);
  for (size_t i = 0; i < n; ++i) {
    rest.clear();
    double denom = 1.0;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      rest.push_back(u[j]);
      denom *= u[j] - u[i];
    }
    v[i] = sym_poly_Q(rest) / denom;
  }
  return v;
}

}  // namespace sindex

#endif  // SINDEX_HERMITE_HPP
