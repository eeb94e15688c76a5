// Hermite-tensor contractions in R^d: closed-form tensor power-iteration
// step, closed-form partial traces, a dense small-instance oracle, and a
// matrix-free Lanczos eigensolver for the implicit partial-trace matrix.
#ifndef SINDEX_TENSOR_HPP
#define SINDEX_TENSOR_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sindex/hermite.hpp"

namespace sindex {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// He_k(x)[v^{k-1}] = x He_{k-1}(x.v) - (k-1) v He_{k-2}(x.v).
/// Unnormalized scale; divide by sqrt(k!) for the h_k tensor.
inline Vector power_step_contract(const Vector& x, const Vector& v, int k) {
  if (k < 2) throw std::invalid_argument("power_step_contract: need k >= 2");
  if (std::abs(v.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("power_step_contract: v must be unit");
  const double s = x.dot(v);
  return x * hermite_unnormalized(k - 1, s) -
         v * ((k - 1) * hermite_unnormalized(k - 2, s));
}

/// Partial trace of the unnormalized Hermite tensor against copies of I.
/// Odd k = 2j+1: He_k(x)[I^j] = p_j^{(d+2)}(|x|^2) x.
/// Even k = 2j+2: He_k(x)[I^j] = a x x^T - b I with
///   a = p_j^{(d+4)}(|x|^2), b = p_j^{(d+2)}(|x|^2).
struct EvenTraceCoeffs {
  double a;
  double b;
};

inline Vector partial_trace_vector(const Vector& x, int k) {
  if (k < 1 || k % 2 == 0)
    throw std::invalid_argument("partial_trace_vector: odd k >= 1 required");
  const int j = (k - 1) / 2;
  const int d = static_cast<int>(x.size());
  return chi2_poly(j, d + 2, x.squaredNorm()) * x;
}

inline EvenTraceCoeffs partial_trace_coeffs(const Vector& x, int k) {
  if (k < 2 || k % 2 != 0)
    throw std::invalid_argument("partial_trace_coeffs: even k >= 2 required");
  const int j = (k - 2) / 2;
  const int d = static_cast<int>(x.size());
  const double r2 = x.squaredNorm();
  return {chi2_poly(j, d + 4, r2), chi2_poly(j, d + 2, r2)};
}

/// Dense symmetric Hermite tensor He_k(x), entries indexed by flat
/// row-major multi-index. Test oracle only; guarded at d^k <= 1e7.
class DenseHermiteTensor {
 public:
  DenseHermiteTensor(const Vector& x, int k) : d_(static_cast<int>(x.size())), k_(k) {
    double sz = 1.0;
    for (int i = 0; i < k; ++i) sz *= d_;
    if (sz > 1e7) throw std::invalid_argument("dense_hermite_tensor: size guard exceeded");
    size_t total = static_cast<size_t>(sz);
    data_.resize(total);
    std::vector<int> idx(static_cast<size_t>(k), 0);
    std::vector<int> mult(static_cast<size_t>(d_));
    for (size_t flat = 0; flat < total; ++flat) {
      std::fill(mult.begin(), mult.end(), 0);
      for (int a = 0; a < k; ++a) ++mult[static_cast<size_t>(idx[static_cast<size_t>(a)])];
      double val = 1.0;
      for (int c = 0; c < d_; ++c)
        if (mult[static_cast<size_t>(c)] > 0)
          val *= hermite_unnormalized(mult[static_cast<size_t>(c)], x(c));
      data_[flat] = val;
      for (int a = k - 1; a >= 0; --a) {
        if (++idx[static_cast<size_t>(a)] < d_) break;
        idx[static_cast<size_t>(a)] = 0;
      }
    }
  }

  int dim() const { return d_; }
  int order() const { return k_; }

  double at(const std::vector<int>& idx) const {
    size_t flat = 0;
    for (int a : idx) flat = flat * static_cast<size_t>(d_) + static_cast<size_t>(a);
    return data_[flat];
  }

  /// Contract the last (k-1) slots with v, returning a vector.
  Vector contract_vec(const Vector& v) const {
    Vector out = Vector::Zero(d_);
    size_t stride = data_.size() / static_cast<size_t>(d_);
    std::vector<int> idx(static_cast<size_t>(k_ - 1), 0);
    for (size_t rest = 0; rest < stride; ++rest) {
      double w = 1.0;
      size_t tmp = rest;
      for (int a = k_ - 2; a >= 0; --a) {
        idx[static_cast<size_t>(a)] = static_cast<int>(tmp % static_cast<size_t>(d_));
        tmp /= static_cast<size_t>(d_);
      }
      for (int a = 0; a < k_ - 1; ++a) w *= v(idx[static_cast<size_t>(a)]);
      for (int c = 0; c < d_; ++c)
        out(c) += w * data_[static_cast<size_t>(c) * stride + rest];
    }
    return out;
  }

  /// Contract all slots against j copies of the identity (k = 2j even,
  /// full trace to a scalar) via repeated pairwise traces.
  double full_trace() const {
    std::vector<double> cur = data_;
    int order = k_;
    while (order > 0) {
      size_t stride = 1;
      for (int a = 0; a < order - 2; ++a) stride *= static_cast<size_t>(d_);
      std::vector<double> next(stride, 0.0);
      for (size_t rest = 0; rest < stride; ++rest)
        for (int c = 0; c < d_; ++c)
          next[rest] += cur[(static_cast<size_t>(c) * static_cast<size_t>(d_) +
                             static_cast<size_t>(c)) * stride + rest];
      cur = std::move(next);
      order -= 2;
    }
    return cur[0];
  }

  /// Contract j copies of the identity on the trailing slots of an even
  /// tensor of order 2j+2, leaving a matrix.
  Matrix trace_to_matrix() const {
    std::vector<double> cur = data_;
    int order = k_;
    while (order > 2) {
      size_t stride = 1;
      for (int a = 0; a < order - 2; ++a) stride *= static_cast<size_t>(d_);
      std::vector<double> next(stride, 0.0);
      for (size_t rest = 0; rest < stride; ++rest)
        for (int c = 0; c < d_; ++c)
          next[rest] += cur[(static_cast<size_t>(c) * static_cast<size_t>(d_) +
                             static_cast<size_t>(c)) * stride + rest];
      cur = std::move(next);
      order -= 2;
    }
    Matrix m(d_, d_);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        m(i, j) = cur[static_cast<size_t>(i) * static_cast<size_t>(d_) +
                      static_cast<size_t>(j)];
    return m;
  }

 private:
  int d_;
  int k_;
  std::vector<double> data_;
};

/// Implicit representation of M_n = (1/n) sum_i y_i (a_i x_i x_i^T - b_i I)
/// without d x d storage. The 1/sqrt(k!) normalization of h_k is folded
/// into the stored labels at construction time by the caller.
class PartialTraceAccum {
 public:
  PartialTraceAccum(int d) : d_(d) {}

  /// Append one sample; a,b are the even partial-trace coefficients.
  void add(double y, double a, double b, const Vector& x) {
    if (x.size() != d_) throw std::invalid_argument("PartialTraceAccum: dim mismatch");
    ya_.push_back(y * a);
    yb_sum_ += y * b;
    xs_.conservativeResize(static_cast<Eigen::Index>(ya_.size()), d_);
    xs_.row(static_cast<Eigen::Index>(ya_.size()) - 1) = x.transpose();
  }

  /// Bulk construction from rows of X (preferred; no reallocation churn).
  static PartialTraceAccum from_rows(const Matrix& X, const Vector& y, int k) {
    const int d = static_cast<int>(X.cols());
    const int j = (k - 2) / 2;
    const double norm = std::sqrt(factorial(k));
    PartialTraceAccum acc(d);
    acc.xs_ = X;
    acc.ya_.resize(static_cast<size_t>(X.rows()));
    acc.yb_sum_ = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double r2 = X.row(i).squaredNorm();
      acc.ya_[static_cast<size_t>(i)] = y(i) * chi2_poly(j, d + 4, r2) / norm;
      acc.yb_sum_ += y(i) * chi2_poly(j, d + 2, r2) / norm;
    }
    return acc;
  }

  int dim() const { return d_; }
  Eigen::Index count() const { return xs_.rows(); }

  /// M v, cost O(n d).
  Vector matvec(const Vector& v) const {
    const double n = static_cast<double>(std::max<Eigen::Index>(1, count()));
    Vector s = xs_ * v;
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) *= ya_[static_cast<size_t>(i)];
    return (xs_.transpose() * s - yb_sum_ * v) / n;
  }

  /// Materialize the dense matrix (test oracle / small d only).
  Matrix densify() const {
    Matrix m = Matrix::Zero(d_, d_);
    for (Eigen::Index i = 0; i < count(); ++i)
      m += ya_[static_cast<size_t>(i)] * xs_.row(i).transpose() * xs_.row(i);
    m -= yb_sum_ * Matrix::Identity(d_, d_);
    return m / static_cast<double>(std::max<Eigen::Index>(1, count()));
  }

 private:
  int d_;
  Matrix xs_;               // n x d sample rows
  std::vector<double> ya_;  // y_i a_i / sqrt(k!)
  double yb_sum_ = 0.0;     // sum_i y_i b_i / sqrt(k!)
};

struct EigResult {
  Vector eigvec;
  double eigval = 0.0;
  double ritz_max = 0.0;     // largest Ritz value
  double ritz_min = 0.0;     // smallest Ritz value
  double bulk_edge = 0.0;    // largest |Ritz| once the top pair is removed
  bool converged = false;
  int iterations = 0;
};

/// Lanczos with full reorthogonalization on a symmetric operator given by
/// its matvec. Returns the eigenpair with the largest |eigenvalue|.
template <typename MatVec>
EigResult lanczos_top_abs(const MatVec& matvec, int d, int max_iters = 200,
                          double tol = 1e-10, uint64_t seed = 12345) {
  max_iters = std::min(max_iters, d);
  Matrix basis(d, max_iters);
  std::vector<double> alpha, beta;
  // Deterministic pseudo-random start vector.
  Vector v(d);
  {
    uint64_t s = seed;
    for (int i = 0; i < d; ++i) {
      s = s * 6364136223846793005ull + 1442695040888963407ull;
      v(i) = static_cast<double>(static_cast<int64_t>(s >> 11)) * 0x1.0p-52;
    }
  }
  v.normalize();
  EigResult res;
  Vector w;
  double prev_top = 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  int m = 0;
  for (; m < max_iters; ++m) {
    basis.col(m) = v;
    w = matvec(v);
    const double a = v.dot(w);
    alpha.push_back(a);
    w -= a * v;
    if (m > 0) w -= beta.back() * basis.col(m - 1);
    // Full reorthogonalization (small Krylov dimension).
    w -= basis.leftCols(m + 1) * (basis.leftCols(m + 1).transpose() * w);
    const double b = w.norm();
    // Check Ritz convergence every few steps.
    if ((m >= 2 && m % 4 == 0) || b < 1e-14 || m + 1 == max_iters) {
      Matrix t = Matrix::Zero(m + 1, m + 1);
      for (int i = 0; i <= m; ++i) t(i, i) = alpha[static_cast<size_t>(i)];
      for (int i = 0; i < m; ++i) {
        t(i, i + 1) = beta[static_cast<size_t>(i)];
        t(i + 1, i) = beta[static_cast<size_t>(i)];
      }
      es.compute(t);
      const auto& ev = es.eigenvalues();
      int top = std::abs(ev(0)) > std::abs(ev(m)) ? 0 : m;
      const double topval = ev(top);
      // Residual bound for the top Ritz pair: |b * last component|.
      const double resid = b * std::abs(es.eigenvectors()(m, top));
      res.eigval = topval;
      res.ritz_max = ev(m);
      res.ritz_min = ev(0);
      res.eigvec = basis.leftCols(m + 1) * es.eigenvectors().col(top);
      res.eigvec.normalize();
      // Bulk edge: largest |Ritz| ignoring the top one.
      double edge = 0.0;
      for (int i = 0; i <= m; ++i)
        if (i != top) edge = std::max(edge, std::abs(ev(i)));
      res.bulk_edge = edge;
      res.iterations = m + 1;
      if ((resid < tol * std::max(1.0, std::abs(topval)) &&
           std::abs(topval - prev_top) < tol * std::max(1.0, std::abs(topval)) &&
           m >= 4) ||
          b < 1e-14) {
        res.converged = true;
        return res;
      }
      prev_top = topval;
    }
    if (b < 1e-14) break;
    beta.push_back(b);
    v = w / b;
  }
  return res;
}

/// Top |eigenvalue| eigenpair of the implicit partial-trace matrix.
inline EigResult top_eigvec_abs(const PartialTraceAccum& m, int iters = 200,
                                double tol = 1e-10) {
  if (m.count() < 1) throw std::invalid_argument("top_eigvec_abs: empty accumulator");
  return lanczos_top_abs([&m](const Vector& v) { return m.matvec(v); }, m.dim(),
                         iters, tol);
}

}  // namespace sindex

#endif  // SINDEX_TENSOR_HPP
