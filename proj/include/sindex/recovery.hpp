// Algorithm 1 (tensor power iteration with partial-trace warm start), the
// truncated-witness denoiser, BBP spectral diagnostics, and a brute-force
// net oracle for tiny d.
#ifndef SINDEX_RECOVERY_HPP
#define SINDEX_RECOVERY_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sindex/exponent.hpp"
#include "sindex/hermite.hpp"
#include "sindex/model.hpp"
#include "sindex/rng.hpp"
#include "sindex/tensor.hpp"

namespace sindex {

/// Lazily evaluates zeta_k(y) from the branch decomposition of a
/// deterministic link; plateau values map to the atom's conditional moment.
class ZetaEvaluator {
 public:
  ZetaEvaluator(const LinkFunction& link, int k, double domain_lo = -10.0,
                double domain_hi = 10.0, int grid = 4096)
      : link_(link), k_(k) {
    dec_ = detail::build_branches(link, domain_lo, domain_hi, grid);
    norm_ = std::sqrt(static_cast<Real>(factorial(k)));
    for (const auto& pl : dec_.plateaus) {
      const Real za = pl.open_left ? -std::numeric_limits<Real>::infinity() : pl.zlo;
      const Real zb = pl.open_right ? std::numeric_limits<Real>::infinity() : pl.zhi;
      const Real mass = detail::hermite_gauss_integral(0, za, zb);
      if (mass <= 0.0L) continue;
      bool merged = false;
      for (auto& at : atoms_)
        if (std::abs(at.value - pl.value) <=
            1e-9L * std::max<Real>(1.0L, std::abs(at.value))) {
          at.mass += mass;
          at.moment += detail::hermite_gauss_integral(k, za, zb);
          merged = true;
        }
      if (!merged)
        atoms_.push_back({pl.value, mass, detail::hermite_gauss_integral(k, za, zb)});
    }
  }

  double operator()(double y) const {
    const Real yr = static_cast<Real>(y);
    Real num = 0.0L, den = 0.0L;
    for (const auto& br : dec_.branches) {
      if (yr <= br.ylo || yr >= br.yhi) continue;
      const Real z = detail::branch_root(link_, br, yr);
      const Real sl = std::abs(detail::link_deriv(link_, z));
      if (sl < 1e-300L) continue;
      const Real w = detail::gauss_density(z) / sl;
      num += detail::hermite_ld(k_, z) * w;
      den += w;
    }
    if (den > 0.0L) return static_cast<double>(num / den / norm_);
    for (const auto& at : atoms_)
      if (std::abs(at.value - yr) <= 1e-9L * std::max<Real>(1.0L, std::abs(at.value)))
        return static_cast<double>(at.moment / at.mass / norm_);
    return 0.0;
  }

 private:
  struct Atom {
    Real value, mass, moment;
  };
  LinkFunction link_;
  int k_;
  detail::BranchDecomposition dec_;
  std::vector<Atom> atoms_;
  Real norm_;
};

/// Bounded label transform: |T(y)| <= 1 always.
struct DenoiserSpec {
  std::string variant;
  double R = 1.0;  // truncation radius on the raw witness scale
  std::function<double(double)> transform;

  double operator()(double y) const { return transform(y); }
};

/// T(y) = zeta_k(y) 1{|zeta_k| <= R} / R with R = C log(3/lambda_k)^{k/2}.
inline DenoiserSpec build_denoiser(const LinkFunction& link, int k, double C = 3.0,
                                   double tol = 1e-6) {
  const SpectralProfile prof = lambda_coeffs_quadrature(link, k);
  const double lam = prof.lambda[static_cast<size_t>(k - 1)];
  if (lam <= tol)
    throw std::runtime_error("build_denoiser: lambda_" + std::to_string(k) +
                             " below tolerance (no signal at this degree)");
  const double R = C * std::pow(std::log(3.0 / lam), k / 2.0);
  auto zeta = std::make_shared<ZetaEvaluator>(link, k);
  DenoiserSpec spec;
  spec.variant = "zeta-truncated";
  spec.R = R;
  spec.transform = [zeta, R](double y) {
    const double v = (*zeta)(y);
    return std::abs(v) <= R ? v / R : 0.0;
  };
  return spec;
}

/// Denoiser from a user-supplied table (binned estimates on noisy channels).
inline DenoiserSpec table_denoiser(std::vector<double> ys, std::vector<double> vals,
                                   double R) {
  auto tab = std::make_shared<TabulatedLink>();
  tab->xs = std::move(ys);
  tab->ys = std::move(vals);
  tab->left_value = 0.0;
  tab->right_value = 0.0;
  DenoiserSpec spec;
  spec.variant = "user-table";
  spec.R = R;
  spec.transform = [tab, R](double y) {
    const double v = tab->eval(y);
    return std::abs(v) <= R ? v / R : 0.0;
  };
  return spec;
}

/// Population moments of a denoiser on a noiseless link: E[T(sigma(Z))^2]
/// and E[T(sigma(Z)) h_k(Z)]. The composite T(sigma(z)) has kinks at the
/// link's critical points, where Gauss-Hermite rules misconverge badly, so
/// this integrates on a dense trapezoid grid instead.
struct DenoiserMoments {
  double t2 = 0.0;
  double beta_k = 0.0;
};

inline DenoiserMoments denoiser_moments(const LinkFunction& link,
                                        const DenoiserSpec& T, int k,
                                        double lo = -10.0, double hi = 10.0,
                                        int n = 2000000) {
  long double t2 = 0.0L, b = 0.0L;
  const long double h = (static_cast<long double>(hi) - lo) / n;
  for (int i = 1; i < n; ++i) {
    const double z = static_cast<double>(lo + i * h);
    const double v = T(link.eval(z));
    if (v == 0.0) continue;
    const long double g =
        std::exp(-0.5L * static_cast<long double>(z) * z) /
        std::sqrt(2.0L * 3.141592653589793238462643383279502884L);
    t2 += v * static_cast<long double>(v) * g * h;
    b += static_cast<long double>(v) * hermite_normalized(k, z) * g * h;
  }
  return {static_cast<double>(t2), static_cast<double>(b)};
}

struct StageLog {
  std::string name;
  Eigen::Index lo = 0, hi = 0;  // half-open sample index range
};

struct SpectralRecord {
  std::vector<double> top_eigenvalues;  // by |value|, descending
  double bulk_edge = 0.0;
  double r_squared = 0.0;
  double predicted_edge = 0.0;
  double predicted_outlier = 0.0;
  double predicted_overlap = 0.0;
  double measured_overlap = -1.0;  // -1: truth unknown
  double empirical_t2 = 0.0;       // mean of T(y)^2
  bool beta_known = false;
};

struct RecoveryReport {
  Eigen::VectorXd w_hat;
  double overlap = -1.0;  // -1: truth unknown
  std::vector<StageLog> stages;
  SpectralRecord spectral;  // populated for even k
  bool converged = true;
};

struct Algorithm1Config {
  Eigen::VectorXd w_star;       // optional truth for overlap reporting
  int lanczos_iters = 200;
  double lanczos_tol = 1e-10;
};

/// One empirical tensor power step on rows [lo, hi):
/// v <- normalize( (1/m) sum T(y_i) h_k(x_i)[v^{k-1}] ).
inline Eigen::VectorXd empirical_power_step(const Dataset& data,
                                            const DenoiserSpec& T, int k,
                                            const Eigen::VectorXd& v,
                                            Eigen::Index lo, Eigen::Index hi) {
  const int d = data.d;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  double dot_acc = 0.0;
  for (Eigen::Index i = lo; i < hi; ++i) {
    const double t = T(data.y(i));
    if (t == 0.0) continue;
    const double s = data.X.row(i).dot(v);
    acc += (t * hermite_unnormalized(k - 1, s)) * data.X.row(i).transpose();
    dot_acc += t * hermite_unnormalized(k - 2, s);
  }
  acc -= ((k - 1) * dot_acc) * v;
  const double m = static_cast<double>(hi - lo);
  acc /= m * std::sqrt(factorial(k));
  const double norm = acc.norm();
  if (norm < 1e-14) throw std::runtime_error("algorithm1: signal lost (zero iterate)");
  return acc / norm;
}

/// Warm start from the first half of the data: even k takes the top
/// |eigenvalue| eigenvector of the partial-trace matrix, odd k the
/// normalized partial-trace vector.
inline Eigen::VectorXd warm_start(const Dataset& data, const DenoiserSpec& T, int k,
                                  Eigen::Index lo, Eigen::Index hi,
                                  const Algorithm1Config& cfg, EigResult* eig_out) {
  const int d = data.d;
  if (k % 2 == 0 && k >= 2) {
    Eigen::MatrixXd X(hi - lo, d);
    Eigen::VectorXd y(hi - lo);
    for (Eigen::Index i = lo; i < hi; ++i) {
      X.row(i - lo) = data.X.row(i);
      y(i - lo) = T(data.y(i));
    }
    const PartialTraceAccum acc = PartialTraceAccum::from_rows(X, y, k);
    EigResult res = top_eigvec_abs(acc, cfg.lanczos_iters, cfg.lanczos_tol);
    if (eig_out) *eig_out = res;
    return res.eigvec;
  }
  // Odd k = 2j+1: mean of T(y) p_j^{(d+2)}(|x|^2) x / sqrt(k!).
  const int j = (k - 1) / 2;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = lo; i < hi; ++i) {
    const double t = T(data.y(i));
    if (t == 0.0) continue;
    acc += (t * chi2_poly(j, d + 2, data.X.row(i).squaredNorm())) *
           data.X.row(i).transpose();
  }
  const double norm = acc.norm();
  if (norm < 1e-14) throw std::runtime_error("algorithm1: signal lost (zero warm start)");
  return acc / norm;
}

/// Algorithm 1. Stage schedule: warm start on the first n/2 samples; for
/// odd k >= 3, ceil(log2 d) power rounds on n/2^{i+2} fresh samples each
/// plus one final round on n/4 fresh samples. For k = 1 and even k the
/// warm start is already the estimator — extra empirical power rounds at
/// these degrees measurably destroy the spectral overlap at desk-scale n,
/// so none are run.
inline RecoveryReport algorithm1(const Dataset& data, int k, const DenoiserSpec& T,
                                 const Algorithm1Config& cfg = {}) {
  const Eigen::Index n = data.n;
  const int d = data.d;
  if (n < 4 * (k + 2) || n < d)
    throw std::invalid_argument("algorithm1: n too small for the stage schedule");
  RecoveryReport rep;
  EigResult eig;
  // Odd k >= 3 holds out half the samples for the power rounds; the other
  // schedules are warm-start-only, so the spectral stage takes everything.
  const bool has_rounds = k >= 3 && k % 2 == 1;
  Eigen::Index used = has_rounds ? n / 2 : n;
  rep.stages.push_back({"warm-start", 0, used});
  Eigen::VectorXd v = warm_start(data, T, k, 0, used, cfg, &eig);

  if (has_rounds) {
    const int rounds = static_cast<int>(std::ceil(std::log2(static_cast<double>(d))));
    for (int i = 1; i <= rounds; ++i) {
      const Eigen::Index m = n >> (i + 2);
      if (m < 1 || used + m > n) break;
      rep.stages.push_back({"power-round-" + std::to_string(i), used, used + m});
      v = empirical_power_step(data, T, k, v, used, used + m);
      used += m;
    }
    const Eigen::Index m = n / 4;
    if (used + m <= n) {
      rep.stages.push_back({"final-round", used, used + m});
      v = empirical_power_step(data, T, k, v, used, used + m);
      used += m;
    }
  }

  rep.w_hat = v;
  if (cfg.w_star.size() == d) {
    const double c = v.dot(cfg.w_star);
    rep.overlap = c * c;
  }
  if (k % 2 == 0 && k >= 2) {
    rep.spectral.top_eigenvalues = {eig.eigval};
    rep.spectral.bulk_edge = eig.bulk_edge;
    rep.converged = eig.converged;
  }
  return rep;
}

/// Dense partial-trace matrix M_n streamed in blocks directly from the
/// model sampler: O(d^2) memory regardless of n. Labels pass through T.
inline Eigen::MatrixXd stream_partial_trace_dense(const ModelSpec& model,
                                                  Eigen::Index n, uint64_t seed,
                                                  int k, const DenoiserSpec& T,
                                                  double* empirical_t2 = nullptr,
                                                  Eigen::Index block = 16384) {
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("stream_partial_trace_dense: even k");
  const int d = model.d;
  const int j = (k - 2) / 2;
  const double norm = std::sqrt(factorial(k));
  const Eigen::VectorXd w = model.resolve_direction();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  double btot = 0.0, t2 = 0.0;
  Eigen::MatrixXd X(block, d);
  Eigen::VectorXd c(block);
  for (Eigen::Index start = 0; start < n; start += block) {
    const Eigen::Index m = std::min(block, n - start);
    for (Eigen::Index i = 0; i < m; ++i) {
      CounterRng rng(seed, static_cast<uint64_t>(start + i));
      double z = 0.0;
      for (int col = 0; col < d; ++col) {
        const double g = rng.next_gaussian();
        X(i, col) = g;
        z += g * w(col);
      }
      const double t = T(model.noise.apply(z, model.link.eval(z), rng));
      t2 += t * t;
      const double r2 = X.row(i).squaredNorm();
      c(i) = t * chi2_poly(j, d + 4, r2) / norm;
      btot += t * chi2_poly(j, d + 2, r2) / norm;
    }
    M.noalias() += X.topRows(m).transpose() * c.head(m).asDiagonal() * X.topRows(m);
  }
  M /= static_cast<double>(n);
  M -= (btot / static_cast<double>(n)) * Eigen::MatrixXd::Identity(d, d);
  if (empirical_t2) *empirical_t2 = t2 / static_cast<double>(n);
  return M;
}

/// Full spectral record from a dense M_n: top-5 |eigenvalues|, bulk edge
/// (largest |eigenvalue| with the top pair removed), predictions from
/// R^2 = E[T(Y)^2] d^{k/2} / (n k (k-1)!!).
inline SpectralRecord spectral_record_from_dense(const Eigen::MatrixXd& M, int k,
                                                 Eigen::Index n, double empirical_t2,
                                                 double beta_k,
                                                 const Eigen::VectorXd& w_star) {
  const int d = static_cast<int>(M.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const Eigen::VectorXd& ev = es.eigenvalues();
  std::vector<int> idx(static_cast<size_t>(d));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return std::abs(ev(a)) > std::abs(ev(b)); });
  SpectralRecord rec;
  for (int i = 0; i < std::min(5, d); ++i)
    rec.top_eigenvalues.push_back(ev(idx[static_cast<size_t>(i)]));
  rec.bulk_edge = d >= 2 ? std::abs(ev(idx[1])) : 0.0;
  rec.empirical_t2 = empirical_t2;
  double kfac = static_cast<double>(k);
  for (int i = k - 1; i >= 2; i -= 2) kfac *= i;  // k (k-1)!!
  rec.r_squared = empirical_t2 * std::pow(static_cast<double>(d), k / 2.0) /
                  (static_cast<double>(n) * kfac);
  rec.predicted_edge = 2.0 * std::sqrt(rec.r_squared);
  if (std::isfinite(beta_k) && beta_k != 0.0) {
    rec.beta_known = true;
    rec.predicted_outlier = std::abs(beta_k) + rec.r_squared / std::abs(beta_k);
    rec.predicted_overlap = std::max(0.0, 1.0 - rec.r_squared / (beta_k * beta_k));
  }
  if (w_star.size() == d) {
    const double c = es.eigenvectors().col(idx[0]).dot(w_star);
    rec.measured_overlap = c * c;
  }
  return rec;
}

/// BBP diagnostics on an in-memory dataset (k even, k >= 4).
inline SpectralRecord bbp_diagnostics(const Dataset& data, int k, const DenoiserSpec& T,
                                      double beta_k = std::nan(""),
                                      const Eigen::VectorXd& w_star = {}) {
  if (k % 2 != 0 || k < 4) throw std::invalid_argument("bbp_diagnostics: need even k >= 4");
  const int d = data.d;
  const int j = (k - 2) / 2;
  const double norm = std::sqrt(factorial(k));
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  double btot = 0.0, t2 = 0.0;
  for (Eigen::Index i = 0; i < data.n; ++i) {
    const double t = T(data.y(i));
    t2 += t * t;
    if (t == 0.0) continue;
    const double r2 = data.X.row(i).squaredNorm();
    M.noalias() += (t * chi2_poly(j, d + 4, r2) / norm) * data.X.row(i).transpose() *
                   data.X.row(i);
    btot += t * chi2_poly(j, d + 2, r2) / norm;
  }
  M /= static_cast<double>(data.n);
  M -= (btot / static_cast<double>(data.n)) * Eigen::MatrixXd::Identity(d, d);
  return spectral_record_from_dense(M, k, data.n, t2 / static_cast<double>(data.n),
                                    beta_k, w_star);
}

/// Argmax of |empirical correlation| over a pseudo-random delta-net of the
/// sphere; tiny-d information-theoretic oracle.
inline Eigen::VectorXd exhaustive_oracle(const Dataset& data, int k,
                                         const DenoiserSpec& T, double delta,
                                         uint64_t seed = 424242) {
  const int d = data.d;
  if (data.n < 1) throw std::invalid_argument("exhaustive_oracle: empty dataset");
  const double size = std::pow(3.0 / delta, d);
  if (d > 6 || size > 1e7)
    throw std::invalid_argument("exhaustive_oracle: net size guard exceeded");
  const Eigen::Index net = static_cast<Eigen::Index>(size);
  std::vector<double> ty(static_cast<size_t>(data.n));
  for (Eigen::Index i = 0; i < data.n; ++i) ty[static_cast<size_t>(i)] = T(data.y(i));
  Eigen::VectorXd best = Eigen::VectorXd::Zero(d);
  double best_score = -1.0;
  const double norm = std::sqrt(factorial(k));
  Eigen::VectorXd w(d);
  for (Eigen::Index p = 0; p < net; ++p) {
    CounterRng rng(mix_seed(seed, 0x6e6574ull), static_cast<uint64_t>(p));
    for (int c = 0; c < d; ++c) w(c) = rng.next_gaussian();
    w.normalize();
    double s = 0.0;
    for (Eigen::Index i = 0; i < data.n; ++i) {
      const double t = ty[static_cast<size_t>(i)];
      if (t == 0.0) continue;
      s += t * hermite_unnormalized(k, data.X.row(i).dot(w));
    }
    const double score = std::abs(s / (static_cast<double>(data.n) * norm));
    if (score > best_score) {
      best_score = score;
      best = w;
    }
  }
  return best;
}

}  // namespace sindex

#endif  // SINDEX_RECOVERY_HPP
