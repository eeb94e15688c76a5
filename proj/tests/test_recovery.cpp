#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "sindex/exponent.hpp"
#include "sindex/hermite.hpp"
#include "sindex/model.hpp"
#include "sindex/recovery.hpp"

using namespace sindex;

TEST_CASE("zeta-truncated denoiser for z^2 exp(-z^2): pinned moments") {
  const LinkFunction link = LinkFunction::square_gauss();
  const DenoiserSpec T = build_denoiser(link, 4);
  // R = 3 log(3/lambda_4)^2 with lambda_4 = sqrt(0.2299576225032558).
  CHECK(T.R == doctest::Approx(10.085630).epsilon(1e-5));
  // T = zeta_4 / R away from truncation, so E[T^2] = lambda_4^2 / R^2 and
  // E[T h_4] = lambda_4^2 / R. The evaluator returns 0 in vanishing
  // windows at the link's critical levels, hence the loose tolerances.
  const DenoiserMoments mom = denoiser_moments(link, T, 4);
  CHECK(mom.t2 == doctest::Approx(0.00226069234850154).epsilon(2e-3));
  CHECK(mom.beta_k == doctest::Approx(0.0228005134859205).epsilon(1e-3));
  // delta_star = E[T^2] / (beta_4^2 * 4 * 3!!) = 1 / (12 lambda_4^2).
  CHECK(mom.t2 / (mom.beta_k * mom.beta_k * 12.0) ==
        doctest::Approx(1.0 / (12.0 * 0.2299576225032558)).epsilon(2e-3));
}

TEST_CASE("build_denoiser refuses degrees with no signal") {
  CHECK_THROWS(build_denoiser(LinkFunction::square_gauss(), 2));
}

TEST_CASE("table denoiser interpolates and vanishes outside its support") {
  const DenoiserSpec T = table_denoiser({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}, 1.0);
  CHECK(T(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(T(1.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(T(-3.0) == 0.0);
  CHECK(T(5.0) == 0.0);
}

TEST_CASE("algorithm1 recovers an easy even-degree instance deterministically") {
  ModelSpec m;
  m.d = 24;
  m.link = LinkFunction::hermite(2);
  m.seed = 31;
  const Dataset ds = sample_dataset(m, 4000, 31);
  const DenoiserSpec T = build_denoiser(m.link, 2);
  Algorithm1Config cfg;
  cfg.w_star = m.resolve_direction();
  const RecoveryReport a = algorithm1(ds, 2, T, cfg);
  const RecoveryReport b = algorithm1(ds, 2, T, cfg);
  CHECK(std::abs(a.w_hat.norm() - 1.0) < 1e-10);
  CHECK(std::abs(a.overlap) > 0.9);
  CHECK((a.w_hat - b.w_hat).norm() == 0.0);
}

TEST_CASE("algorithm1 overlap is invariant under rotation of the data") {
  ModelSpec m;
  m.d = 12;
  m.link = LinkFunction::hermite(2);
  m.seed = 57;
  Dataset ds = sample_dataset(m, 3000, 57);
  const DenoiserSpec T = build_denoiser(m.link, 2);
  Algorithm1Config cfg;
  cfg.w_star = m.resolve_direction();
  const double ov = std::abs(algorithm1(ds, 2, T, cfg).overlap);

  // Householder rotation; labels are untouched.
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(m.d, 0.3, 1.9).normalized();
  const Eigen::MatrixXd Q =
      Eigen::MatrixXd::Identity(m.d, m.d) - 2.0 * u * u.transpose();
  Dataset rot = ds;
  rot.X = ds.X * Q.transpose();
  Algorithm1Config cfg_rot;
  cfg_rot.w_star = (Q * m.resolve_direction()).eval();
  const double ov_rot = std::abs(algorithm1(rot, 2, T, cfg_rot).overlap);
  CHECK(ov_rot == doctest::Approx(ov).epsilon(1e-6));
}

TEST_CASE("odd-degree recovery succeeds with power rounds") {
  ModelSpec m;
  m.d = 16;
  m.link = LinkFunction::hermite(3);
  m.seed = 93;
  const Dataset ds = sample_dataset(m, 60000, 93);
  const DenoiserSpec T = build_denoiser(m.link, 3);
  Algorithm1Config cfg;
  cfg.w_star = m.resolve_direction();
  const RecoveryReport r = algorithm1(ds, 3, T, cfg);
  CHECK(std::abs(r.overlap) > 0.8);
  CHECK(r.stages.size() > 1);  // warm start plus power rounds
}

TEST_CASE("streamed partial trace matches the in-memory accumulation") {
  ModelSpec m;
  m.d = 10;
  m.link = LinkFunction::square_gauss();
  m.seed = 64;
  const int k = 4;
  const DenoiserSpec T = build_denoiser(m.link, k);
  double t2s = 0.0;
  const Eigen::MatrixXd Ms = stream_partial_trace_dense(m, 3000, 64, k, T, &t2s, 512);
  // Same samples through the dataset route.
  const Dataset ds = sample_dataset(m, 3000, 64);
  Eigen::VectorXd ty(ds.n);
  for (Eigen::Index i = 0; i < ds.n; ++i) ty(i) = T(ds.y(i));
  const PartialTraceAccum acc = PartialTraceAccum::from_rows(ds.X, ty, k);
  CHECK((Ms - acc.densify()).norm() < 1e-10 * std::max(1.0, acc.densify().norm()));
  CHECK(t2s == doctest::Approx(ty.squaredNorm() / static_cast<double>(ds.n))
                   .epsilon(1e-12));
}

TEST_CASE("spectral record reproduces the prediction identities") {
  const int d = 40, k = 4;
  ModelSpec m;
  m.d = d;
  m.link = LinkFunction::square_gauss();
  m.seed = 11;
  const DenoiserSpec T = build_denoiser(m.link, k);
  const double beta = denoiser_moments(m.link, T, k).beta_k;
  double t2 = 0.0;
  const Eigen::Index n = 30000;
  const Eigen::MatrixXd M = stream_partial_trace_dense(m, n, 11, k, T, &t2);
  const SpectralRecord rec =
      spectral_record_from_dense(M, k, n, t2, beta, m.resolve_direction());
  // R^2 = E[T^2] d^{k/2} / (n k (k-1)!!), edge = 2R, outlier = beta + R^2/beta.
  const double R2 = t2 * std::pow(d, 2.0) / (static_cast<double>(n) * 12.0);
  CHECK(rec.r_squared == doctest::Approx(R2).epsilon(1e-10));
  CHECK(rec.predicted_edge == doctest::Approx(2.0 * std::sqrt(R2)).epsilon(1e-10));
  CHECK(rec.predicted_outlier == doctest::Approx(beta + R2 / beta).epsilon(1e-10));
  CHECK(rec.predicted_overlap == doctest::Approx(1.0 - R2 / (beta * beta)).epsilon(1e-10));
  CHECK(rec.measured_overlap >= -1.0);
}

TEST_CASE("exhaustive oracle aligns on a tiny instance") {
  ModelSpec m;
  m.d = 4;
  m.link = LinkFunction::hermite(2);
  m.seed = 5;
  const Dataset ds = sample_dataset(m, 2000, 5);
  const DenoiserSpec T = build_denoiser(m.link, 2);
  const Eigen::VectorXd w = exhaustive_oracle(ds, 2, T, 0.25);
  CHECK(std::abs(w.norm() - 1.0) < 1e-10);
  CHECK(std::abs(w.dot(m.resolve_direction())) > 0.8);
}
