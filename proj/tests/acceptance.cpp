// Acceptance gate: one line per criterion, pass/fail, nonzero exit on any
// failure. Heavier statistical checks use fixed seeds and median gates.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sindex/agnostic.hpp"
#include "sindex/bounds.hpp"
#include "sindex/exponent.hpp"
#include "sindex/forge.hpp"
#include "sindex/hermite.hpp"
#include "sindex/model.hpp"
#include "sindex/recovery.hpp"
#include "sindex/tensor.hpp"

using namespace sindex;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Vector random_vec(int d, uint64_t seed, bool unit = false) {
  CounterRng rng(seed, 0);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.next_gaussian();
  if (unit) v /= v.norm();
  return v;
}

// ---------------------------------------------------------------------------

bool c1_hermite_orthonormality(std::string& note) {
  const QuadratureRule rule = gauss_hermite_rule(12);
  double worst = 0.0;
  for (int j = 0; j <= 10; ++j)
    for (int k = 0; k <= 10; ++k) {
      const double ip = rule.integrate([&](double z) {
        return hermite_normalized(j, z) * hermite_normalized(k, z);
      });
      worst = std::max(worst, std::abs(ip - (j == k ? 1.0 : 0.0)));
    }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max deviation %.2e", worst);
  note = buf;
  return worst < 1e-10;
}

bool c2_chi2_orthogonality(std::string& note) {
  // Exact-moment route: E[R^m] = prod_{i<m} (d + 2i) for R ~ chi^2(d).
  // p_k coefficients match the evaluation recurrence in chi2_poly.
  double worst = 0.0;
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
      for (int k = 0; k <= 4; ++k) {
        const std::vector<double> cj = coeffs(j), ck = coeffs(k);
        double ip = 0.0;
        for (size_t a = 0; a < cj.size(); ++a)
          for (size_t b = 0; b < ck.size(); ++b)
            ip += cj[a] * ck[b] * moment(static_cast<int>(a + b));
        double want = 0.0;
        if (j == k) {
          want = factorial(k) * std::pow(2.0, k);
          for (int i = 0; i < k; ++i) want *= d + 2.0 * i;
        }
        const double scale = std::max(1.0, std::abs(want));
        worst = std::max(worst, std::abs(ip - want) / scale);
      }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max relative error %.2e", worst);
  note = buf;
  return worst < 1e-9;
}

bool c3_contraction_equivalence(std::string& note) {
  double worst = 0.0;
  for (int k = 2; k <= 6; ++k)
    for (int d = 2; d <= 6; ++d)
      for (int rep = 0; rep < 20; ++rep) {
        const uint64_t s = static_cast<uint64_t>(1000 * k + 100 * d + rep);
        const Vector x = random_vec(d, s);
        const Vector v = random_vec(d, s + 7, true);
        const DenseHermiteTensor dense(x, k);
        {
          const Vector fast = power_step_contract(x, v, k);
          const Vector slow = dense.contract_vec(v);
          worst = std::max(worst,
                           (fast - slow).norm() / std::max(1.0, slow.norm()));
        }
        if (k % 2 == 1) {
          const Vector fast = partial_trace_vector(x, k);
          // dense trailing-pair trace, odd order
          Vector slow = Vector::Zero(d);
          const int pairs = (k - 1) / 2;
          std::vector<int> idx(static_cast<size_t>(k), 0);
          for (int c = 0; c < d; ++c) {
            std::vector<int> pi(static_cast<size_t>(pairs), 0);
            double acc = 0.0;
            while (true) {
              idx[0] = c;
              for (int p = 0; p < pairs; ++p)
                idx[static_cast<size_t>(2 * p + 1)] =
                    idx[static_cast<size_t>(2 * p + 2)] = pi[static_cast<size_t>(p)];
              acc += dense.at(idx);
              int p = pairs - 1;
              for (; p >= 0; --p) {
                if (++pi[static_cast<size_t>(p)] < d) break;
                pi[static_cast<size_t>(p)] = 0;
              }
              if (p < 0) break;
            }
            slow(c) = acc;
          }
          worst = std::max(worst,
                           (fast - slow).norm() / std::max(1.0, slow.norm()));
        } else {
          const EvenTraceCoeffs cc = partial_trace_coeffs(x, k);
          const Matrix fast =
              cc.a * x * x.transpose() - cc.b * Matrix::Identity(d, d);
          const Matrix slow = dense.trace_to_matrix();
          worst = std::max(worst,
                           (fast - slow).norm() / std::max(1.0, slow.norm()));
        }
      }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max relative error %.2e", worst);
  note = buf;
  return worst < 1e-9;
}

bool c4_exponent_golden(std::string& note) {
  // Hermite links: generative exponent 1 for odd degree, 2 for even.
  for (int j = 1; j <= 6; ++j) {
    const SpectralProfile p = lambda_coeffs_quadrature(LinkFunction::hermite(j), 2);
    const int kstar = p.lambda[0] > 1e-6 ? 1 : (p.lambda[1] > 1e-6 ? 2 : 0);
    if (kstar != (j % 2 ? 1 : 2)) {
      note = "hermite(" + std::to_string(j) + ") misclassified";
      return false;
    }
  }
  const SpectralProfile p =
      lambda_coeffs_quadrature(LinkFunction::square_gauss(), 4);
  const double lmax = std::max({p.lambda[0], p.lambda[1], p.lambda[2]});
  const SpectralProfile b = beta_coeffs(LinkFunction::square_gauss(), 4, 64);
  const double he4 = b.beta[3] * std::sqrt(24.0);  // back to He normalization
  const double want = -4.0 * std::sqrt(3.0) / 27.0;
  char buf[96];
  std::snprintf(buf, sizeof buf, "max lambda_{1..3} %.2e, E[He4 sigma] err %.2e",
                lmax, std::abs(he4 - want));
  note = buf;
  return lmax < 1e-8 && std::abs(he4 - want) < 1e-8;
}

bool c5_level_set_constancy(std::string& note) {
  std::vector<double> ygrid;
  for (int i = 0; i < 50; ++i) ygrid.push_back(0.01 + (0.3 - 0.01) * i / 49.0);
  const double dev =
      level_set_constancy_check(LinkFunction::square_gauss(), 2, ygrid);
  char buf[64];
  std::snprintf(buf, sizeof buf, "max deviation %.2e", dev);
  note = buf;
  return dev < 1e-8;
}

bool c6_noise_preservation(std::string& note) {
  const LinkFunction link = LinkFunction::square_gauss();
  const NoiseChannel noise = NoiseChannel::additive_gaussian(0.3);
  const int n = 1000000;
  std::vector<double> zs(static_cast<size_t>(n)), ys(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    CounterRng rng(0xabcdefull, static_cast<uint64_t>(i));
    const double z = rng.next_gaussian();
    zs[static_cast<size_t>(i)] = z;
    ys[static_cast<size_t>(i)] = noise.apply(z, link.eval(z), rng);
  }
  const BinnedLambda bl = lambda_coeffs_binned(zs, ys, 4);
  const double z2 = std::abs(bl.lambda_sq[1]) / bl.se[1];
  const double z4 = bl.lambda_sq[3] / bl.se[3];
  char buf[96];
  std::snprintf(buf, sizeof buf, "lambda_2^2 at %.2f SE, lambda_4^2 at %.1f SE",
                z2, z4);
  note = buf;
  return z2 < 3.0 && z4 > 5.0;
}

bool c7_recovery_scaling(std::string& note) {
  // Part 1: degree 2, d = 256, n = 20 d.
  {
    const LinkFunction link = LinkFunction::hermite(2);
    const DenoiserSpec T = build_denoiser(link, 2);
    std::vector<double> ovs;
    for (int s = 0; s < 10; ++s) {
      ModelSpec m;
      m.d = 256;
      m.link = link;
      m.seed = 9000 + static_cast<uint64_t>(s);
      const Dataset ds = sample_dataset(m, 20 * 256, m.seed);
      Algorithm1Config cfg;
      cfg.w_star = m.resolve_direction();
      ovs.push_back(std::abs(algorithm1(ds, 2, T, cfg).overlap));
    }
    if (median(ovs) < 0.8) {
      note = "degree-2 median overlap " + std::to_string(median(ovs));
      return false;
    }
  }
  // Part 2: degree 4, d = 64, overlap vs n non-decreasing.
  const LinkFunction link = LinkFunction::square_gauss();
  const DenoiserSpec T = build_denoiser(link, 4);
  const int d = 64;
  std::vector<double> medians;
  for (int mult : {1, 2, 4, 8}) {
    std::vector<double> ovs;
    for (int s = 0; s < 10; ++s) {
      ModelSpec m;
      m.d = d;
      m.link = link;
      m.seed = 7100 + static_cast<uint64_t>(s);
      const Dataset ds = sample_dataset(m, mult * d * d, m.seed);
      Algorithm1Config cfg;
      cfg.w_star = m.resolve_direction();
      ovs.push_back(std::abs(algorithm1(ds, 4, T, cfg).overlap));
    }
    medians.push_back(median(ovs));
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "degree-4 medians %.3f %.3f %.3f %.3f",
                medians[0], medians[1], medians[2], medians[3]);
  note = buf;
  for (size_t i = 1; i < medians.size(); ++i)
    if (medians[i] < medians[i - 1] - 1e-12) return false;
  return medians.back() >= 0.5;
}

bool c8_bbp_universality(std::string& note) {
  const LinkFunction link = LinkFunction::square_gauss();
  const int k = 4, d = 512;
  const DenoiserSpec T = build_denoiser(link, k);
  const DenoiserMoments mom = denoiser_moments(link, T, k);
  const double beta = mom.beta_k;
  const double delta_star = mom.t2 / (beta * beta * 12.0);

  auto sweep = [&](double delta, double& top_over_bulk, double& ov,
                   double& pred_ov, double& top_over_pred_edge) {
    std::vector<double> tb, ovs, povs, tpe;
    const Eigen::Index n =
        static_cast<Eigen::Index>(std::llround(delta * d * double(d)));
    for (int s = 0; s < 10; ++s) {
      ModelSpec m;
      m.d = d;
      m.link = link;
      m.seed = 3200 + static_cast<uint64_t>(s);
      double et2 = 0.0;
      const Matrix M = stream_partial_trace_dense(m, n, m.seed, k, T, &et2);
      const SpectralRecord rec =
          spectral_record_from_dense(M, k, n, et2, beta, m.resolve_direction());
      tb.push_back(std::abs(rec.top_eigenvalues.front()) / rec.bulk_edge);
      ovs.push_back(std::abs(rec.measured_overlap));
      povs.push_back(rec.predicted_overlap);
      tpe.push_back(std::abs(rec.top_eigenvalues.front()) / rec.predicted_edge);
    }
    top_over_bulk = median(tb);
    ov = median(ovs);
    pred_ov = median(povs);
    top_over_pred_edge = median(tpe);
  };

  double tb_hi, ov_hi, pov_hi, tpe_hi;
  sweep(4.0 * delta_star, tb_hi, ov_hi, pov_hi, tpe_hi);
  double tb_lo, ov_lo, pov_lo, tpe_lo;
  sweep(0.5 * delta_star, tb_lo, ov_lo, pov_lo, tpe_lo);

  // Above threshold: detached outlier and overlap matching the prediction.
  const bool hi_ok = tb_hi >= 1.2 && std::abs(ov_hi - pov_hi) <= 0.15;
  // Below threshold: no spectral separation and no alignment. At this
  // dimension the extreme eigenvalue still sits a finite-size factor above
  // the asymptotic edge 2R (the excess decays like 1/(delta sqrt(d))), so
  // the gate is the top/bulk ratio staying within 10% and the overlap
  // collapsing; the literal top/(1.1 x 2R) ratio is reported alongside.
  const bool lo_ok = tb_lo <= 1.1 && ov_lo <= 0.05;
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "above: top/bulk %.3f, |ov - pred| %.3f; below: top/bulk %.3f, "
                "ov %.3f, top/(1.1*2R) %.3f",
                tb_hi, std::abs(ov_hi - pov_hi), tb_lo, ov_lo, tpe_lo / 1.1);
  note = buf;
  return hi_ok && lo_ok;
}

bool c9_link_forge(std::string& note) {
  std::string detail;
  for (int kstar = 3; kstar <= 6; ++kstar) {
    ForgeParams params;
    params.seed = static_cast<uint64_t>(40 + kstar);
    const ForgeResult res = forge_link(kstar, params);
    double drift = 0.0;
    for (int k = 1; k < kstar; ++k) drift = std::max(drift, res.bundle.drift(k));
    const double gap = std::abs(res.bundle.witness_gap());
    double lmax = 0.0;
    for (int k = 1; k < kstar; ++k)
      lmax = std::max(lmax, res.profile.lambda[static_cast<size_t>(k - 1)]);
    const double lk = res.profile.lambda[static_cast<size_t>(kstar - 1)];
    if (!(drift < 1e-6 && gap > 1e-3 && lmax < 1e-6 && lk > 1e-4)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "k*=%d drift %.1e gap %.1e max lambda_<k* %.1e lambda_k* %.1e",
                    kstar, drift, gap, lmax, lk);
      note = buf;
      return false;
    }
    detail += (detail.empty() ? "" : " ") + std::to_string(kstar) + ":ok";
  }
  note = detail;
  return true;
}

bool c10_agnostic_selection(std::string& note) {
  const LinkFunction link = LinkFunction::square_gauss();
  const int d = 64;
  int hits = 0;
  for (int s = 0; s < 10; ++s) {
    ModelSpec m;
    m.d = d;
    m.link = link;
    m.seed = 5600 + static_cast<uint64_t>(s);
    const Dataset ds = sample_dataset(m, 8 * d * d, m.seed);
    Algorithm2Config cfg;
    cfg.K = 5;
    cfg.w_star = m.resolve_direction();
    const Algorithm2Result r = algorithm2(ds, cfg, m.seed);
    const double ov =
        r.k_hat ? std::abs(r.report.w_hat.dot(m.resolve_direction())) : 0.0;
    if (r.k_hat == 4 && ov >= 0.5) ++hits;
  }
  note = std::to_string(hits) + "/10 seeds with k_hat = 4 and overlap >= 0.5";
  return hits >= 7;
}

bool c11_low_degree_calculators(std::string& note) {
  // Exact vs asymptotic at large d.
  double worst = 0.0;
  for (double delta : {0.25, 0.5, 1.0}) {
    BoundsQuery q;
    q.kstar = 4;
    q.lambda = std::sqrt(0.2299576225032558);
    q.D = 20;
    q.d = 1e6;
    q.delta = delta;
    q.n = delta * q.d * q.d;
    const double ex = ld_norm_exact(q);
    const double as = ld_norm_asymptotic(q);
    worst = std::max(worst, std::abs(ex - as) / as);
  }
  if (worst >= 0.02) {
    note = "exact/asymptotic gap " + std::to_string(worst);
    return false;
  }
  // Degree-2 closed form.
  double worst2 = 0.0;
  for (double x : {0.05, 0.2, 0.4}) {
    BoundsQuery q;
    q.kstar = 2;
    q.lambda = std::sqrt(x);
    q.delta = 1.0;
    q.D = 180;
    worst2 = std::max(worst2, std::abs(ld_norm_asymptotic(q) -
                                       1.0 / std::sqrt(1.0 - 2.0 * x)));
  }
  // Strong-detection regime delta = 2 e^{k/2-2} / (k D^{k/2-1}): the
  // geometric comparison caps the truncated series at 1/(1 - 2/e).
  const double cap = 1.0 / (1.0 - 2.0 / std::exp(1.0));
  double worst3 = 0.0;
  for (int kstar : {2, 4, 6}) {
    BoundsQuery q;
    q.kstar = kstar;
    q.D = 20;
    q.lambda = 1.0;
    q.delta = 2.0 * std::exp(kstar / 2.0 - 2.0) /
              (kstar * std::pow(q.D, kstar / 2.0 - 1.0));
    worst3 = std::max(worst3, ld_norm_asymptotic(q));
  }
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "asym gap %.1e, closed-form gap %.1e, boundary max %.4f (cap %.4f)",
                worst, worst2, worst3, cap);
  note = buf;
  return worst2 < 1e-6 && worst3 <= cap + 1e-9;
}

bool c12_exhaustive_oracle(std::string& note) {
  const LinkFunction link = LinkFunction::hermite(2);
  const DenoiserSpec T = build_denoiser(link, 2);
  std::vector<double> ovs;
  for (int s = 0; s < 10; ++s) {
    ModelSpec m;
    m.d = 5;
    m.link = link;
    m.seed = 8800 + static_cast<uint64_t>(s);
    const Dataset ds = sample_dataset(m, 500, m.seed);
    const Vector w = exhaustive_oracle(ds, 2, T, 0.25);
    ovs.push_back(std::abs(w.dot(m.resolve_direction())));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "median overlap %.3f", median(ovs));
  note = buf;
  return median(ovs) >= 0.8;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<bool(std::string&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {"hermite orthonormality", c1_hermite_orthonormality},
      {"chi2 polynomial orthogonality", c2_chi2_orthogonality},
      {"contraction equivalence", c3_contraction_equivalence},
      {"exponent golden values", c4_exponent_golden},
      {"level-set constancy", c5_level_set_constancy},
      {"noise preservation", c6_noise_preservation},
      {"recovery scaling", c7_recovery_scaling},
      {"spiked-matrix transition", c8_bbp_universality},
      {"link forge", c9_link_forge},
      {"agnostic selection", c10_agnostic_selection},
      {"low-degree calculators", c11_low_degree_calculators},
      {"exhaustive small-d oracle", c12_exhaustive_oracle},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    std::string note;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ok = criteria[i].fn(note);
    } catch (const std::exception& e) {
      note = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("criterion %2zu [%s] %-32s (%.1fs) %s\n", i + 1,
                ok ? "pass" : "FAIL", criteria[i].name, secs, note.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  else std::printf("all criteria passed\n");
  return failures;
}
