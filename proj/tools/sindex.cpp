// sindex: numerical laboratory for Gaussian single-index models.
//
// Subcommands: sample, exponent, recover, agnostic, forge, bbp-sweep,
// phase-sweep, bounds. Exit codes: 0 success, 2 config error, 3 numerical
// failure, 4 verification failure.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sindex/agnostic.hpp"
#include "sindex/bounds.hpp"
#include "sindex/config.hpp"
#include "sindex/exponent.hpp"
#include "sindex/forge.hpp"
#include "sindex/model.hpp"
#include "sindex/recovery.hpp"

namespace {

using namespace sindex;

struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// identity | hermite(j) | square-gauss | cosine(g) | forged:<path>
LinkFunction parse_link(const std::string& s) {
  if (s == "identity") return LinkFunction::identity();
  if (s == "square-gauss") return LinkFunction::square_gauss();
  if (s.rfind("forged:", 0) == 0) return read_forged_csv(s.substr(7));
  const auto call = [&](const std::string& name) -> std::string {
    if (s.rfind(name + "(", 0) == 0 && s.back() == ')')
      return s.substr(name.size() + 1, s.size() - name.size() - 2);
    return {};
  };
  if (auto a = call("hermite"); !a.empty()) return LinkFunction::hermite(std::stoi(a));
  if (auto a = call("cosine"); !a.empty()) return LinkFunction::cosine(std::stod(a));
  throw ConfigError("unknown link: " + s);
}

/// deterministic | additive(tau) | multiplicative | massart(rate)
NoiseChannel parse_noise(const std::string& s) {
  if (s.empty() || s == "deterministic") return NoiseChannel::deterministic();
  if (s == "multiplicative") return NoiseChannel::multiplicative_gaussian();
  const auto call = [&](const std::string& name) -> std::string {
    if (s.rfind(name + "(", 0) == 0 && s.back() == ')')
      return s.substr(name.size() + 1, s.size() - name.size() - 2);
    return {};
  };
  if (auto a = call("additive"); !a.empty())
    return NoiseChannel::additive_gaussian(std::stod(a));
  if (auto a = call("massart"); !a.empty()) return NoiseChannel::massart(std::stod(a));
  throw ConfigError("unknown noise channel: " + s);
}

size_t flag_count(const CLI::App* sub, const std::string& flag) {
  const CLI::Option* opt = sub->get_option_no_throw(flag);
  return opt ? opt->count() : 0;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::runtime_error("median of empty set");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quartile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Shared experiment knobs, merged from --config and flags.
struct Common {
  std::string out = "report.txt";
  uint64_t seed = 1;
  int seeds = 1;
  int threads = 1;
  std::string config_path;
  Config cfg;

  void load(const std::string& section, CLI::App* sub) {
    if (!config_path.empty()) cfg = Config::parse_file(config_path);
    // Flags win over config; config wins over defaults.
    if (flag_count(sub, "--out") == 0)
      out = cfg.get(section + ".out", cfg.get("common.out", out));
    if (flag_count(sub, "--seed") == 0)
      seed = cfg.get_u64(section + ".seed", cfg.get_u64("common.seed", seed));
    if (flag_count(sub, "--seeds") == 0)
      seeds = static_cast<int>(
          cfg.get_int(section + ".seeds", cfg.get_int("common.seeds", seeds)));
    if (flag_count(sub, "--threads") == 0)
      threads = static_cast<int>(
          cfg.get_int(section + ".threads", cfg.get_int("common.threads", threads)));
    if (seeds < 1) throw ConfigError("seeds must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }

  void echo(ReportWriter& rep, const std::string& section) const {
    rep.config_echo(cfg);
    rep.section(section);
    rep.kv("seed", seed);
    rep.kv("seeds", seeds);
    rep.kv("threads", threads);
  }
};

int cmd_sample(const Common& com, const std::string& link_s, const std::string& noise_s,
               int d, long long n) {
  ModelSpec model;
  model.d = d;
  model.link = parse_link(link_s);
  model.noise = parse_noise(noise_s);
  model.seed = com.seed;
  Dataset ds = sample_dataset(model, n, com.seed, com.threads);
  write_dataset_csv(ds, com.out);
  std::printf("wrote %lld samples (d=%d, link=%s, noise=%s) to %s\n",
              static_cast<long long>(ds.n), d, model.link.name().c_str(),
              model.noise.name().c_str(), com.out.c_str());
  return 0;
}

int cmd_exponent(const Common& com, const std::string& link_s, const std::string& noise_s,
                 int kmax, long long n_mc, int zeta_grid) {
  const LinkFunction link = parse_link(link_s);
  const NoiseChannel noise = parse_noise(noise_s);
  ReportWriter rep(com.out);
  com.echo(rep, "exponent");
  rep.kv("link", link.name());
  rep.kv("noise", noise.name());
  rep.kv("kmax", kmax);

  SpectralProfile prof;
  if (noise.kind == NoiseKind::kDeterministic) {
    prof = lambda_coeffs_quadrature(link, kmax);
    const SpectralProfile betas = beta_coeffs(link, kmax, 64);
    prof.beta = betas.beta;
    prof.beta_converged = betas.beta_converged;
  } else {
    // Noisy channel: Monte Carlo pairs (z, y) into the binned estimator.
    std::vector<double> zs(static_cast<size_t>(n_mc)), ys(static_cast<size_t>(n_mc));
    CounterRng base(mix_seed(com.seed, 0x657870ull), 0);
    for (long long i = 0; i < n_mc; ++i) {
      CounterRng rng(mix_seed(com.seed, 0x657870ull), static_cast<uint64_t>(i + 1));
      const double z = rng.next_gaussian();
      zs[static_cast<size_t>(i)] = z;
      ys[static_cast<size_t>(i)] = noise.apply(z, link.eval(z), rng);
    }
    const BinnedLambda bl = lambda_coeffs_binned(zs, ys, kmax);
    prof.kmax = kmax;
    prof.method = "binned estimator";
    prof.lambda_sq = bl.lambda_sq;
    prof.lambda_se = bl.se;
    prof.lambda.resize(static_cast<size_t>(kmax));
    for (int k = 1; k <= kmax; ++k) {
      const double l2 = bl.lambda_sq[static_cast<size_t>(k - 1)];
      // Significance gate: estimates within 3 SE of zero count as zero.
      prof.lambda[static_cast<size_t>(k - 1)] =
          l2 > 3.0 * bl.se[static_cast<size_t>(k - 1)] ? std::sqrt(l2) : 0.0;
    }
    prof.tol = 1e-4;
  }
  const auto [info, gen] = classify_exponents(prof, prof.tol > 0 ? prof.tol : 1e-6);
  rep.section("profile");
  rep.kv("method", prof.method);
  for (int k = 1; k <= kmax; ++k) {
    rep.kv("lambda_" + std::to_string(k), prof.lambda[static_cast<size_t>(k - 1)]);
    if (!prof.lambda_se.empty())
      rep.kv("lambda_se_" + std::to_string(k), prof.lambda_se[static_cast<size_t>(k - 1)]);
    if (!prof.beta.empty())
      rep.kv("beta_" + std::to_string(k), prof.beta[static_cast<size_t>(k - 1)]);
  }
  rep.kv("info_exponent", info);
  rep.kv("gen_exponent", gen);

  // Witness tables zeta_k(y) on a y-grid (deterministic channels only).
  if (noise.kind == NoiseKind::kDeterministic && zeta_grid > 0 && gen > 0) {
    rep.section("zeta");
    rep.raw("# columns: k,y,zeta_k(y)");
    double ylo = 1e300, yhi = -1e300;
    for (int i = 0; i <= 512; ++i) {
      const double y = link.eval(-4.0 + 8.0 * i / 512);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
    ZetaEvaluator zeta(link, gen);
    for (int i = 0; i < zeta_grid; ++i) {
      const double y = ylo + (yhi - ylo) * (i + 0.5) / zeta_grid;
      char buf[96];
      std::snprintf(buf, sizeof buf, "zeta,%d,%.10g,%.10g", gen, y, zeta(y));
      rep.raw(buf);
    }
  }
  std::printf("link=%s info_exponent=%d gen_exponent=%d -> %s\n", link.name().c_str(),
              info, gen, com.out.c_str());
  return 0;
}

int cmd_recover(const Common& com, const std::string& link_s, const std::string& noise_s,
                int k, int d, long long n) {
  const LinkFunction link = parse_link(link_s);
  DenoiserSpec T = build_denoiser(link, k);
  ReportWriter rep(com.out);
  com.echo(rep, "recover");
  rep.kv("link", link.name());
  rep.kv("k", k);
  rep.kv("d", d);
  rep.kv("n", n);
  std::vector<double> overlaps;
  for (int s = 0; s < com.seeds; ++s) {
    ModelSpec model;
    model.d = d;
    model.link = link;
    model.noise = parse_noise(noise_s);
    model.seed = com.seed + static_cast<uint64_t>(s);
    Dataset ds = sample_dataset(model, n, model.seed, com.threads);
    Algorithm1Config a1;
    a1.w_star = model.resolve_direction();
    const RecoveryReport r = algorithm1(ds, k, T, a1);
    overlaps.push_back(std::abs(r.overlap));
    rep.section("run_" + std::to_string(s));
    rep.kv("seed", model.seed);
    rep.kv("overlap", r.overlap);
    rep.kv("converged", r.converged ? 1 : 0);
    if (!r.spectral.top_eigenvalues.empty()) {
      rep.kv("top_eigenvalue", r.spectral.top_eigenvalues.front());
      rep.kv("bulk_edge", r.spectral.bulk_edge);
    }
  }
  rep.section("summary");
  rep.kv("median_overlap", median(overlaps));
  std::printf("recover k=%d d=%d n=%lld: median |overlap| = %.4f (%d seeds) -> %s\n", k,
              d, n, median(overlaps), com.seeds, com.out.c_str());
  return 0;
}

int cmd_agnostic(const Common& com, const std::string& link_s, const std::string& noise_s,
                 int d, long long n, int K, int M, long long L) {
  const LinkFunction link = parse_link(link_s);
  ReportWriter rep(com.out);
  com.echo(rep, "agnostic");
  rep.kv("link", link.name());
  rep.kv("d", d);
  rep.kv("n", n);
  rep.kv("K", K);
  rep.kv("M", M);
  std::vector<double> overlaps, khats;
  for (int s = 0; s < com.seeds; ++s) {
    ModelSpec model;
    model.d = d;
    model.link = link;
    model.noise = parse_noise(noise_s);
    model.seed = com.seed + static_cast<uint64_t>(s);
    Dataset ds = sample_dataset(model, n, model.seed, com.threads);
    Algorithm2Config cfg;
    cfg.K = K;
    cfg.M = M;
    cfg.L = L;
    cfg.w_star = model.resolve_direction();
    const Algorithm2Result r = algorithm2(ds, cfg, model.seed);
    const double ov = r.k_hat
                          ? std::abs(r.report.w_hat.dot(model.resolve_direction()))
                          : 0.0;
    overlaps.push_back(ov);
    khats.push_back(r.k_hat);
    rep.section("run_" + std::to_string(s));
    rep.kv("seed", model.seed);
    rep.kv("k_hat", r.k_hat);
    rep.kv("overlap", ov);
    for (int k = 1; k <= K; ++k)
      rep.kv("f_" + std::to_string(k), r.f_values[static_cast<size_t>(k - 1)]);
  }
  rep.section("summary");
  rep.kv("median_overlap", median(overlaps));
  rep.kv("median_k_hat", median(khats));
  std::printf("agnostic d=%d n=%lld: median k_hat = %g, median overlap = %.4f -> %s\n",
              d, n, median(khats), median(overlaps), com.out.c_str());
  return 0;
}

int cmd_forge(const Common& com, int kstar, double tau, double eps) {
  ForgeParams params;
  params.tau = tau;
  params.eps = eps;
  params.seed = com.seed;
  ForgeResult res;
  try {
    res = forge_link(kstar, params);
  } catch (const std::runtime_error& e) {
    if (std::string(e.what()).find("verification failed") != std::string::npos)
      throw VerificationFailure(e.what());
    throw;
  }
  write_forged_csv(com.out, res, params);
  double drift = 0;
  for (int k = 1; k < kstar; ++k) drift = std::max(drift, res.bundle.drift(k));
  std::printf(
      "forged kstar=%d: conservation drift %.2e, witness gap %.3e, "
      "lambda_%d = %.4e -> %s\n",
      kstar, drift, res.bundle.witness_gap(), kstar,
      res.profile.lambda[static_cast<size_t>(kstar - 1)], com.out.c_str());
  return 0;
}

int cmd_bbp_sweep(const Common& com, const std::string& link_s, int k, int d,
                  const std::vector<double>& deltas) {
  if (deltas.empty()) throw ConfigError("bbp-sweep: empty delta grid");
  const LinkFunction link = parse_link(link_s);
  DenoiserSpec T = build_denoiser(link, k);
  const DenoiserMoments mom = denoiser_moments(link, T, k);
  const double t2 = mom.t2;
  const double beta = mom.beta_k;
  std::ofstream out(com.out);
  if (!out) throw std::runtime_error("cannot open " + com.out);
  out.precision(10);
  out << "# bbp-sweep link=" << link.name() << " k=" << k << " d=" << d
      << " seeds=" << com.seeds << " base_seed=" << com.seed << "\n";
  out << "# E[T^2]=" << t2 << " beta_k=" << beta
      << " delta_star=" << t2 / (beta * beta * 12.0) << "\n";
  out << "delta,n,top,bulk_edge,predicted_edge,predicted_overlap,overlap\n";
  for (double delta : deltas) {
    const long long n =
        static_cast<long long>(std::llround(delta * std::pow(d, k / 2.0)));
    std::vector<double> tops, bulks, pedges, povs, ovs;
    for (int s = 0; s < com.seeds; ++s) {
      ModelSpec model;
      model.d = d;
      model.link = link;
      model.seed = com.seed + static_cast<uint64_t>(s);
      double et2 = 0;
      const Eigen::MatrixXd M = stream_partial_trace_dense(model, n, model.seed, k, T, &et2);
      const SpectralRecord rec =
          spectral_record_from_dense(M, k, n, et2, beta, model.resolve_direction());
      tops.push_back(std::abs(rec.top_eigenvalues.front()));
      bulks.push_back(rec.bulk_edge);
      pedges.push_back(rec.predicted_edge);
      povs.push_back(rec.predicted_overlap);
      ovs.push_back(rec.measured_overlap);
    }
    out << delta << "," << n << "," << median(tops) << "," << median(bulks) << ","
        << median(pedges) << "," << median(povs) << "," << median(ovs) << "\n";
    std::printf("delta=%.4g n=%lld top=%.4g edge=%.4g overlap=%.3f (pred %.3f)\n",
                delta, n, median(tops), median(pedges), median(ovs), median(povs));
  }
  return 0;
}

int cmd_phase_sweep(const Common& com, const std::string& link_s, int k,
                    const std::vector<double>& dims, const std::vector<double>& ns) {
  if (dims.empty() || ns.empty()) throw ConfigError("phase-sweep: empty grid");
  const LinkFunction link = parse_link(link_s);
  DenoiserSpec T = build_denoiser(link, k);
  std::ofstream out(com.out);
  if (!out) throw std::runtime_error("cannot open " + com.out);
  out.precision(10);
  out << "# phase-sweep link=" << link.name() << " k=" << k
      << " seeds=" << com.seeds << " base_seed=" << com.seed << "\n";
  out << "d,n,q25,median,q75\n";
  for (double dd : dims) {
    const int d = static_cast<int>(dd);
    for (double nn : ns) {
      const long long n = static_cast<long long>(nn);
      std::vector<double> ovs;
      for (int s = 0; s < com.seeds; ++s) {
        ModelSpec model;
        model.d = d;
        model.link = link;
        model.seed = com.seed + static_cast<uint64_t>(s);
        Dataset ds = sample_dataset(model, n, model.seed, com.threads);
        Algorithm1Config a1;
        a1.w_star = model.resolve_direction();
        ovs.push_back(std::abs(algorithm1(ds, k, T, a1).overlap));
      }
      out << d << "," << n << "," << quartile(ovs, 0.25) << "," << median(ovs) << ","
          << quartile(ovs, 0.75) << "\n";
      std::printf("d=%d n=%lld median |overlap| = %.4f\n", d, n, median(ovs));
    }
  }
  return 0;
}

int cmd_bounds(const Common& com, int kstar, double lambda, int D, double r,
               const std::vector<double>& dims, const std::vector<double>& deltas) {
  if (dims.empty() || deltas.empty()) throw ConfigError("bounds: empty grid");
  std::ofstream out(com.out);
  if (!out) throw std::runtime_error("cannot open " + com.out);
  out.precision(10);
  out << "# bounds kstar=" << kstar << " lambda=" << lambda << " D=" << D
      << " r=" << r << "\n";
  out << "d,delta,n,ld_exact,ld_asymptotic,sq_bound\n";
  for (double d : dims) {
    for (double delta : deltas) {
      BoundsQuery q;
      q.kstar = kstar;
      q.lambda = lambda;
      q.D = D;
      q.r = r;
      q.d = d;
      q.delta = delta;
      q.n = delta * std::pow(d, kstar / 2.0);
      out << d << "," << delta << "," << q.n << "," << ld_norm_exact(q) << ","
          << ld_norm_asymptotic(q) << "," << sq_bound(q) << "\n";
    }
  }
  std::printf("bounds table (%zu x %zu) -> %s\n", dims.size(), deltas.size(),
              com.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for Gaussian single-index models"};
  app.require_subcommand(1);

  Common com;
  std::string link = "square-gauss", noise = "deterministic";
  int d = 64, k = 4, kmax = 8, K = 5, M = 6, kstar = 4, D = 20, zeta_grid = 0;
  long long n = 4096, L = 0, n_mc = 1000000;
  double tau = 0.3, eps = 0.05, lambda = 1.0, r = 1.0;
  std::string deltas_s = "0.5", dims_s = "64", ns_s = "4096";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", com.out, "output path");
    sub->add_option("--seed", com.seed, "base seed");
    sub->add_option("--seeds", com.seeds, "number of seeds");
    sub->add_option("--threads", com.threads, "worker threads");
    sub->add_option("--config", com.config_path, "key=value config file");
  };

  CLI::App* sc_sample = app.add_subcommand("sample", "draw a dataset and write CSV");
  sc_sample->add_option("--link", link);
  sc_sample->add_option("--noise", noise);
  sc_sample->add_option("--d", d);
  sc_sample->add_option("--n", n);
  add_common(sc_sample);

  CLI::App* sc_exp = app.add_subcommand("exponent", "information/generative exponents");
  sc_exp->add_option("--link", link);
  sc_exp->add_option("--noise", noise);
  sc_exp->add_option("--kmax", kmax);
  sc_exp->add_option("--n", n_mc, "Monte Carlo samples (noisy channels)");
  sc_exp->add_option("--zeta-grid", zeta_grid, "witness table rows");
  add_common(sc_exp);

  CLI::App* sc_rec = app.add_subcommand("recover", "Algorithm 1 with the zeta denoiser");
  sc_rec->add_option("--link", link);
  sc_rec->add_option("--noise", noise);
  sc_rec->add_option("--k", k);
  sc_rec->add_option("--d", d);
  sc_rec->add_option("--n", n);
  add_common(sc_rec);

  CLI::App* sc_agn = app.add_subcommand("agnostic", "Algorithm 2 without k*");
  sc_agn->add_option("--link", link);
  sc_agn->add_option("--noise", noise);
  sc_agn->add_option("--d", d);
  sc_agn->add_option("--n", n);
  sc_agn->add_option("--K", K);
  sc_agn->add_option("--M", M);
  sc_agn->add_option("--L", L, "validation split size (0: n/10)");
  add_common(sc_agn);

  CLI::App* sc_forge = app.add_subcommand("forge", "construct a link with prescribed k*");
  sc_forge->add_option("--kstar", kstar);
  sc_forge->add_option("--tau", tau);
  sc_forge->add_option("--eps", eps);
  add_common(sc_forge);

  CLI::App* sc_bbp = app.add_subcommand("bbp-sweep", "spiked-matrix transition sweep");
  sc_bbp->add_option("--link", link);
  sc_bbp->add_option("--k", k);
  sc_bbp->add_option("--d", d);
  sc_bbp->add_option("--deltas", deltas_s, "comma list of n/d^{k/2}");
  add_common(sc_bbp);

  CLI::App* sc_phase = app.add_subcommand("phase-sweep", "overlap over a (d, n) grid");
  sc_phase->add_option("--link", link);
  sc_phase->add_option("--k", k);
  sc_phase->add_option("--dims", dims_s, "comma list of d");
  sc_phase->add_option("--ns", ns_s, "comma list of n");
  add_common(sc_phase);

  CLI::App* sc_bounds = app.add_subcommand("bounds", "sample-complexity calculators");
  sc_bounds->add_option("--kstar", kstar);
  sc_bounds->add_option("--lambda", lambda);
  sc_bounds->add_option("--D", D);
  sc_bounds->add_option("--r", r);
  sc_bounds->add_option("--dims", dims_s, "comma list of d");
  sc_bounds->add_option("--deltas", deltas_s, "comma list of delta");
  add_common(sc_bounds);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    com.load(sub->get_name(), sub);
    // Config file may also supply experiment parameters.
    const std::string sec = sub->get_name();
    auto cfgd = [&](const char* flag, const char* key, auto& slot) {
      if (flag_count(sub, flag) == 0 && com.cfg.has(sec + "." + key))
        slot = static_cast<std::decay_t<decltype(slot)>>(
            com.cfg.get_double(sec + "." + key, static_cast<double>(slot)));
    };
    if (flag_count(sub, "--link") == 0 && com.cfg.has(sec + ".link"))
      link = com.cfg.get(sec + ".link");
    if (flag_count(sub, "--noise") == 0 && com.cfg.has(sec + ".noise"))
      noise = com.cfg.get(sec + ".noise");
    cfgd("--d", "d", d);
    cfgd("--n", "n", n);
    cfgd("--k", "k", k);
    cfgd("--kmax", "kmax", kmax);
    cfgd("--K", "K", K);
    cfgd("--M", "M", M);
    cfgd("--L", "L", L);
    cfgd("--kstar", "kstar", kstar);
    cfgd("--tau", "tau", tau);
    cfgd("--eps", "eps", eps);
    cfgd("--lambda", "lambda", lambda);
    cfgd("--D", "D", D);
    cfgd("--r", "r", r);
    cfgd("--zeta-grid", "zeta_grid", zeta_grid);
    if (flag_count(sub, "--deltas") == 0 && com.cfg.has(sec + ".deltas"))
      deltas_s = com.cfg.get(sec + ".deltas");
    if (flag_count(sub, "--dims") == 0 && com.cfg.has(sec + ".dims"))
      dims_s = com.cfg.get(sec + ".dims");
    if (flag_count(sub, "--ns") == 0 && com.cfg.has(sec + ".ns"))
      ns_s = com.cfg.get(sec + ".ns");

    if (sub == sc_sample) return cmd_sample(com, link, noise, d, n);
    if (sub == sc_exp) return cmd_exponent(com, link, noise, kmax, n_mc, zeta_grid);
    if (sub == sc_rec) return cmd_recover(com, link, noise, k, d, n);
    if (sub == sc_agn) return cmd_agnostic(com, link, noise, d, n, K, M, L);
    if (sub == sc_forge) return cmd_forge(com, kstar, tau, eps);
    if (sub == sc_bbp)
      return cmd_bbp_sweep(com, link, k, d, parse_double_list(deltas_s));
    if (sub == sc_phase)
      return cmd_phase_sweep(com, link, k, parse_double_list(dims_s),
                             parse_double_list(ns_s));
    if (sub == sc_bounds)
      return cmd_bounds(com, kstar, lambda, D, r, parse_double_list(dims_s),
                        parse_double_list(deltas_s));
    throw ConfigError("unhandled subcommand");
  } catch (const VerificationFailure& e) {
    std::fprintf(stderr, "verification failure: %s\n", e.what());
    return 4;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
