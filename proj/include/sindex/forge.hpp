// Link forge: constructs smooth bounded links with prescribed generative
// exponent k*. Level-set points start at perturbed He_{k*} roots, evolve
// under x_i'(t) = v(x)_i / gamma(x_i) (which freezes Z_k for k < k* and
// moves Z_{k*}), and the inverse trajectories assembled through a mollifier
// give sigma(x) = f(|t(x)| / tau).
#ifndef SINDEX_FORGE_HPP
#define SINDEX_FORGE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sindex/exponent.hpp"
#include "sindex/hermite.hpp"
#include "sindex/model.hpp"
#include "sindex/rng.hpp"

namespace sindex {

/// Level-set trajectories over t in [-tau, tau] with the conserved sums
/// Z_k(t) = sum_i He_{k-1}(x_i(t)) gamma(x_i(t)), k = 1..kstar.
struct TrajectoryBundle {
  int kstar = 0;
  double tau = 0;
  std::vector<double> times;                   // ascending, includes 0
  std::vector<std::vector<double>> positions;  // times.size() x kstar
  std::vector<std::vector<double>> conserved;  // times.size() x kstar

  /// max_t |Z_k(t) - Z_k(0)|.
  double drift(int k) const {
    size_t t0 = 0;
    while (times[t0] != 0.0) ++t0;
    double m = 0;
    for (size_t t = 0; t < times.size(); ++t)
      m = std::max(m, std::abs(conserved[t][static_cast<size_t>(k - 1)] -
                               conserved[t0][static_cast<size_t>(k - 1)]));
    return m;
  }

  /// Z_{kstar}(tau) - Z_{kstar}(-tau): the quantity the flow is built to move.
  double witness_gap() const {
    return conserved.back()[static_cast<size_t>(kstar - 1)] -
           conserved.front()[static_cast<size_t>(kstar - 1)];
  }
};

namespace forge_detail {

inline double gauss_density(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

inline std::vector<double> conserved_row(const std::vector<double>& x, int kstar) {
  std::vector<double> Z(static_cast<size_t>(kstar), 0.0);
  for (double xi : x) {
    const double g = gauss_density(xi);
    for (int k = 1; k <= kstar; ++k)
      Z[static_cast<size_t>(k - 1)] += hermite_unnormalized(k - 1, xi) * g;
  }
  return Z;
}

/// ODE right-hand side; throws if the configuration degenerates.
inline std::vector<double> rhs(const std::vector<double>& x) {
  PointConfig cfg(x);  // throws on coincident points
  std::vector<double> v = vandermonde_weights(cfg);
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(v[i] > 0)) throw std::runtime_error("level ODE: v component lost positivity");
    v[i] /= gauss_density(x[i]);
  }
  return v;
}

}  // namespace forge_detail

/// Perturbed He_{kstar} roots with |Q| > 1e-8 and all v > 0 (up to 100
/// jitter draws; the unperturbed roots have Q = 0 exactly).
inline PointConfig init_level_points(int kstar, double eps, uint64_t seed) {
  if (kstar < 2 || kstar > 10)
    throw std::invalid_argument("init_level_points: 2 <= kstar <= 10");
  const QuadratureRule rule = gauss_hermite_rule(kstar);
  CounterRng rng(mix_seed(seed, 0x666f726765ull), 0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<double> pts = rule.nodes;
    for (double& p : pts) p += eps * (2.0 * rng.next_uniform() - 1.0);
    std::sort(pts.begin(), pts.end());
    try {
      PointConfig cfg(pts);
      if (std::abs(sym_poly_Q(cfg)) <= 1e-8) continue;
      std::vector<double> v = vandermonde_weights(cfg);
      if (std::any_of(v.begin(), v.end(), [](double w) { return !(w > 0); })) continue;
      return cfg;
    } catch (const std::invalid_argument&) {
      continue;
    }
  }
  throw std::runtime_error("init_level_points: resampling exhausted (increase eps)");
}

/// Classical RK4 on the coupled level ODE, integrating from t=0 out to
/// +tau and -tau. Ordering or positivity failure halves tau and restarts,
/// down to a floor of 1e-4.
inline TrajectoryBundle integrate_level_ode(const PointConfig& x0, double tau,
                                            double h = 0.0) {
  if (!(tau > 0)) throw std::invalid_argument("integrate_level_ode: tau > 0");
  const int kstar = static_cast<int>(x0.points.size());

  for (; tau >= 1e-4; tau /= 2) {
    const double step = h > 0 ? std::min(h, tau / 16) : tau / 2000;
    const int nsteps = static_cast<int>(std::ceil(tau / step));
    TrajectoryBundle bundle;
    bundle.kstar = kstar;
    bundle.tau = tau;
    bool ok = true;

    // dir = +1 rows are appended in order; dir = -1 rows are collected and
    // reversed so times end up ascending with t=0 stored once.
    std::vector<double> rev_times;
    std::vector<std::vector<double>> rev_pos, rev_con;
    for (int dir : {-1, +1}) {
      std::vector<double> x = x0.points;
      std::vector<std::vector<double>*> dst;
      auto record = [&](double t, const std::vector<double>& xs) {
        if (dir > 0) {
          bundle.times.push_back(t);
          bundle.positions.push_back(xs);
          bundle.conserved.push_back(forge_detail::conserved_row(xs, kstar));
        } else if (t != 0.0) {
          rev_times.push_back(t);
          rev_pos.push_back(xs);
          rev_con.push_back(forge_detail::conserved_row(xs, kstar));
        }
      };
      record(0.0, x);
      try {
        for (int s = 1; s <= nsteps; ++s) {
          const double hh = dir * std::min(step, tau - (s - 1) * step);
          std::vector<double> k1 = forge_detail::rhs(x);
          std::vector<double> x2(x), x3(x), x4(x);
          for (size_t i = 0; i < x.size(); ++i) x2[i] += 0.5 * hh * k1[i];
          std::vector<double> k2 = forge_detail::rhs(x2);
          for (size_t i = 0; i < x.size(); ++i) x3[i] += 0.5 * hh * k2[i];
          std::vector<double> k3 = forge_detail::rhs(x3);
          for (size_t i = 0; i < x.size(); ++i) x4[i] += hh * k3[i];
          std::vector<double> k4 = forge_detail::rhs(x4);
          for (size_t i = 0; i < x.size(); ++i)
            x[i] += hh / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
          for (size_t i = 0; i + 1 < x.size(); ++i)
            if (!(x[i] < x[i + 1]))
              throw std::runtime_error("level ODE: trajectories crossed");
          forge_detail::rhs(x);  // positivity check at the accepted point
          record(dir * std::min(s * step, tau), x);
        }
      } catch (const std::exception&) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (size_t r = rev_times.size(); r-- > 0;) {
      bundle.times.insert(bundle.times.begin(), 0);
      bundle.positions.insert(bundle.positions.begin(), std::vector<double>());
      bundle.conserved.insert(bundle.conserved.begin(), std::vector<double>());
    }
    for (size_t r = 0; r < rev_times.size(); ++r) {
      bundle.times[r] = rev_times[rev_times.size() - 1 - r];
      bundle.positions[r] = rev_pos[rev_times.size() - 1 - r];
      bundle.conserved[r] = rev_con[rev_times.size() - 1 - r];
    }
    return bundle;
  }
  throw std::runtime_error("integrate_level_ode: tau floor reached");
}

/// f(x) = (1/Z) int_0^x exp(-1/(s(1-s))) ds: strictly increasing with all
/// derivatives vanishing at 0 and 1.
class Mollifier {
 public:
  Mollifier() {
    gl_nodes_.resize(16);
    gl_weights_.resize(16);
    {
      std::vector<long double> xs, ws;
      detail::gauss_legendre(16, xs, ws);
      for (int i = 0; i < 16; ++i) {
        gl_nodes_[static_cast<size_t>(i)] = static_cast<double>(xs[static_cast<size_t>(i)]);
        gl_weights_[static_cast<size_t>(i)] = static_cast<double>(ws[static_cast<size_t>(i)]);
      }
    }
    cum_.assign(kPanels + 1, 0.0);
    for (int p = 0; p < kPanels; ++p)
      cum_[static_cast<size_t>(p + 1)] =
          cum_[static_cast<size_t>(p)] +
          panel(static_cast<double>(p) / kPanels, static_cast<double>(p + 1) / kPanels);
    z_ = cum_.back();
  }

  double operator()(double x) const {
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    const int p = std::min(kPanels - 1, static_cast<int>(x * kPanels));
    return (cum_[static_cast<size_t>(p)] +
            panel(static_cast<double>(p) / kPanels, x)) /
           z_;
  }

  double normalization() const { return z_; }

 private:
  static constexpr int kPanels = 512;
  static double bump(double s) {
    if (s <= 0 || s >= 1) return 0.0;
    return std::exp(-1.0 / (s * (1.0 - s)));
  }
  double panel(double a, double b) const {
    double acc = 0;
    const double c = (a + b) / 2, r = (b - a) / 2;
    for (size_t i = 0; i < gl_nodes_.size(); ++i)
      acc += gl_weights_[i] * bump(c + r * gl_nodes_[i]);
    return acc * r;
  }
  std::vector<double> gl_nodes_, gl_weights_;
  std::vector<double> cum_;
  double z_ = 1.0;
};

/// Assembled sigma: per-branch monotone inverse x -> t by cubic
/// interpolation of the recorded trajectory, plateau value 1 elsewhere.
struct LinkTable {
  int kstar = 0;
  double tau = 0;
  std::vector<double> xs;  // dense merged sample grid
  std::vector<double> ys;
  std::vector<std::array<double, 2>> branch_images;  // [x_i(-tau), x_i(tau)]
  std::function<double(double)> smooth;              // assembled sigma(x)

  LinkFunction as_tabulated() const {
    auto t = std::make_shared<TabulatedLink>();
    t->xs = xs;
    t->ys = ys;
    t->left_value = t->right_value = 1.0;
    return LinkFunction::tabulated(std::move(t));
  }
  LinkFunction as_callback() const { return LinkFunction::callback(smooth); }
};

namespace forge_detail {

/// t(x) on one branch by 4-point Lagrange interpolation of the recorded
/// (x_i(t_m), t_m) pairs; t is smooth in x, |t| is taken afterwards.
inline double inverse_time(const std::vector<double>& bx, const std::vector<double>& bt,
                           double x) {
  const size_t n = bx.size();
  size_t j = static_cast<size_t>(std::upper_bound(bx.begin(), bx.end(), x) - bx.begin());
  size_t lo = j >= 2 ? j - 2 : 0;
  if (lo + 4 > n) lo = n - 4;
  double acc = 0;
  for (size_t a = lo; a < lo + 4; ++a) {
    double term = bt[a];
    for (size_t b = lo; b < lo + 4; ++b)
      if (b != a) term *= (x - bx[b]) / (bx[a] - bx[b]);
    acc += term;
  }
  return acc;
}

}  // namespace forge_detail

inline LinkTable assemble_link(const TrajectoryBundle& bundle,
                               int samples_per_branch = 4096) {
  const int n = bundle.kstar;
  const size_t T = bundle.times.size();
  if (T < 4) throw std::invalid_argument("assemble_link: trajectory too short");

  auto branch_x = std::make_shared<std::vector<std::vector<double>>>();
  auto branch_t = std::make_shared<std::vector<std::vector<double>>>();
  LinkTable table;
  table.kstar = n;
  table.tau = bundle.tau;
  for (int i = 0; i < n; ++i) {
    std::vector<double> bx(T), bt(T);
    for (size_t m = 0; m < T; ++m) {
      bx[m] = bundle.positions[m][static_cast<size_t>(i)];
      bt[m] = bundle.times[m];
    }
    for (size_t m = 0; m + 1 < T; ++m)
      if (!(bx[m] < bx[m + 1]))
        throw std::runtime_error("assemble_link: branch not monotone");
    table.branch_images.push_back({bx.front(), bx.back()});
    branch_x->push_back(std::move(bx));
    branch_t->push_back(std::move(bt));
  }
  for (int i = 0; i + 1 < n; ++i)
    if (!(table.branch_images[static_cast<size_t>(i)][1] <
          table.branch_images[static_cast<size_t>(i + 1)][0]))
      throw std::runtime_error("assemble_link: branch images overlap (shrink tau)");

  auto moll = std::make_shared<Mollifier>();
  const double tau = bundle.tau;
  table.smooth = [branch_x, branch_t, moll, tau, n](double x) {
    for (int i = 0; i < n; ++i) {
      const auto& bx = (*branch_x)[static_cast<size_t>(i)];
      if (x < bx.front() || x > bx.back()) continue;
      const double t =
          forge_detail::inverse_time(bx, (*branch_t)[static_cast<size_t>(i)], x);
      return (*moll)(std::abs(t) / tau);
    }
    return 1.0;  // plateau outside every branch image
  };

  // Dense table: per branch, equally spaced samples with exact-1 endpoints;
  // one midpoint between consecutive branches keeps the plateau explicit.
  for (int i = 0; i < n; ++i) {
    const auto& img = table.branch_images[static_cast<size_t>(i)];
    if (i > 0) {
      table.xs.push_back((table.branch_images[static_cast<size_t>(i - 1)][1] + img[0]) / 2);
      table.ys.push_back(1.0);
    }
    for (int s = 0; s < samples_per_branch; ++s) {
      const double x = img[0] + (img[1] - img[0]) * s / (samples_per_branch - 1);
      table.xs.push_back(x);
      table.ys.push_back(s == 0 || s == samples_per_branch - 1 ? 1.0 : table.smooth(x));
    }
  }
  return table;
}

struct ForgeParams {
  double tau = 0.3;
  double eps = 0.05;
  double h = 0.0;  // 0: tau/2000
  int samples_per_branch = 4096;
  uint64_t seed = 1;
  double lambda_low = 1e-6;   // required bound on lambda_k, k < kstar
  double lambda_high = 1e-4;  // required lambda_kstar
};

struct ForgeResult {
  LinkTable table;
  TrajectoryBundle bundle;
  SpectralProfile profile;
  bool verified = false;
};

/// Full pipeline with quadrature verification of the generative exponent.
/// A profile that misses the thresholds raises with the measured values.
inline ForgeResult forge_link(int kstar, const ForgeParams& params = {}) {
  if (kstar < 3 || kstar > 8) throw std::invalid_argument("forge_link: 3 <= kstar <= 8");
  ForgeResult out;
  const PointConfig x0 = init_level_points(kstar, params.eps, params.seed);
  out.bundle = integrate_level_ode(x0, params.tau, params.h);
  out.table = assemble_link(out.bundle, params.samples_per_branch);

  LambdaOptions opt;
  out.profile = lambda_coeffs_quadrature(out.table.as_callback(), kstar, opt);
  bool ok = out.profile.lambda[static_cast<size_t>(kstar - 1)] > params.lambda_high;
  for (int k = 1; k < kstar; ++k)
    ok = ok && out.profile.lambda[static_cast<size_t>(k - 1)] < params.lambda_low;
  out.verified = ok;
  if (!ok) {
    std::ostringstream msg;
    msg << "forge_link: verification failed for kstar=" << kstar << "; lambda =";
    for (int k = 1; k <= kstar; ++k)
      msg << " " << static_cast<double>(out.profile.lambda[static_cast<size_t>(k - 1)]);
    throw std::runtime_error(msg.str());
  }
  return out;
}

/// CSV artifact: structured comment header plus `x,sigma(x)` rows, readable
/// back as a tabulated link via read_forged_csv.
inline void write_forged_csv(const std::string& path, const ForgeResult& res,
                             const ForgeParams& params) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_forged_csv: cannot open " + path);
  f << "# forged-link-v1 kstar=" << res.table.kstar << " tau=" << res.table.tau
    << " eps=" << params.eps << " seed=" << params.seed << "\n";
  f << "# lambda =";
  f.precision(12);
  for (int k = 1; k <= res.table.kstar; ++k)
    f << " " << static_cast<double>(res.profile.lambda[static_cast<size_t>(k - 1)]);
  f << "\n# verified = " << (res.verified ? "yes" : "no") << "\n";
  f << "x,sigma\n";
  f.precision(17);
  for (size_t i = 0; i < res.table.xs.size(); ++i)
    f << res.table.xs[i] << "," << res.table.ys[i] << "\n";
}

inline LinkFunction read_forged_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_forged_csv: cannot open " + path);
  auto t = std::make_shared<TabulatedLink>();
  t->left_value = t->right_value = 1.0;
  std::string line;
  bool saw_header = false;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# forged-link-v1", 0) == 0) saw_header = true;
      continue;
    }
    if (line == "x,sigma") continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("read_forged_csv: malformed row: " + line);
    // std::stod rejects subnormals (ERANGE); the mollifier underflows near
    // branch ends, so parse with strtod and only require a conversion.
    auto parse = [&](const std::string& tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str())
        throw std::runtime_error("read_forged_csv: malformed row: " + line);
      return v;
    };
    t->xs.push_back(parse(line.substr(0, comma)));
    t->ys.push_back(parse(line.substr(comma + 1)));
  }
  if (!saw_header) throw std::runtime_error("read_forged_csv: missing forged-link-v1 header");
  if (t->xs.size() < 2) throw std::runtime_error("read_forged_csv: empty table");
  return LinkFunction::tabulated(std::move(t));
}

}  // namespace sindex

#endif  // SINDEX_FORGE_HPP
