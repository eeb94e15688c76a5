// Planted Gaussian single-index models: link functions, noise channels,
// deterministic sampling, and the dataset CSV format.
#ifndef SINDEX_MODEL_HPP
#define SINDEX_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "sindex/hermite.hpp"
#include "sindex/rng.hpp"

namespace sindex {

/// Piecewise-linear table for a forged link; constant outside its domain.
struct TabulatedLink {
  std::vector<double> xs;  // strictly increasing
  std::vector<double> ys;
  double left_value = 1.0;   // value for x < xs.front()
  double right_value = 1.0;  // value for x > xs.back()

  double eval(double x) const {
    if (xs.empty()) throw std::invalid_argument("TabulatedLink: empty table");
    if (x <= xs.front()) return left_value;
    if (x >= xs.back()) return right_value;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    size_t i = static_cast<size_t>(it - xs.begin());
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
  }
};

enum class LinkKind {
  kIdentity,
  kHermite,       // h_j (normalized)
  kSquareGauss,   // z^2 e^{-z^2}
  kCosine,        // cos(2 pi gamma z)
  kHermiteSeries,
  kTabulated,
  kCallback,  // arbitrary smooth evaluator (e.g. a freshly forged link)
};

struct LinkFunction {
  LinkKind kind = LinkKind::kIdentity;
  int degree = 0;                     // hermite variant
  double gamma = 1.0;                 // cosine variant
  std::vector<double> series;         // hermite-series: beta_j, j = 0..
  std::shared_ptr<TabulatedLink> table;
  std::shared_ptr<std::function<double(double)>> fn;

  static LinkFunction identity() { return {}; }
  static LinkFunction hermite(int j) {
    LinkFunction f;
    f.kind = LinkKind::kHermite;
    f.degree = j;
    return f;
  }
  static LinkFunction square_gauss() {
    LinkFunction f;
    f.kind = LinkKind::kSquareGauss;
    return f;
  }
  static LinkFunction cosine(double g) {
    LinkFunction f;
    f.kind = LinkKind::kCosine;
    f.gamma = g;
    return f;
  }
  static LinkFunction hermite_series(std::vector<double> beta) {
    LinkFunction f;
    f.kind = LinkKind::kHermiteSeries;
    f.series = std::move(beta);
    return f;
  }
  static LinkFunction tabulated(std::shared_ptr<TabulatedLink> t) {
    LinkFunction f;
    f.kind = LinkKind::kTabulated;
    f.table = std::move(t);
    return f;
  }
  static LinkFunction callback(std::function<double(double)> g) {
    LinkFunction f;
    f.kind = LinkKind::kCallback;
    f.fn = std::make_shared<std::function<double(double)>>(std::move(g));
    return f;
  }

  double eval(double z) const {
    switch (kind) {
      case LinkKind::kIdentity:
        return z;
      case LinkKind::kHermite:
        return hermite_normalized(degree, z);
      case LinkKind::kSquareGauss:
        return z * z * std::exp(-z * z);
      case LinkKind::kCosine:
        return std::cos(2.0 * M_PI * gamma * z);
      case LinkKind::kHermiteSeries: {
        double s = 0.0;
        for (size_t j = 0; j < series.size(); ++j)
          if (series[j] != 0.0)
            s += series[j] * hermite_normalized(static_cast<int>(j), z);
        return s;
      }
      case LinkKind::kTabulated:
        return table->eval(z);
      case LinkKind::kCallback:
        return (*fn)(z);
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case LinkKind::kIdentity:
        return "identity";
      case LinkKind::kHermite:
        return "hermite(" + std::to_string(degree) + ")";
      case LinkKind::kSquareGauss:
        return "square-gauss";
      case LinkKind::kCosine:
        return "cosine(" + std::to_string(gamma) + ")";
      case LinkKind::kHermiteSeries:
        return "hermite-series";
      case LinkKind::kTabulated:
        return "tabulated";
      case LinkKind::kCallback:
        return "callback";
    }
    return "?";
  }
};

inline double eval_link(const LinkFunction& link, double z) { return link.eval(z); }

enum class NoiseKind {
  kDeterministic,
  kAdditiveGaussian,
  kMultiplicativeGaussian,
  kMixture,
  kMassart,
};

/// 1-d laws available to the mixture channel.
struct ScalarLaw {
  enum class Kind { kGaussian, kUniform, kPointMass } kind = Kind::kPointMass;
  double a = 0.0;  // mean / lower / value
  double b = 1.0;  // stddev / upper

  double draw(CounterRng& rng) const {
    switch (kind) {
      case Kind::kGaussian:
        return a + b * rng.next_gaussian();
      case Kind::kUniform:
        return a + (b - a) * rng.next_uniform();
      case Kind::kPointMass:
        return a;
    }
    return a;
  }
  static ScalarLaw gaussian(double mu, double sd) { return {Kind::kGaussian, mu, sd}; }
  static ScalarLaw uniform(double lo, double hi) { return {Kind::kUniform, lo, hi}; }
  static ScalarLaw point_mass(double c) { return {Kind::kPointMass, c, 0.0}; }
};

struct NoiseChannel {
  NoiseKind kind = NoiseKind::kDeterministic;
  double tau = 0.0;            // additive stddev
  ScalarLaw mu1, mu2;          // mixture components (z >= 0 / z < 0)
  double massart_rate = 0.0;   // constant flip rate in [0, 1/2)

  static NoiseChannel deterministic() { return {}; }
  static NoiseChannel additive_gaussian(double tau) {
    NoiseChannel c;
    c.kind = NoiseKind::kAdditiveGaussian;
    if (tau < 0) throw std::invalid_argument("additive noise: tau < 0");
    c.tau = tau;
    return c;
  }
  static NoiseChannel multiplicative_gaussian() {
    NoiseChannel c;
    c.kind = NoiseKind::kMultiplicativeGaussian;
    return c;
  }
  static NoiseChannel mixture(ScalarLaw m1, ScalarLaw m2) {
    NoiseChannel c;
    c.kind = NoiseKind::kMixture;
    c.mu1 = m1;
    c.mu2 = m2;
    return c;
  }
  static NoiseChannel massart(double rate) {
    NoiseChannel c;
    c.kind = NoiseKind::kMassart;
    if (rate < 0 || rate >= 0.5) throw std::invalid_argument("massart rate outside [0, 1/2)");
    c.massart_rate = rate;
    return c;
  }

  /// Label given the projection z and link value sigma(z).
  double apply(double z, double sig, CounterRng& rng) const {
    switch (kind) {
      case NoiseKind::kDeterministic:
        return sig;
      case NoiseKind::kAdditiveGaussian:
        return sig + tau * rng.next_gaussian();
      case NoiseKind::kMultiplicativeGaussian:
        return sig * rng.next_gaussian();
      case NoiseKind::kMixture:
        return z >= 0 ? mu1.draw(rng) : mu2.draw(rng);
      case NoiseKind::kMassart:
        return rng.next_uniform() < massart_rate ? -sig : sig;
    }
    return sig;
  }

  std::string name() const {
    switch (kind) {
      case NoiseKind::kDeterministic:
        return "deterministic";
      case NoiseKind::kAdditiveGaussian:
        return "additive-gaussian(" + std::to_string(tau) + ")";
      case NoiseKind::kMultiplicativeGaussian:
        return "multiplicative-gaussian";
      case NoiseKind::kMixture:
        return "mixture";
      case NoiseKind::kMassart:
        return "massart(" + std::to_string(massart_rate) + ")";
    }
    return "?";
  }
};

struct ModelSpec {
  int d = 1;
  Eigen::VectorXd w_star;  // empty: drawn uniformly from the sphere at sampling
  LinkFunction link;
  NoiseChannel noise;
  uint64_t seed = 0;

  /// Resolved hidden direction (draws one if absent), deterministic in seed.
  Eigen::VectorXd resolve_direction() const {
    if (w_star.size() > 0) {
      if (w_star.size() != d) throw std::invalid_argument("ModelSpec: w_star dim mismatch");
      if (std::abs(w_star.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("ModelSpec: w_star not unit");
      return w_star;
    }
    CounterRng rng(mix_seed(seed, kDirectionTag), 0);
    Eigen::VectorXd w(d);
    for (int i = 0; i < d; ++i) w(i) = rng.next_gaussian();
    w.normalize();
    return w;
  }

  /// FNV-1a digest over the printable description; identifies the model in
  /// dataset headers.
  uint64_t digest() const {
    std::ostringstream os;
    os << "d=" << d << ";link=" << link.name() << ";noise=" << noise.name()
       << ";seed=" << seed << ";w=";
    if (w_star.size() > 0) {
      char buf[32];
      for (int i = 0; i < w_star.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,", w_star(i));
        os << buf;
      }
    }
    const std::string s = os.str();
    uint64_t h = 1469598103934665603ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  static constexpr uint64_t kDirectionTag = 0x77737461ull;  // "wsta"
};

struct Dataset {
  int d = 0;
  Eigen::Index n = 0;
  Eigen::MatrixXd X;  // n x d
  Eigen::VectorXd y;  // n
  uint64_t seed = 0;
  uint64_t model_digest = 0;
};

/// Draws n samples; per-row counter-based streams keyed by (seed, i) make
/// the output bit-identical for any thread count.
inline Dataset sample_dataset(const ModelSpec& model, Eigen::Index n, uint64_t seed,
                              int threads = 1) {
  if (n < 1 || model.d < 1) throw std::invalid_argument("sample_dataset: need n >= 1, d >= 1");
  Dataset ds;
  ds.d = model.d;
  ds.n = n;
  ds.seed = seed;
  ds.model_digest = model.digest();
  ds.X.resize(n, model.d);
  ds.y.resize(n);
  const Eigen::VectorXd w = model.resolve_direction();
  auto fill_rows = [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index i = lo; i < hi; ++i) {
      CounterRng rng(seed, static_cast<uint64_t>(i));
      double z = 0.0;
      for (int j = 0; j < model.d; ++j) {
        const double g = rng.next_gaussian();
        ds.X(i, j) = g;
        z += g * w(j);
      }
      ds.y(i) = model.noise.apply(z, model.link.eval(z), rng);
    }
  };
  threads = std::max(1, threads);
  if (threads == 1 || n < 2 * threads) {
    fill_rows(0, n);
  } else {
    std::vector<std::thread> pool;
    const Eigen::Index chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const Eigen::Index lo = std::min<Eigen::Index>(n, t * chunk);
      const Eigen::Index hi = std::min<Eigen::Index>(n, lo + chunk);
      if (lo < hi) pool.emplace_back(fill_rows, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return ds;
}

inline void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(ds.model_digest));
  out << "# sindex-v1 d=" << ds.d << " n=" << ds.n << " seed=" << ds.seed
      << " model=" << buf << "\n";
  char num[32];
  for (Eigen::Index i = 0; i < ds.n; ++i) {
    for (int j = 0; j < ds.d; ++j) {
      std::snprintf(num, sizeof num, "%.17g", ds.X(i, j));
      out << num << ',';
    }
    std::snprintf(num, sizeof num, "%.17g", ds.y(i));
    out << num << '\n';
  }
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header;
  std::getline(in, header);
  Dataset ds;
  unsigned long long seed = 0, model = 0;
  long long n = 0;
  if (std::sscanf(header.c_str(), "# sindex-v1 d=%d n=%lld seed=%llu model=%llx",
                  &ds.d, &n, &seed, &model) != 4)
    throw std::runtime_error("bad dataset header: " + header);
  ds.n = static_cast<Eigen::Index>(n);
  ds.seed = seed;
  ds.model_digest = model;
  ds.X.resize(ds.n, ds.d);
  ds.y.resize(ds.n);
  std::string line;
  for (Eigen::Index i = 0; i < ds.n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("dataset truncated");
    std::stringstream ss(line);
    std::string cell;
    for (int j = 0; j <= ds.d; ++j) {
      if (!std::getline(ss, cell, ',')) throw std::runtime_error("short row in dataset");
      const double v = std::stod(cell);
      if (!std::isfinite(v)) throw std::runtime_error("non-finite entry in dataset");
      if (j < ds.d)
        ds.X(i, j) = v;
      else
        ds.y(i) = v;
    }
    if (std::getline(ss, cell, ',')) throw std::runtime_error("long row in dataset");
  }
  return ds;
}

}  // namespace sindex

#endif  // SINDEX_MODEL_HPP
