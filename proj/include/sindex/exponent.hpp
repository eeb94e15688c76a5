// Information / generative exponent oracle: beta_k by Gauss-Hermite
// quadrature, zeta_k and lambda_k by level-set (coarea) integration, and a
// binned conditional-moment estimator for noisy channels.
//
// Numerical scheme for lambda_k on deterministic links: decompose the link
// into monotone branches and plateaus on a clipped domain, then integrate
//   lambda_k^2 = int num_k(y)^2 / den(y) dy + sum_atoms mass * zeta_k^2,
//   num_k(y) = sum_roots h_k(z) gamma(z)/|sigma'(z)|,  den = sum_roots w,
// in long double with panels refined geometrically toward critical values.
// The positive-form y-integral keeps the k < k* cancellations local to a
// single level set, which is what makes lambda ~ 1e-12 resolvable.
#ifndef SINDEX_EXPONENT_HPP
#define SINDEX_EXPONENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "sindex/hermite.hpp"
#include "sindex/model.hpp"
#include "sindex/rng.hpp"

namespace sindex {

using Real = long double;

struct SpectralProfile {
  int kmax = 0;
  std::vector<double> beta;        // beta[k-1] = beta_k
  std::vector<double> lambda;      // lambda[k-1] = lambda_k >= 0
  std::vector<double> lambda_sq;   // raw (possibly negative) estimates
  std::vector<double> lambda_se;   // standard errors (binned route only)
  std::vector<bool> beta_converged;
  std::vector<bool> lambda_converged;
  int info_exponent = 0;  // 0 means "none <= kmax"
  int gen_exponent = 0;
  double tol = 1e-6;
  std::string method;
};

struct LevelRoot {
  double z;
  int slope_sign;
  double weight;  // gamma(z)/|sigma'(z)|
};

struct LevelSet {
  double y;
  std::vector<LevelRoot> roots;
};

namespace detail {

inline Real gauss_density(Real z) {
  return std::exp(-z * z / 2) / std::sqrt(2 * static_cast<Real>(M_PI));
}

/// He_k in long double (separate from the double-precision kernel so the
/// level-set cancellations are resolved to ~1e-18).
inline Real hermite_ld(int k, Real z) {
  if (k == 0) return 1.0L;
  Real prev = 1.0L, cur = z;
  for (int j = 1; j < k; ++j) {
    Real next = z * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Closed-form link derivative where available; centered difference for
/// tabulated links (kink noise is far below their verification tolerance).
inline Real link_deriv(const LinkFunction& link, Real z) {
  switch (link.kind) {
    case LinkKind::kIdentity:
      return 1.0L;
    case LinkKind::kHermite:
      return link.degree == 0
                 ? 0.0L
                 : std::sqrt(static_cast<Real>(link.degree)) *
                       hermite_ld(link.degree - 1, z) /
                       std::sqrt(static_cast<Real>(factorial(link.degree - 1)));
    case LinkKind::kSquareGauss:
      return 2 * z * (1 - z * z) * std::exp(-z * z);
    case LinkKind::kCosine:
      return -2 * static_cast<Real>(M_PI) * link.gamma *
             std::sin(2 * static_cast<Real>(M_PI) * link.gamma * z);
    case LinkKind::kHermiteSeries: {
      Real s = 0.0L;
      for (size_t j = 1; j < link.series.size(); ++j)
        if (link.series[j] != 0.0)
          s += link.series[j] * std::sqrt(static_cast<Real>(j)) *
               hermite_ld(static_cast<int>(j) - 1, z) /
               std::sqrt(static_cast<Real>(factorial(static_cast<int>(j) - 1)));
      return s;
    }
    case LinkKind::kTabulated:
    case LinkKind::kCallback: {
      const Real h = 1e-6L;
      return (static_cast<Real>(link.eval(static_cast<double>(z + h))) -
              static_cast<Real>(link.eval(static_cast<double>(z - h)))) /
             (2 * h);
    }
  }
  return 0.0L;
}

inline Real link_eval(const LinkFunction& link, Real z) {
  switch (link.kind) {
    case LinkKind::kIdentity:
      return z;
    case LinkKind::kSquareGauss:
      return z * z * std::exp(-z * z);
    case LinkKind::kHermite:
      return hermite_ld(link.degree, z) /
             std::sqrt(static_cast<Real>(factorial(link.degree)));
    case LinkKind::kCosine:
      return std::cos(2 * static_cast<Real>(M_PI) * link.gamma * z);
    default:
      return static_cast<Real>(link.eval(static_cast<double>(z)));
  }
}

struct Branch {
  Real zlo, zhi;    // monotone piece of the link
  Real ylo, yhi;    // link values at the endpoints, sorted
  int slope_sign;   // +1 increasing, -1 decreasing
};

struct Plateau {
  Real zlo, zhi;
  Real value;
  bool open_left = false;   // extends to -inf (tabulated tail)
  bool open_right = false;  // extends to +inf
};

struct BranchDecomposition {
  std::vector<Branch> branches;
  std::vector<Plateau> plateaus;
};

/// Split the link into monotone branches and flat plateaus on [lo, hi]
/// using a uniform classification grid plus critical-point refinement.
inline BranchDecomposition build_branches(const LinkFunction& link, Real lo, Real hi,
                                          int grid) {
  BranchDecomposition out;
  std::vector<Real> zs(static_cast<size_t>(grid) + 1);
  std::vector<Real> ys(zs.size());
  for (size_t i = 0; i < zs.size(); ++i) {
    zs[i] = lo + (hi - lo) * static_cast<Real>(i) / grid;
    ys[i] = link_eval(link, zs[i]);
  }
  // Classify cells: +1 / -1 / 0 (flat). Flatness is relative — decaying
  // tails have tiny absolute increments but carry dominant level-set
  // weight gamma/|sigma'| and must stay monotone branches.
  auto cls = [&](size_t i) -> int {
    const Real dy = ys[i + 1] - ys[i];
    if (dy == 0.0L ||
        std::abs(dy) <= 1e-15L * std::max(std::abs(ys[i]), std::abs(ys[i + 1])))
      return 0;
    return dy > 0 ? 1 : -1;
  };
  // Locate a derivative sign change inside [a,b] by bisection.
  auto refine_critical = [&](Real a, Real b) -> Real {
    Real da = link_deriv(link, a);
    for (int it = 0; it < 90 && b - a > 1e-16L * std::max(1.0L, std::abs(a)); ++it) {
      const Real m = (a + b) / 2;
      const Real dm = link_deriv(link, m);
      if ((da >= 0) == (dm >= 0)) {
        a = m;
        da = dm;
      } else {
        b = m;
      }
    }
    return (a + b) / 2;
  };

  size_t i = 0;
  while (i < static_cast<size_t>(grid)) {
    const int c = cls(i);
    size_t j = i;
    while (j < static_cast<size_t>(grid) && cls(j) == c) ++j;
    Real a = zs[i], b = zs[j];
    if (c == 0) {
      Plateau p;
      p.zlo = a;
      p.zhi = b;
      p.value = ys[(i + j) / 2];
      if (i == 0 && (link.kind == LinkKind::kTabulated ||
                     link.kind == LinkKind::kCallback))
        p.open_left = true;
      if (j == static_cast<size_t>(grid) && (link.kind == LinkKind::kTabulated ||
                                             link.kind == LinkKind::kCallback))
        p.open_right = true;
      out.plateaus.push_back(p);
    } else {
      // Sharpen the endpoints against neighboring non-flat cells of the
      // opposite sign (true critical points).
      if (i > 0 && cls(i - 1) == -c) a = refine_critical(zs[i - 1], zs[i + 1]);
      if (j < static_cast<size_t>(grid) && cls(j) == -c)
        b = refine_critical(zs[j - 1], zs[j + 1]);
      Branch br;
      br.zlo = a;
      br.zhi = b;
      br.slope_sign = c;
      const Real ya = link_eval(link, a), yb = link_eval(link, b);
      br.ylo = std::min(ya, yb);
      br.yhi = std::max(ya, yb);
      if (br.yhi > br.ylo) out.branches.push_back(br);
    }
    i = j;
  }
  return out;
}

/// Root of link(z) = y inside a monotone branch: bisection plus Newton
/// polish, all in long double.
inline Real branch_root(const LinkFunction& link, const Branch& br, Real y) {
  Real a = br.zlo, b = br.zhi;
  Real fa = link_eval(link, a) - y;
  for (int it = 0; it < 80 && b - a > 1e-18L * std::max(1.0L, std::abs(a)); ++it) {
    const Real m = (a + b) / 2;
    const Real fm = link_eval(link, m) - y;
    if ((fa <= 0) == (fm <= 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  Real z = (a + b) / 2;
  for (int it = 0; it < 3; ++it) {
    const Real dz = link_deriv(link, z);
    if (std::abs(dz) < 1e-30L) break;
    const Real step = (link_eval(link, z) - y) / dz;
    const Real znew = z - step;
    if (znew < br.zlo || znew > br.zhi) break;
    z = znew;
  }
  return z;
}

/// Gauss-Legendre nodes/weights on [-1,1] by Newton on the Legendre
/// recurrence (classic routine).
inline void gauss_legendre(int n, std::vector<Real>& x, std::vector<Real>& w) {
  x.resize(static_cast<size_t>(n));
  w.resize(static_cast<size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Real z = std::cos(static_cast<Real>(M_PI) * (i + 0.75L) / (n + 0.5L));
    Real pp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1.0L, p1 = 0.0L;
      for (int j = 0; j < n; ++j) {
        const Real p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1);
      }
      pp = n * (z * p0 - p1) / (z * z - 1);
      const Real dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-19L) break;
    }
    x[static_cast<size_t>(i)] = -z;
    x[static_cast<size_t>(n - 1 - i)] = z;
    w[static_cast<size_t>(i)] = 2 / ((1 - z * z) * pp * pp);
    w[static_cast<size_t>(n - 1 - i)] = w[static_cast<size_t>(i)];
  }
}

/// int_a^b He_k(z) gamma(z) dz via the exact antiderivative
/// -(He_{k-1} gamma); k = 0 falls back to the normal CDF.
inline Real hermite_gauss_integral(int k, Real a, Real b) {
  if (k == 0) {
    const Real s = std::sqrt(2.0L);
    return (std::erf(b / s) - std::erf(a / s)) / 2;
  }
  auto term = [&](Real z) -> Real {
    if (std::isinf(z)) return 0.0L;
    return hermite_ld(k - 1, z) * gauss_density(z);
  };
  return term(a) - term(b);
}

}  // namespace detail

/// All roots of link(z) = y on the domain: sign-change bracketing on a
/// uniform grid, bisection to 1e-12, centered-difference slopes.
inline LevelSet level_set_solve(const LinkFunction& link, double y,
                                double domain_lo = -8.0, double domain_hi = 8.0,
                                int grid = 4096) {
  LevelSet ls;
  ls.y = y;
  const double step = (domain_hi - domain_lo) / grid;
  double z0 = domain_lo;
  double f0 = link.eval(z0) - y;
  for (int i = 1; i <= grid; ++i) {
    const double z1 = domain_lo + step * i;
    const double f1 = link.eval(z1) - y;
    if ((f0 <= 0 && f1 > 0) || (f0 > 0 && f1 <= 0)) {
      double a = z0, b = z1, fa = f0;
      while (b - a > 1e-12) {
        const double m = (a + b) / 2;
        const double fm = link.eval(m) - y;
        if ((fa <= 0) == (fm <= 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      const double z = (a + b) / 2;
      const double sl = static_cast<double>(detail::link_deriv(link, z));
      if (std::abs(sl) < 1e-6)
        throw std::runtime_error("level_set_solve: near-critical level");
      ls.roots.push_back({z,
                          sl > 0 ? 1 : -1,
                          static_cast<double>(detail::gauss_density(z)) / std::abs(sl)});
    }
    z0 = z1;
    f0 = f1;
  }
  return ls;
}

/// zeta_k(y) = E[h_k(Z) | Y = y] by the coarea ratio.
inline double zeta_at(const LinkFunction& link, int k, double y,
                      double domain_lo = -8.0, double domain_hi = 8.0,
                      int grid = 4096) {
  const LevelSet ls = level_set_solve(link, y, domain_lo, domain_hi, grid);
  if (ls.roots.empty()) throw std::runtime_error("zeta_at: level set empty");
  Real num = 0.0L, den = 0.0L;
  for (const auto& r : ls.roots) {
    num += detail::hermite_ld(k, r.z) * static_cast<Real>(r.weight);
    den += static_cast<Real>(r.weight);
  }
  return static_cast<double>(num / den /
                             std::sqrt(static_cast<Real>(factorial(k))));
}

/// beta_k = E[Y h_k(Z)] for k = 1..kmax by Gauss-Hermite quadrature
/// (additive noise does not change these). Hermite-series links are exact.
inline SpectralProfile beta_coeffs(const LinkFunction& link, int kmax, int nodes = 0) {
  SpectralProfile p;
  p.kmax = kmax;
  p.beta.assign(static_cast<size_t>(kmax), 0.0);
  p.beta_converged.assign(static_cast<size_t>(kmax), true);
  p.method = "quadrature";
  if (link.kind == LinkKind::kHermiteSeries) {
    for (int k = 1; k <= kmax; ++k)
      if (static_cast<size_t>(k) < link.series.size())
        p.beta[static_cast<size_t>(k - 1)] = link.series[static_cast<size_t>(k)];
    return p;
  }
  if (nodes == 0) nodes = std::min(64, std::max(4 * kmax, 24));
  if (nodes < 4 * kmax && nodes < 64)
    throw std::invalid_argument("beta_coeffs: nodes must be >= 4*kmax");
  const QuadratureRule rule = gauss_hermite_rule(nodes);
  const QuadratureRule check = gauss_hermite_rule(std::min(64, 2 * nodes));
  for (int k = 1; k <= kmax; ++k) {
    auto f = [&](double z) { return link.eval(z) * hermite_normalized(k, z); };
    const double v = rule.integrate(f);
    const double v2 = check.integrate(f);
    p.beta[static_cast<size_t>(k - 1)] = v;
    p.beta_converged[static_cast<size_t>(k - 1)] = std::abs(v - v2) <= 1e-8;
  }
  return p;
}

struct LambdaOptions {
  double domain_lo = -10.0;  // wider than the level-set default: the tail
  double domain_hi = 10.0;   // mass enters lambda via huge 1/|sigma'| weights
  int grid = 4096;           // branch-classification grid
  int panel_order = 16;      // Gauss-Legendre order per panel
  int refine_levels = 80;    // geometric panels toward interval ends
  // Mollified links (the forge output) are flat to machine precision near
  // branch ends, so the per-branch top levels disagree at ulp scale while
  // the level-set weights gamma/|sigma'| blow up. A guard band around each
  // flat-end value is excised from the continuum and its full preimage is
  // absorbed into the matching atom through the exact He*gamma
  // antiderivative, where the conservation structure cancels it.
  double flat_guard = 1e-6;  // band half-width, relative to the value scale
  double flat_probe = 1e-3;  // probe offset, fraction of the branch width
  double flat_tol = 1e-12;   // flatness threshold at the probe, relative
};

/// lambda_k for k = 1..kmax on a deterministic link, by the positive-form
/// level-set integral described at the top of this header.
inline SpectralProfile lambda_coeffs_quadrature(const LinkFunction& link, int kmax,
                                                const LambdaOptions& opt = {}) {
  using detail::Branch;
  using detail::hermite_ld;
  SpectralProfile p;
  p.kmax = kmax;
  p.method = "level-set quadrature";
  const Real lo = opt.domain_lo, hi = opt.domain_hi;
  const auto dec = detail::build_branches(link, lo, hi, opt.grid);
  if (dec.branches.empty() && dec.plateaus.empty())
    throw std::runtime_error("lambda_coeffs_quadrature: empty decomposition");

  std::vector<Real> glx, glw;
  detail::gauss_legendre(opt.panel_order, glx, glw);

  // Atoms (point masses of the label law) accumulate plateau mass plus any
  // guard-band preimages absorbed from flat branch ends below.
  struct Atom {
    Real value, mass;
    std::vector<Real> moment;  // int He_k gamma over the atom's z-set
  };
  std::vector<Atom> atoms;
  auto atom_for = [&](Real value) -> Atom& {
    for (auto& at : atoms)
      if (std::abs(at.value - value) <= 1e-9L * std::max<Real>(1.0L, std::abs(at.value)))
        return at;
    atoms.push_back({value, 0.0L, std::vector<Real>(static_cast<size_t>(kmax), 0.0L)});
    return atoms.back();
  };
  auto absorb = [&](Atom& at, Real za, Real zb) {
    if (zb < za) std::swap(za, zb);
    at.mass += detail::hermite_gauss_integral(0, za, zb);
    for (int k = 1; k <= kmax; ++k)
      at.moment[static_cast<size_t>(k - 1)] += detail::hermite_gauss_integral(k, za, zb);
  };
  for (const auto& pl : dec.plateaus) {
    const Real za = pl.open_left ? -std::numeric_limits<Real>::infinity() : pl.zlo;
    const Real zb = pl.open_right ? std::numeric_limits<Real>::infinity() : pl.zhi;
    if (detail::hermite_gauss_integral(0, za, zb) <= 0.0L) continue;
    absorb(atom_for(pl.value), za, zb);
  }

  Real vscale = 1e-300L;
  for (const auto& br : dec.branches)
    vscale = std::max({vscale, std::abs(br.ylo), std::abs(br.yhi)});
  for (const auto& pl : dec.plateaus) vscale = std::max(vscale, std::abs(pl.value));

  // Detect flat branch ends: probe slightly inside the branch; a quadratic
  // critical point moves the value measurably, a mollified end does not.
  std::vector<Real> guard_values;
  auto cont = dec.branches;
  for (const auto& br : cont) {
    const Real width = br.zhi - br.zlo;
    const Real zlo_end = br.slope_sign > 0 ? br.zlo : br.zhi;
    const Real zhi_end = br.slope_sign > 0 ? br.zhi : br.zlo;
    const Real in_lo = zlo_end + (br.slope_sign > 0 ? 1 : -1) *
                                     static_cast<Real>(opt.flat_probe) * width;
    const Real in_hi = zhi_end - (br.slope_sign > 0 ? 1 : -1) *
                                     static_cast<Real>(opt.flat_probe) * width;
    // Flatness is judged against the local value: a decaying-but-monotone
    // tail (weights stay coherent across branches) moves by a large
    // relative amount at the probe, a mollified end by none at all.
    const Real plo = detail::link_eval(link, in_lo);
    const Real phi = detail::link_eval(link, in_hi);
    if (std::abs(plo - br.ylo) <=
        static_cast<Real>(opt.flat_tol) * std::max(std::abs(plo), std::abs(br.ylo)))
      guard_values.push_back(br.ylo);
    if (std::abs(phi - br.yhi) <=
        static_cast<Real>(opt.flat_tol) * std::max(std::abs(phi), std::abs(br.yhi)))
      guard_values.push_back(br.yhi);
  }
  std::sort(guard_values.begin(), guard_values.end());
  const Real geps = static_cast<Real>(opt.flat_guard) * vscale;
  struct Band {
    Real lo, hi, value;
  };
  std::vector<Band> bands;
  for (Real g : guard_values) {
    if (!bands.empty() && g - bands.back().value <= 3 * geps)
      bands.back().hi = g + geps;
    else
      bands.push_back({g - geps, g + geps, g});
  }
  // Excise each band from every branch, moving the clipped z-interval into
  // the band's atom; its moments there cancel through the antiderivative
  // telescoping whenever the flat level is conserved across branches.
  for (const auto& bd : bands) {
    for (auto& br : cont) {
      if (!(br.yhi > br.ylo)) continue;  // consumed entirely
      if (br.ylo >= bd.lo && br.yhi <= bd.hi) {
        absorb(atom_for(bd.value), br.zlo, br.zhi);
        br.yhi = br.ylo;
      } else if (br.ylo >= bd.lo && br.ylo < bd.hi) {
        const Real zc = detail::branch_root(link, br, bd.hi);
        if (br.slope_sign > 0) {
          absorb(atom_for(bd.value), br.zlo, zc);
          br.zlo = zc;
        } else {
          absorb(atom_for(bd.value), zc, br.zhi);
          br.zhi = zc;
        }
        br.ylo = bd.hi;
      } else if (br.yhi > bd.lo && br.yhi <= bd.hi) {
        const Real zc = detail::branch_root(link, br, bd.lo);
        if (br.slope_sign > 0) {
          absorb(atom_for(bd.value), zc, br.zhi);
          br.zhi = zc;
        } else {
          absorb(atom_for(bd.value), br.zlo, zc);
          br.zlo = zc;
        }
        br.yhi = bd.lo;
      }
      // A band strictly inside (ylo, yhi) would need a branch split; none of
      // the supported links cross a flat level transversally.
    }
  }
  cont.erase(std::remove_if(cont.begin(), cont.end(),
                            [](const Branch& br) { return !(br.yhi > br.ylo); }),
             cont.end());

  // Continuous part, integrated between consecutive critical values.
  std::vector<Real> breaks;
  for (const auto& br : cont) {
    breaks.push_back(br.ylo);
    breaks.push_back(br.yhi);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](Real a, Real b) {
                             return std::abs(a - b) <=
                                    1e-14L * std::max<Real>(1.0L, std::abs(a));
                           }),
               breaks.end());

  std::vector<Real> acc(static_cast<size_t>(kmax), 0.0L);
  Real mass_cont = 0.0L;
  auto eval_level = [&](Real y, Real wquad) {
    Real den = 0.0L;
    std::vector<Real> num(static_cast<size_t>(kmax), 0.0L);
    for (const auto& br : cont) {
      if (y <= br.ylo || y >= br.yhi) continue;
      const Real z = detail::branch_root(link, br, y);
      const Real sl = std::abs(detail::link_deriv(link, z));
      if (sl < 1e-300L) continue;
      const Real w = detail::gauss_density(z) / sl;
      den += w;
      for (int k = 1; k <= kmax; ++k)
        num[static_cast<size_t>(k - 1)] += hermite_ld(k, z) * w;
    }
    if (den <= 0.0L) return;
    mass_cont += wquad * den;
    for (int k = 1; k <= kmax; ++k) {
      const Real nk = num[static_cast<size_t>(k - 1)];
      acc[static_cast<size_t>(k - 1)] += wquad * nk * nk / den;
    }
  };
  for (size_t b = 0; b + 1 < breaks.size(); ++b) {
    const Real a = breaks[b], c = breaks[b + 1];
    if (c - a <= 1e-14L * std::max<Real>(1.0L, std::abs(a))) continue;
    // Geometric panel edges refined toward both endpoints (the density
    // has inverse-square-root singularities at critical values).
    std::vector<Real> edges;
    edges.push_back(a);
    for (int j = opt.refine_levels; j >= 1; --j)
      edges.push_back(a + (c - a) * std::ldexp(1.0L, -j));
    for (int j = 1; j <= opt.refine_levels; ++j)
      edges.push_back(c - (c - a) * std::ldexp(1.0L, -j));
    edges.push_back(c);
    for (size_t e = 0; e + 1 < edges.size(); ++e) {
      const Real pa = edges[e], pb = edges[e + 1];
      if (pb <= pa) continue;
      const Real mid = (pa + pb) / 2, half = (pb - pa) / 2;
      for (int q = 0; q < opt.panel_order; ++q)
        eval_level(mid + half * glx[static_cast<size_t>(q)],
                   half * glw[static_cast<size_t>(q)]);
    }
  }

  for (const auto& at : atoms) {
    if (!(at.mass > 0.0L)) continue;
    for (int k = 1; k <= kmax; ++k) {
      const Real m = at.moment[static_cast<size_t>(k - 1)];
      acc[static_cast<size_t>(k - 1)] += m * m / at.mass;
    }
  }

  p.lambda_sq.resize(static_cast<size_t>(kmax));
  p.lambda.resize(static_cast<size_t>(kmax));
  p.lambda_converged.assign(static_cast<size_t>(kmax), true);
  for (int k = 1; k <= kmax; ++k) {
    const Real l2 = acc[static_cast<size_t>(k - 1)] / factorial(k);
    p.lambda_sq[static_cast<size_t>(k - 1)] = static_cast<double>(l2);
    p.lambda[static_cast<size_t>(k - 1)] =
        l2 > 0 ? std::sqrt(static_cast<double>(l2)) : 0.0;
  }
  return p;
}

struct BinnedLambda {
  std::vector<double> lambda_sq;  // debiased estimates, k = 1..kmax
  std::vector<double> se;         // block-bootstrap standard errors
  int bins = 0;
};

/// Binned conditional-moment estimator of lambda_k^2 from (z, y) samples:
/// equal-mass y-bins, zeta_hat = within-bin mean of h_k(z), with the
/// within-bin sampling variance subtracted (the naive plug-in is biased
/// upward by Var(h_k)/m per bin). Standard errors by bootstrap over bins.
inline BinnedLambda lambda_coeffs_binned(const std::vector<double>& zs,
                                         const std::vector<double>& ys, int kmax,
                                         int bins = 0, int boot = 200,
                                         uint64_t seed = 7777) {
  const size_t n = zs.size();
  if (n != ys.size() || n == 0)
    throw std::invalid_argument("lambda_coeffs_binned: bad sample arrays");
  if (bins == 0)
    bins = static_cast<int>(std::min<double>(512.0, std::ceil(std::cbrt(static_cast<double>(n)))));
  if (n < 100 * static_cast<size_t>(bins))
    throw std::invalid_argument("lambda_coeffs_binned: < 100 samples per bin");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return ys[a] < ys[b]; });

  // Per-bin, per-k: count, mean, mean of squares of h_k(z).
  struct BinStat {
    double count = 0;
    std::vector<double> sum, sumsq;
  };
  std::vector<BinStat> stat(static_cast<size_t>(bins));
  for (auto& s : stat) {
    s.sum.assign(static_cast<size_t>(kmax), 0.0);
    s.sumsq.assign(static_cast<size_t>(kmax), 0.0);
  }
  for (size_t r = 0; r < n; ++r) {
    const size_t b = std::min<size_t>(static_cast<size_t>(bins) - 1,
                                      r * static_cast<size_t>(bins) / n);
    auto& s = stat[b];
    s.count += 1;
    const double z = zs[order[r]];
    for (int k = 1; k <= kmax; ++k) {
      const double h = hermite_normalized(k, z);
      s.sum[static_cast<size_t>(k - 1)] += h;
      s.sumsq[static_cast<size_t>(k - 1)] += h * h;
    }
  }
  auto estimate = [&](const std::vector<int>& pick) {
    std::vector<double> est(static_cast<size_t>(kmax), 0.0);
    double total = 0;
    for (int b : pick) total += stat[static_cast<size_t>(b)].count;
    for (int b : pick) {
      const auto& s = stat[static_cast<size_t>(b)];
      const double m = s.count;
      if (m < 2) continue;
      for (int k = 1; k <= kmax; ++k) {
        const double mean = s.sum[static_cast<size_t>(k - 1)] / m;
        const double var =
            (s.sumsq[static_cast<size_t>(k - 1)] - m * mean * mean) / (m - 1);
        est[static_cast<size_t>(k - 1)] += (m / total) * (mean * mean - var / m);
      }
    }
    return est;
  };

  std::vector<int> all(static_cast<size_t>(bins));
  std::iota(all.begin(), all.end(), 0);
  BinnedLambda out;
  out.bins = bins;
  out.lambda_sq = estimate(all);
  out.se.assign(static_cast<size_t>(kmax), 0.0);
  std::vector<double> mean(static_cast<size_t>(kmax), 0.0);
  std::vector<std::vector<double>> reps;
  reps.reserve(static_cast<size_t>(boot));
  CounterRng rng(mix_seed(seed, 0x626f6f74ull), 0);
  for (int r = 0; r < boot; ++r) {
    std::vector<int> pick(static_cast<size_t>(bins));
    for (auto& b : pick) b = static_cast<int>(rng.next_below(static_cast<uint64_t>(bins)));
    reps.push_back(estimate(pick));
    for (int k = 0; k < kmax; ++k) mean[static_cast<size_t>(k)] += reps.back()[static_cast<size_t>(k)];
  }
  for (int k = 0; k < kmax; ++k) mean[static_cast<size_t>(k)] /= boot;
  for (const auto& rep : reps)
    for (int k = 0; k < kmax; ++k) {
      const double d = rep[static_cast<size_t>(k)] - mean[static_cast<size_t>(k)];
      out.se[static_cast<size_t>(k)] += d * d;
    }
  for (int k = 0; k < kmax; ++k)
    out.se[static_cast<size_t>(k)] = std::sqrt(out.se[static_cast<size_t>(k)] / (boot - 1));
  return out;
}

/// Smallest k with |beta_k| > tol and smallest k with lambda_k > tol;
/// zero when absent below kmax.
inline std::pair<int, int> classify_exponents(const SpectralProfile& p,
                                              double tol = 1e-6) {
  int info = 0, gen = 0;
  for (int k = 1; k <= p.kmax; ++k) {
    if (!info && static_cast<size_t>(k) <= p.beta.size() &&
        std::abs(p.beta[static_cast<size_t>(k - 1)]) > tol)
      info = k;
    if (!gen && static_cast<size_t>(k) <= p.lambda.size() &&
        p.lambda[static_cast<size_t>(k - 1)] > tol)
      gen = k;
  }
  return {info, gen};
}

/// I_chi2 = sum_k lambda_k^2, truncated at kmax; second value flags a
/// non-negligible truncation tail.
inline std::pair<double, bool> chi2_mutual_info(const SpectralProfile& p) {
  double s = 0.0;
  for (double l : p.lambda) s += l * l;
  const bool tail = !p.lambda.empty() &&
                    p.lambda.back() * p.lambda.back() > 1e-6;
  return {s, tail};
}

/// Max deviation over the y-grid of S(y) = sum_roots gamma(z) He_{k-1}(z)
/// sign(sigma'(z)); constancy certifies lambda_k = 0 (integral form).
inline double level_set_constancy_check(const LinkFunction& link, int k,
                                        const std::vector<double>& ygrid) {
  bool have_ref = false;
  Real ref = 0.0L, maxdev = 0.0L;
  int skipped = 0;
  for (double y : ygrid) {
    LevelSet ls;
    try {
      ls = level_set_solve(link, y);
    } catch (const std::runtime_error&) {
      ++skipped;
      continue;
    }
    if (ls.roots.empty()) {
      ++skipped;
      continue;
    }
    Real s = 0.0L;
    for (const auto& r : ls.roots)
      s += detail::gauss_density(static_cast<Real>(r.z)) *
           detail::hermite_ld(k - 1, static_cast<Real>(r.z)) * r.slope_sign;
    if (!have_ref) {
      ref = s;
      have_ref = true;
    }
    maxdev = std::max(maxdev, std::abs(s - ref));
  }
  if (!have_ref)
    throw std::runtime_error("level_set_constancy_check: all levels skipped");
  return static_cast<double>(maxdev);
}

}  // namespace sindex

#endif  // SINDEX_EXPONENT_HPP
