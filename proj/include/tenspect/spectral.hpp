#ifndef TENSPECT_SPECTRAL_HPP
#define TENSPECT_SPECTRAL_HPP

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tenspect/tensor.hpp"

namespace tenspect {

enum class Variant { alg1, alg2 };
enum class StopRule { step_diff, residual };

struct SolveConfig {
  double p = 3.5;
  double sigma = 0.0;
  Variant variant = Variant::alg1;
  double tol = 1e-10;
  int max_iter = 10000;
  std::uint64_t seed = 0;
  std::optional<Vector> start;  // explicit positive start; random otherwise
  StopRule stop = StopRule::step_diff;
  bool record_iterates = false;
};

struct IterationTrace {
  struct Step {
    int k;
    double lambda;
    double residual;      // ||T(x_k) - lambda_k Phi_p(x_k)||_inf
    double step_diff;     // ||x_k - x_{k-1}||_p, 0 at k = 0
    bool restart;         // true when x_k is an extrapolated restart point
    std::int64_t map_applications;  // cumulative
    std::int64_t wall_ns;           // cumulative; not populated when timing disabled
  };
  std::vector<Step> steps;
  std::vector<Vector> iterates;  // filled only when record_iterates is set
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  bool converged = false;
  int fallback_events = 0;   // extrapolated point rejected, plain iterate kept
  int breakdown_events = 0;  // epsilon-table breakdown during extrapolation
  std::int64_t map_applications = 0;
  std::int64_t wall_ns = 0;
};

struct SolveResult {
  double lambda = 0.0;
  Vector u;
  IterationTrace trace;
};

/// Positive support shared by the cone of vectors whose zero pattern the
/// tensor map preserves, with the first iteration index at which the
/// pattern of T^k(1) stabilizes.
struct ConePattern {
  std::vector<char> support;
  int k0 = 0;
  bool empty() const {
    for (char c : support)
      if (c) return false;
    return true;
  }
};

namespace detail {

// Boolean abstraction of apply: out[i] is true iff some entry with leading
// index i has all trailing indices inside `in`.
inline std::vector<char> bool_apply(const SparseTensor& t, const std::vector<char>& in) {
  std::vector<char> out(t.dim(), 0);
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    auto ix = t.index(e);
    if (t.value(e) == 0.0) continue;
    if (t.symmetric_storage()) {
      // every index of the tuple can lead some expanded permutation
      for (std::size_t a = 0; a < ix.size(); ++a) {
        if (out[ix[a]]) continue;
        bool rest = true;
        for (std::size_t m = 0; m < ix.size(); ++m)
          if (m != a && !in[ix[m]]) {
            rest = false;
            break;
          }
        if (rest) out[ix[a]] = 1;
      }
    } else {
      if (out[ix[0]]) continue;
      bool rest = true;
      for (std::size_t m = 1; m < ix.size(); ++m)
        if (!in[ix[m]]) {
          rest = false;
          break;
        }
      if (rest) out[ix[0]] = 1;
    }
  }
  return out;
}

inline std::vector<char> nonzero_pattern(const Vector& x) {
  std::vector<char> p(x.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i] != 0.0;
  return p;
}

// One shifted power update from precomputed z = T(x). `zpat` is the exact
// zero pattern of z, used to mask the shift term so it shares z's pattern.
// Returns the unnormalized y.
inline Vector shifted_update(const Vector& z, const std::vector<char>& zpat,
                             const Vector& x, const PNorm& pn, double sigma,
                             Variant variant) {
  const std::size_t n = z.size();
  if (variant == Variant::alg1) {
    Vector y = duality_map_scaled(z, pn.q);
    if (sigma != 0.0)
      for (std::size_t i = 0; i < n; ++i)
        if (zpat[i]) y[i] += sigma * x[i];
    return y;
  }
  Vector w = z;
  if (sigma != 0.0) {
    const Vector phi = duality_map(x, pn.p);
    for (std::size_t i = 0; i < n; ++i)
      if (zpat[i]) w[i] += sigma * phi[i];
  }
  return duality_map_scaled(w, pn.q);
}

inline void require_valid(const SolveConfig& cfg) {
  if (!(cfg.p > 1.0)) throw std::invalid_argument("solve: p must be > 1");
  if (!(cfg.sigma >= 0.0)) throw std::invalid_argument("solve: sigma must be >= 0");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("solve: tol must be > 0");
  if (cfg.max_iter < 1) throw std::invalid_argument("solve: max_iter must be >= 1");
  if (cfg.start)
    for (double v : *cfg.start)
      if (!(v > 0.0))
        throw std::invalid_argument("solve: explicit start must be entrywise positive");
}

inline Vector initial_iterate(const SparseTensor& t, const SolveConfig& cfg) {
  Vector x;
  if (cfg.start) {
    if (static_cast<int>(cfg.start->size()) != t.dim())
      throw std::invalid_argument("solve: start vector length mismatch");
    x = *cfg.start;
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    x.resize(t.dim());
    for (double& v : x) {
      do {
        v = uni(rng);
      } while (v == 0.0);
    }
  }
  const double nx = p_norm(x, cfg.p);
  for (double& v : x) v /= nx;
  return x;
}

}  // namespace detail

inline ConePattern cone_pattern(const SparseTensor& t) {
  if (!t.nonnegative())
    throw std::invalid_argument("cone_pattern: tensor must be nonnegative");
  ConePattern cp;
  std::vector<char> cur(t.dim(), 1);  // pattern of T^0(1) = 1
  // Supports shrink monotonically, so the first repeat is the fixed point
  // and the loop runs at most dim+1 times.
  for (int k = 1;; ++k) {
    std::vector<char> next = detail::bool_apply(t, cur);
    if (next == cur || k > t.dim() + 1) {
      cp.support = std::move(next);
      cp.k0 = std::max(1, k - 1);
      return cp;
    }
    cur = std::move(next);
  }
}

/// Hilbert projective distance log(max_i x_i/y_i / min_i x_i/y_i) over the
/// common positive support; throws when the supports differ.
inline double hilbert_distance(const Vector& x, const Vector& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("hilbert_distance: length mismatch");
  double big = 0.0, small = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool xz = x[i] == 0.0, yz = y[i] == 0.0;
    if (xz != yz) throw std::invalid_argument("hilbert_distance: mismatched supports");
    if (xz) continue;
    if (x[i] < 0.0 || y[i] < 0.0)
      throw std::invalid_argument("hilbert_distance: vectors must be nonnegative");
    const double r = x[i] / y[i];
    big = std::max(big, r);
    small = std::min(small, r);
    any = true;
  }
  if (!any) throw std::invalid_argument("hilbert_distance: empty support");
  return std::log(big / small);
}

/// Directed graph with an arc u -> v whenever some entry has leading index u
/// and v in one of the trailing modes.
struct TensorGraph {
  int n = 0;
  std::vector<std::vector<int>> successors;
};

inline TensorGraph tensor_graph(const SparseTensor& t) {
  TensorGraph g;
  g.n = t.dim();
  g.successors.assign(t.dim(), {});
  std::vector<std::vector<char>> seen(t.dim(), std::vector<char>(t.dim(), 0));
  auto add = [&](int u, int v) {
    if (!seen[u][v]) {
      seen[u][v] = 1;
      g.successors[u].push_back(v);
    }
  };
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    if (t.value(e) == 0.0) continue;
    auto ix = t.index(e);
    if (t.symmetric_storage()) {
      // expanded permutations put every index in the lead
      for (std::size_t a = 0; a < ix.size(); ++a)
        for (std::size_t m = 0; m < ix.size(); ++m) {
          if (m == a) continue;
          add(ix[a], ix[m]);
        }
      // repeated indices also yield self-arcs u -> u
      for (std::size_t a = 0; a + 1 < ix.size(); ++a)
        if (ix[a] == ix[a + 1]) add(ix[a], ix[a]);
    } else {
      for (std::size_t m = 1; m < ix.size(); ++m) add(ix[0], ix[m]);
    }
  }
  return g;
}

inline bool is_strongly_connected(const TensorGraph& g) {
  if (g.n == 0) return true;
  auto reaches_all = [&](const std::vector<std::vector<int>>& succ) {
    std::vector<char> vis(g.n, 0);
    std::vector<int> stack{0};
    vis[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : succ[u])
        if (!vis[v]) {
          vis[v] = 1;
          ++count;
          stack.push_back(v);
        }
    }
    return count == g.n;
  };
  if (!reaches_all(g.successors)) return false;
  std::vector<std::vector<int>> rev(g.n);
  for (int u = 0; u < g.n; ++u)
    for (int v : g.successors[u]) rev[v].push_back(u);
  return reaches_all(rev);
}

inline bool is_weakly_irreducible(const SparseTensor& t) {
  if (!t.nonnegative())
    throw std::invalid_argument("is_weakly_irreducible: tensor must be nonnegative");
  return is_strongly_connected(tensor_graph(t));
}

/// Sup-norm eigenpair residual ||T(x) - lambda Phi_p(x)||_inf.
inline double residual(const SparseTensor& t, const Vector& x, double lambda, double p) {
  const Vector z = t.apply(x);
  const Vector phi = duality_map(x, p);
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    r = std::max(r, std::abs(z[i] - lambda * phi[i]));
  return r;
}

/// One normalized step of Shifted Power Method 1: y = Phi_q(T(x)) + sigma sign(T(x)) o x.
inline Vector step_alg1(const SparseTensor& t, const Vector& x, const SolveConfig& cfg) {
  const PNorm pn(cfg.p);
  const Vector z = t.apply(x);
  const auto zpat = detail::bool_apply(t, detail::nonzero_pattern(x));
  Vector y = detail::shifted_update(z, zpat, x, pn, cfg.sigma, Variant::alg1);
  const double ny = p_norm(y, cfg.p);
  if (ny == 0.0 || !std::isfinite(ny))
    throw std::runtime_error("step_alg1: map produced a zero iterate");
  for (double& v : y) v /= ny;
  return y;
}

/// One normalized step of Shifted Power Method 2: y = Phi_q(T(x) + sigma sign(T(x)) o Phi_p(x)).
inline Vector step_alg2(const SparseTensor& t, const Vector& x, const SolveConfig& cfg) {
  const PNorm pn(cfg.p);
  const Vector z = t.apply(x);
  const auto zpat = detail::bool_apply(t, detail::nonzero_pattern(x));
  Vector y = detail::shifted_update(z, zpat, x, pn, cfg.sigma, Variant::alg2);
  const double ny = p_norm(y, cfg.p);
  if (ny == 0.0 || !std::isfinite(ny))
    throw std::runtime_error("step_alg2: map produced a zero iterate");
  for (double& v : y) v /= ny;
  return y;
}

/// Shifted power iteration until consecutive iterates are closer than tol in
/// the ell^p norm (or the residual drops below tol with StopRule::residual).
inline SolveResult solve(const SparseTensor& t, const SolveConfig& cfg) {
  detail::require_valid(cfg);
  if (!t.nonnegative())
    throw std::invalid_argument("solve: tensor must be entrywise nonnegative");
  const ConePattern cone = cone_pattern(t);
  if (cone.empty())
    throw std::runtime_error(
        "solve: the cone of preserved positive patterns is empty; the tensor is too "
        "sparse for the power sequence to have a limit in it");

  const PNorm pn(cfg.p);
  SolveResult out;
  IterationTrace& tr = out.trace;
  tr.seed = cfg.seed;
  if (cfg.p <= static_cast<double>(t.order()))
    tr.warnings.push_back("p <= number of modes: convergence is not guaranteed");

  Vector x = detail::initial_iterate(t, cfg);
  std::vector<char> pattern(t.dim(), 1);
  bool pattern_stable = pattern == cone.support;
  double diff = std::numeric_limits<double>::quiet_NaN();

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ns = [&] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  for (int k = 0;; ++k) {
    const Vector z = t.apply(x);
    ++tr.map_applications;
    const double lambda = dot(x, z);
    const Vector phi = duality_map(x, pn.p);
    double res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      res = std::max(res, std::abs(z[i] - lambda * phi[i]));
    tr.steps.push_back({k, lambda, res, k == 0 ? 0.0 : diff, false,
                        tr.map_applications, elapsed_ns()});
    if (cfg.record_iterates) tr.iterates.push_back(x);
    out.lambda = lambda;

    const bool hit = cfg.stop == StopRule::step_diff ? (k >= 1 && diff < cfg.tol)
                                                     : (res < cfg.tol);
    if (hit) {
      tr.converged = true;
      break;
    }
    if (k >= cfg.max_iter) break;

    std::vector<char> zpat =
        pattern_stable ? pattern : detail::bool_apply(t, pattern);
    Vector y = detail::shifted_update(z, zpat, x, pn, cfg.sigma, cfg.variant);
    const double ny = p_norm(y, pn.p);
    if (ny == 0.0 || !std::isfinite(ny))
      throw std::runtime_error("solve: map produced a zero or non-finite iterate");
    for (double& v : y) v /= ny;
    diff = 0.0;
    {
      Vector d(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) d[i] = y[i] - x[i];
      diff = p_norm(d, pn.p);
    }
    x = std::move(y);
    if (!pattern_stable) {
      pattern = std::move(zpat);
      pattern_stable = pattern == cone.support;
    }
  }
  tr.wall_ns = elapsed_ns();
  out.u = std::move(x);
  return out;
}

}  // namespace tenspect

#endif  // TENSPECT_SPECTRAL_HPP
