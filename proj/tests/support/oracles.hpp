// Test-only reference implementations, kept independent of the library's
// computation paths: dense nested-loop tensor algebra, finite differences,
// direct Shanks solves, and small graph utilities.
#ifndef TENSPECT_TESTS_ORACLES_HPP
#define TENSPECT_TESTS_ORACLES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "tenspect/tenspect.hpp"

namespace oracles {

using tenspect::SparseTensor;
using tenspect::Vector;

struct DenseTensor {
  int order = 0;
  int dim = 0;
  std::vector<double> a;  // row-major over index tuples

  DenseTensor(int order_, int dim_) : order(order_), dim(dim_) {
    std::size_t total = 1;
    for (int m = 0; m < order; ++m) total *= dim;
    a.assign(total, 0.0);
  }

  std::size_t offset(const std::vector<int>& ix) const {
    std::size_t off = 0;
    for (int v : ix) off = off * dim + v;
    return off;
  }
  double& at(const std::vector<int>& ix) { return a[offset(ix)]; }
  double at(const std::vector<int>& ix) const { return a[offset(ix)]; }

  template <class Fn>
  void for_each_tuple(Fn&& fn) const {
    std::vector<int> ix(order, 0);
    while (true) {
      fn(ix);
      int m = order - 1;
      while (m >= 0 && ++ix[m] == dim) ix[m--] = 0;
      if (m < 0) break;
    }
  }
};

inline DenseTensor densify(const SparseTensor& t) {
  DenseTensor d(t.order(), t.dim());
  std::vector<int> tup(t.order());
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    auto ix = t.index(e);
    tup.assign(ix.begin(), ix.end());
    if (t.symmetric_storage()) {
      std::sort(tup.begin(), tup.end());
      do {
        d.at(tup) = t.value(e);
      } while (std::next_permutation(tup.begin(), tup.end()));
    } else {
      d.at(tup) = t.value(e);
    }
  }
  return d;
}

inline Vector dense_apply_mode(const DenseTensor& d, const Vector& x, int mode) {
  Vector y(d.dim, 0.0);
  d.for_each_tuple([&](const std::vector<int>& ix) {
    double prod = d.at(ix);
    if (prod == 0.0) return;
    for (int m = 0; m < d.order; ++m)
      if (m != mode - 1) prod *= x[ix[m]];
    y[ix[mode - 1]] += prod;
  });
  return y;
}

inline Vector dense_apply(const DenseTensor& d, const Vector& x) {
  return dense_apply_mode(d, x, 1);
}

inline double dense_quadratic_form(const DenseTensor& d, const Vector& x) {
  double s = 0.0;
  d.for_each_tuple([&](const std::vector<int>& ix) {
    double prod = d.at(ix);
    if (prod == 0.0) return;
    for (int m = 0; m < d.order; ++m) prod *= x[ix[m]];
    s += prod;
  });
  return s;
}

inline double dense_p_norm(const Vector& x, double p) {
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

inline SparseTensor random_full_tensor(int order, int dim, std::mt19937_64& rng,
                                       bool nonnegative = true) {
  std::uniform_real_distribution<double> uni(nonnegative ? 0.0 : -1.0, 1.0);
  std::size_t total = 1;
  for (int m = 0; m < order; ++m) total *= dim;
  std::vector<int> indices;
  std::vector<double> values;
  std::vector<int> ix(order, 0);
  for (std::size_t lin = 0; lin < total; ++lin) {
    std::size_t rest = lin;
    for (int m = order - 1; m >= 0; --m) {
      ix[m] = static_cast<int>(rest % dim);
      rest /= dim;
    }
    indices.insert(indices.end(), ix.begin(), ix.end());
    values.push_back(uni(rng));
  }
  return SparseTensor(order, dim, std::move(indices), std::move(values));
}

inline SparseTensor random_symmetric_tensor(int order, int dim, std::mt19937_64& rng,
                                            bool nonnegative = true) {
  std::uniform_real_distribution<double> uni(nonnegative ? 0.0 : -1.0, 1.0);
  std::vector<int> indices;
  std::vector<double> values;
  std::vector<int> ix(order, 0);
  // one representative per nondecreasing tuple
  while (true) {
    indices.insert(indices.end(), ix.begin(), ix.end());
    values.push_back(uni(rng));
    int m = order - 1;
    while (m >= 0 && ix[m] == dim - 1) --m;
    if (m < 0) break;
    const int v = ix[m] + 1;
    for (int r = m; r < order; ++r) ix[r] = v;
  }
  return SparseTensor(order, dim, std::move(indices), std::move(values),
                      SparseTensor::Storage::symmetric);
}

inline Vector random_vector(int n, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> uni(lo, hi);
  Vector x(n);
  for (double& v : x) v = uni(rng);
  return x;
}

inline Vector random_positive_unit(int n, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  Vector x(n);
  for (double& v : x) v = uni(rng);
  const double nx = dense_p_norm(x, p);
  for (double& v : x) v /= nx;
  return x;
}

// Central finite differences of the Rayleigh quotient computed through the
// dense oracle evaluation, not the library gradient.
inline Vector fd_rayleigh_gradient(const DenseTensor& d, const Vector& x, double p,
                                   double step) {
  auto f = [&](const Vector& v) {
    return dense_quadratic_form(d, v) / std::pow(dense_p_norm(v, p), d.order);
  };
  Vector g(x.size());
  Vector xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    xm[i] = x[i] - step;
    g[i] = (f(xp) - f(xm)) / (2.0 * step);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

// --- sequences and direct Shanks solves --------------------------------------

struct KernelSequence {
  Vector limit;
  std::vector<Vector> xs;
};

// x_k = limit + sum_r c_r rho_r^k v_r with well-separated factors, so the
// sequence lies exactly in the width-h Shanks kernel.
inline KernelSequence kernel_sequence(int n, int h, int terms, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.15, 0.9);
  std::bernoulli_distribution flip(0.5);
  std::vector<double> rho;
  while (static_cast<int>(rho.size()) < h) {
    const double r = mag(rng) * (flip(rng) ? 1.0 : -1.0);
    bool separated = true;
    for (double s : rho)
      if (std::abs(s - r) < 0.1) separated = false;
    if (separated) rho.push_back(r);
  }
  KernelSequence seq;
  seq.limit = random_vector(n, rng);
  std::vector<Vector> modes;
  for (int r = 0; r < h; ++r) modes.push_back(random_vector(n, rng, 0.2, 1.0));
  for (int k = 0; k < terms; ++k) {
    Vector x = seq.limit;
    for (int r = 0; r < h; ++r) {
      const double w = std::pow(rho[r], k);
      for (int i = 0; i < n; ++i) x[i] += w * modes[r][i];
    }
    seq.xs.push_back(std::move(x));
  }
  return seq;
}

// Direct evaluation of the second topological Shanks transformation: solve
// the (h+1)x(h+1) coefficient system densely and combine the trailing h+1
// iterates of the window.
inline Vector shanks_direct(const std::vector<Vector>& xs, const Vector& y, int k,
                            int h) {
  std::vector<double> b(2 * h);
  for (int i = 0; i < 2 * h; ++i)
    b[i] = tenspect::dot(y, xs[k + i + 1]) - tenspect::dot(y, xs[k + i]);
  Eigen::MatrixXd m(h + 1, h + 1);
  for (int c = 0; c <= h; ++c) m(0, c) = 1.0;
  for (int r = 1; r <= h; ++r)
    for (int c = 0; c <= h; ++c) m(r, c) = b[r - 1 + c];
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(h + 1);
  rhs(0) = 1.0;
  const Eigen::VectorXd a = m.fullPivLu().solve(rhs);
  Vector out(xs[0].size(), 0.0);
  for (int i = 0; i <= h; ++i)
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += a(i) * xs[k + h + i][c];
  return out;
}

// --- graphs -----------------------------------------------------------------

inline tenspect::MotifGraph erdos_renyi(int n, double expected_degree,
                                        std::mt19937_64& rng, bool directed = false) {
  tenspect::MotifGraph g;
  g.n = n;
  g.directed = directed;
  const double prob = expected_degree / (n - 1);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int u = 0; u < n; ++u)
    for (int v = directed ? 0 : u + 1; v < n; ++v) {
      if (u == v) continue;
      if (uni(rng) < prob) {
        g.arcs.emplace_back(u, v);
        if (!directed) g.arcs.emplace_back(v, u);
      }
    }
  std::sort(g.arcs.begin(), g.arcs.end());
  g.arcs.erase(std::unique(g.arcs.begin(), g.arcs.end()), g.arcs.end());
  return g;
}

// Cubic-time motif detection over all node triples.
inline std::set<std::array<int, 3>> brute_force_three_cycles(const tenspect::MotifGraph& g) {
  std::vector<std::vector<char>> adj(g.n, std::vector<char>(g.n, 0));
  for (auto [u, v] : g.arcs) adj[u][v] = 1;
  std::set<std::array<int, 3>> triples;
  for (int a = 0; a < g.n; ++a)
    for (int b = a + 1; b < g.n; ++b)
      for (int c = b + 1; c < g.n; ++c) {
        const bool cyc1 = adj[a][b] && adj[b][c] && adj[c][a];
        const bool cyc2 = adj[a][c] && adj[c][b] && adj[b][a];
        if (cyc1 || cyc2) triples.insert({a, b, c});
      }
  return triples;
}

// Floyd-Warshall style transitive closure for the strong connectivity oracle.
inline bool reachability_strongly_connected(const tenspect::TensorGraph& g) {
  std::vector<std::vector<char>> reach(g.n, std::vector<char>(g.n, 0));
  for (int u = 0; u < g.n; ++u) {
    reach[u][u] = 1;
    for (int v : g.successors[u]) reach[u][v] = 1;
  }
  for (int w = 0; w < g.n; ++w)
    for (int u = 0; u < g.n; ++u)
      if (reach[u][w])
        for (int v = 0; v < g.n; ++v)
          if (reach[w][v]) reach[u][v] = 1;
  for (int u = 0; u < g.n; ++u)
    for (int v = 0; v < g.n; ++v)
      if (!reach[u][v]) return false;
  return true;
}

// Exact-zero tracking iteration of apply on the all-ones vector; the numeric
// counterpart of the boolean pattern iteration.
inline std::vector<char> numeric_pattern_iteration(const SparseTensor& t, int steps) {
  Vector x(t.dim(), 1.0);
  for (int s = 0; s < steps; ++s) {
    x = t.apply(x);
    double m = 0.0;
    for (double v : x) m = std::max(m, v);
    if (m > 0)
      for (double& v : x) v /= m;  // keep magnitudes tame; zeros stay exact
  }
  std::vector<char> pat(t.dim());
  for (int i = 0; i < t.dim(); ++i) pat[i] = x[i] != 0.0;
  return pat;
}

}  // namespace oracles

#endif  // TENSPECT_TESTS_ORACLES_HPP
