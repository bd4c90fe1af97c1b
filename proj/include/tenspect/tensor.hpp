#ifndef TENSPECT_TENSOR_HPP
#define TENSPECT_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tenspect {

using Vector = std::vector<double>;

/// Exponent pair (p, q) with 1/p + 1/q = 1.
struct PNorm {
  double p;
  double q;

  explicit PNorm(double p_) : p(p_), q(p_ / (p_ - 1.0)) {
    if (!(p_ > 1.0)) throw std::invalid_argument("PNorm: p must be > 1");
  }
};

inline double conjugate_exponent(double p) { return PNorm(p).q; }

/// Order-d cubical tensor in coordinate form, every mode of size `dim`.
///
/// Entries are canonicalized on construction: index tuples sorted
/// lexicographically, duplicates merged by summation. With symmetric
/// storage each stored tuple is the sorted representative of its index
/// multiset and is expanded implicitly by all index permutations.
/// Instances are immutable after construction and safe to share across
/// threads.
class SparseTensor {
 public:
  enum class Storage { full, symmetric };

  /// `indices` is a flat array of nnz*order zero-based mode indices.
  SparseTensor(int order, int dim, std::vector<int> indices,
               std::vector<double> values, Storage storage = Storage::full)
      : order_(order), dim_(dim), storage_(storage) {
    if (order < 2) throw std::invalid_argument("SparseTensor: order must be >= 2");
    if (dim < 1) throw std::invalid_argument("SparseTensor: dim must be >= 1");
    if (values.empty() ? !indices.empty()
                       : indices.size() != values.size() * static_cast<std::size_t>(order))
      throw std::invalid_argument("SparseTensor: index/value length mismatch");
    for (int ix : indices)
      if (ix < 0 || ix >= dim)
        throw std::invalid_argument("SparseTensor: index out of range");

    const std::size_t nnz = values.size();
    if (storage_ == Storage::symmetric) {
      for (std::size_t e = 0; e < nnz; ++e)
        std::sort(indices.begin() + e * order, indices.begin() + (e + 1) * order);
    }

    std::vector<std::size_t> perm(nnz);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto tuple_less = [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(
          indices.begin() + a * order, indices.begin() + (a + 1) * order,
          indices.begin() + b * order, indices.begin() + (b + 1) * order);
    };
    std::sort(perm.begin(), perm.end(), tuple_less);

    indices_.reserve(indices.size());
    values_.reserve(nnz);
    for (std::size_t r = 0; r < nnz; ++r) {
      const std::size_t e = perm[r];
      const bool same_as_prev =
          !values_.empty() &&
          std::equal(indices.begin() + e * order, indices.begin() + (e + 1) * order,
                     indices_.end() - order);
      if (same_as_prev) {
        values_.back() += values[e];
      } else {
        indices_.insert(indices_.end(), indices.begin() + e * order,
                        indices.begin() + (e + 1) * order);
        values_.push_back(values[e]);
      }
    }
  }

  SparseTensor(int order, int dim) : SparseTensor(order, dim, {}, {}) {}

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t nnz() const { return values_.size(); }
  Storage storage() const { return storage_; }
  bool symmetric_storage() const { return storage_ == Storage::symmetric; }

  std::span<const int> index(std::size_t e) const {
    return {indices_.data() + e * order_, static_cast<std::size_t>(order_)};
  }
  double value(std::size_t e) const { return values_[e]; }
  std::span<const double> values() const { return values_; }

  bool nonnegative() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
  }

  /// True when the tensor (after implicit expansion) is invariant under
  /// index permutations. Symmetric storage is symmetric by construction;
  /// full storage is verified entry by entry, which costs O(nnz log nnz).
  bool is_symmetric() const {
    if (storage_ == Storage::symmetric) return true;
    std::map<std::vector<int>, std::pair<double, std::size_t>> groups;
    std::vector<int> key(order_);
    for (std::size_t e = 0; e < nnz(); ++e) {
      auto ix = index(e);
      key.assign(ix.begin(), ix.end());
      std::sort(key.begin(), key.end());
      auto [it, fresh] = groups.try_emplace(key, value(e), std::size_t{0});
      if (!fresh && it->second.first != value(e)) return false;
      it->second.second += 1;
    }
    for (const auto& [key_ix, vc] : groups)
      if (vc.second != distinct_permutations(key_ix)) return false;
    return true;
  }

  /// Number of distinct permutations of a sorted index tuple (multinomial count).
  static std::size_t distinct_permutations(std::span<const int> sorted_tuple) {
    std::size_t result = 1, run = 0;
    for (std::size_t i = 0; i < sorted_tuple.size(); ++i) {
      run = (i > 0 && sorted_tuple[i] == sorted_tuple[i - 1]) ? run + 1 : 1;
      result = result * (i + 1) / run;  // stays integral in sorted order
    }
    return result;
  }

 private:
  /// The polynomial map y_{i1} = sum over i2..id of t_{i1,...,id} x_{i2}...x_{id}.
  Vector apply(const Vector& x) const;

  /// Contraction over all modes except `mode` (1-based); apply(x) is mode 1.
  Vector apply_mode(const Vector& x, int mode) const;

 private:
  int order_;
  int dim_;
  Storage storage_;
  std::vector<int> indices_;
  std::vector<double> values_;
};

namespace detail {

inline int env_thread_cap() {
  if (const char* s = std::getenv("TENSPECT_THREADS")) {
    const long v = std::strtol(s, nullptr, 10);
    if (v >= 1) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline double product_over(std::span<const int> ix, const Vector& x, int skip_pos) {
  double prod = 1.0;
  for (std::size_t m = 0; m < ix.size(); ++m)
    if (static_cast<int>(m) != skip_pos) prod *= x[ix[m]];
  return prod;
}

// Contribution of one symmetric representative to y: each distinct index u
// of the tuple receives value * (#permutations of the remaining multiset)
// * (product of x over the remaining positions).
inline void scatter_symmetric(std::span<const int> ix, double v, const Vector& x,
                              Vector& y) {
  std::size_t pos = 0;
  while (pos < ix.size()) {
    std::size_t end = pos;
    while (end < ix.size() && ix[end] == ix[pos]) ++end;
    // remaining multiset = tuple minus one occurrence of ix[pos]
    std::size_t perms = 1, seen = 0, run = 0;
    int prev = -1;
    double prod = 1.0;
    for (std::size_t m = 0; m < ix.size(); ++m) {
      if (m == pos) continue;
      run = (seen > 0 && ix[m] == prev) ? run + 1 : 1;
      prev = ix[m];
      ++seen;
      perms = perms * seen / run;
      prod *= x[ix[m]];
    }
    y[ix[pos]] += v * static_cast<double>(perms) * prod;
    pos = end;
  }
}

inline void apply_range_full(const SparseTensor& t, const Vector& x, Vector& y,
                             std::size_t begin, std::size_t end) {
  for (std::size_t e = begin; e < end; ++e) {
    auto ix = t.index(e);
    y[ix[0]] += t.value(e) * product_over(ix, x, 0);
  }
}

}  // namespace detail

inline Vector SparseTensor::apply(const Vector& x) const {
  if (static_cast<int>(x.size()) != dim())
    throw std::invalid_argument("apply: vector length does not match tensor dim");
  Vector y(dim(), 0.0);
  if (symmetric_storage()) {
    for (std::size_t e = 0; e < nnz(); ++e)
      detail::scatter_symmetric(index(e), value(e), x, y);
    return y;
  }
  const std::size_t count = nnz();
  const int threads =
      std::min<int>(detail::env_thread_cap(), static_cast<int>(count / 32768) + 1);
  if (threads <= 1) {
    detail::apply_range_full(*this, x, y, 0, count);
    return y;
  }
  // Entries are sorted with the leading mode major, so splitting ranges at
  // leading-index boundaries gives each worker disjoint output rows and the
  // per-row accumulation order of the sequential loop.
  std::vector<std::size_t> splits{0};
  for (int w = 1; w < threads; ++w) {
    std::size_t s = count * static_cast<std::size_t>(w) / threads;
    while (s < count && s > 0 && index(s)[0] == index(s - 1)[0]) ++s;
    if (s > splits.back() && s < count) splits.push_back(s);
  }
  splits.push_back(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w + 1 < splits.size(); ++w)
    pool.emplace_back(detail::apply_range_full, std::cref(*this), std::cref(x),
                      std::ref(y), splits[w], splits[w + 1]);
  for (auto& th : pool) th.join();
  return y;
}

inline Vector SparseTensor::apply_mode(const Vector& x, int mode) const {
  if (mode < 1 || mode > order())
    throw std::invalid_argument("apply_mode: mode out of range");
  if (symmetric_storage() || mode == 1) return apply(x);
  if (static_cast<int>(x.size()) != dim())
    throw std::invalid_argument("apply_mode: vector length does not match tensor dim");
  Vector y(dim(), 0.0);
  const int pos = mode - 1;
  for (std::size_t e = 0; e < nnz(); ++e) {
    auto ix = index(e);
    y[ix[pos]] += value(e) * detail::product_over(ix, x, pos);
  }
  return y;
}

inline double p_norm(const Vector& x, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p_norm: p must be >= 1");
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += std::pow(std::abs(v) / scale, p);
  return scale * std::pow(acc, 1.0 / p);
}

inline double inf_norm(const Vector& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Componentwise sign(x_i)|x_i|^{p-1}; the identity for p = 2, and 0 maps to 0.
inline Vector duality_map(const Vector& x, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("duality_map: p must be > 1");
  Vector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]);
    y[i] = a == 0.0 ? 0.0 : std::copysign(std::pow(a, p - 1.0), x[i]);
  }
  return y;
}

namespace detail {

// Duality map evaluated with a max-norm rescaling so large inputs do not
// overflow before the exponent is applied: Phi_q(z) = s^{q-1} Phi_q(z/s).
inline Vector duality_map_scaled(const Vector& z, double q) {
  const double s = inf_norm(z);
  if (s == 0.0) return Vector(z.size(), 0.0);
  const double restore = std::pow(s, q - 1.0);
  Vector y(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double a = std::abs(z[i]) / s;
    y[i] = a == 0.0 ? 0.0 : std::copysign(std::pow(a, q - 1.0) * restore, z[i]);
  }
  return y;
}

}  // namespace detail

/// Rayleigh quotient x^T T(x) / ||x||_p^d.
inline double rayleigh(const SparseTensor& t, const Vector& x, double p) {
  const double nx = p_norm(x, p);
  if (nx == 0.0) throw std::invalid_argument("rayleigh: zero vector");
  return dot(x, t.apply(x)) / std::pow(nx, t.order());
}

/// Gradient of the Rayleigh quotient; defined for symmetric tensors only.
inline Vector rayleigh_gradient(const SparseTensor& t, const Vector& x, double p) {
  const double nx = p_norm(x, p);
  if (nx == 0.0) throw std::invalid_argument("rayleigh_gradient: zero vector");
  if (!t.is_symmetric())
    throw std::invalid_argument("rayleigh_gradient: tensor must be symmetric");
  const Vector tx = t.apply(x);
  const double coeff = dot(x, tx) / std::pow(nx, p);
  const Vector phi = duality_map(x, p);
  const double scale = t.order() / std::pow(nx, t.order());
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = scale * (tx[i] - coeff * phi[i]);
  return g;
}

// ---------------------------------------------------------------------------
// Tensor text format: header "d n nnz sym", then nnz lines "i1 ... id value"
// with 1-based indices.
// ---------------------------------------------------------------------------

inline SparseTensor read_tensor_text(std::istream& in) {
  int d = 0, n = 0, sym = 0;
  long long nnz = -1;
  if (!(in >> d >> n >> nnz >> sym))
    throw std::runtime_error("tensor text: malformed header, expected 'd n nnz sym'");
  if (d < 2 || n < 1 || nnz < 0 || (sym != 0 && sym != 1))
    throw std::runtime_error("tensor text: invalid header values");
  std::vector<int> indices;
  std::vector<double> values;
  indices.reserve(static_cast<std::size_t>(nnz) * d);
  values.reserve(static_cast<std::size_t>(nnz));
  std::vector<int> tuple(d);
  for (long long e = 0; e < nnz; ++e) {
    for (int m = 0; m < d; ++m) {
      if (!(in >> tuple[m]))
        throw std::runtime_error("tensor text: truncated entry list");
      if (tuple[m] < 1 || tuple[m] > n)
        throw std::runtime_error("tensor text: index out of range");
    }
    double v;
    if (!(in >> v)) throw std::runtime_error("tensor text: missing value");
    if (sym == 1 && !std::is_sorted(tuple.begin(), tuple.end()))
      throw std::runtime_error(
          "tensor text: sym=1 entries must use sorted representative tuples");
    for (int m = 0; m < d; ++m) indices.push_back(tuple[m] - 1);
    values.push_back(v);
  }
  return SparseTensor(d, n, std::move(indices), std::move(values),
                      sym ? SparseTensor::Storage::symmetric
                          : SparseTensor::Storage::full);
}

inline void write_tensor_text(std::ostream& out, const SparseTensor& t) {
  out << t.order() << ' ' << t.dim() << ' ' << t.nnz() << ' '
      << (t.symmetric_storage() ? 1 : 0) << '\n';
  char buf[40];
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    for (int v : t.index(e)) out << v + 1 << ' ';
    std::snprintf(buf, sizeof buf, "%.17g", t.value(e));
    out << buf << '\n';
  }
}

}  // namespace tenspect

#endif  // TENSPECT_TENSOR_HPP
