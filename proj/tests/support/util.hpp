#ifndef TENSPECT_TESTS_UTIL_HPP
#define TENSPECT_TESTS_UTIL_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "tenspect/tenspect.hpp"

namespace testutil {

using tenspect::SparseTensor;
using tenspect::Vector;

inline SparseTensor make_tensor(int order, int dim,
                                const std::vector<std::pair<std::vector<int>, double>>& entries,
                                SparseTensor::Storage storage = SparseTensor::Storage::full) {
  std::vector<int> indices;
  std::vector<double> values;
  for (const auto& [ix, v] : entries) {
    indices.insert(indices.end(), ix.begin(), ix.end());
    values.push_back(v);
  }
  return SparseTensor(order, dim, std::move(indices), std::move(values), storage);
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Analytic positive H-eigenvector of the reducible example tensor:
// u2 = [mu^2, mu, 1] with mu the golden ratio, eigenvalue 1 at p = 3.
inline Vector example_u2() {
  const double mu = (1.0 + std::sqrt(5.0)) / 2.0;
  return {mu * mu, mu, 1.0};
}

inline Vector normalized(Vector x, double p) {
  const double n = tenspect::p_norm(x, p);
  for (double& v : x) v /= n;
  return x;
}

// Entry lookup by (expanded) index tuple, 0-based.
inline double value_at(const SparseTensor& t, std::vector<int> tuple) {
  if (t.symmetric_storage()) std::sort(tuple.begin(), tuple.end());
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    auto ix = t.index(e);
    if (std::equal(ix.begin(), ix.end(), tuple.begin(), tuple.end()))
      return t.value(e);
  }
  return 0.0;
}

}  // namespace testutil

#endif  // TENSPECT_TESTS_UTIL_HPP
