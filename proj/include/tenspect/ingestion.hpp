#ifndef TENSPECT_INGESTION_HPP
#define TENSPECT_INGESTION_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tenspect/tensor.hpp"

namespace tenspect {

/// Edge set a motif tensor is built from. Arcs are 0-based, deduplicated and
/// free of self-loops; undirected graphs store both orientations.
struct MotifGraph {
  int n = 0;
  bool directed = false;
  std::vector<std::pair<int, int>> arcs;
};

struct DatasetStats {
  int n = 0;
  std::int64_t nnz_adjacency = 0;  // stored arcs
  std::int64_t nnz_tensor = 0;     // stored COO entries of the motif tensor
};

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline void finish_graph(MotifGraph& g) {
  std::sort(g.arcs.begin(), g.arcs.end());
  g.arcs.erase(std::unique(g.arcs.begin(), g.arcs.end()), g.arcs.end());
}

inline MotifGraph load_matrix_market(std::istream& in, const std::string& header,
                                     bool directed) {
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix" || format != "coordinate")
    throw std::runtime_error("edge list: only 'matrix coordinate' Matrix Market files are supported");
  if (field != "pattern" && field != "real" && field != "integer" && field != "double")
    throw std::runtime_error("edge list: unsupported Matrix Market field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    throw std::runtime_error("edge list: unsupported Matrix Market symmetry '" + symmetry + "'");
  const bool has_value = field != "pattern";
  const bool symmetrize = symmetry == "symmetric" || !directed;

  std::string line;
  long long rows = -1, cols = -1, declared = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    if (!(ls >> rows >> cols >> declared))
      throw std::runtime_error("edge list: malformed Matrix Market size line");
    break;
  }
  if (rows < 0) throw std::runtime_error("edge list: missing Matrix Market size line");
  if (rows != cols)
    throw std::runtime_error("edge list: adjacency matrix must be square");

  MotifGraph g;
  g.n = static_cast<int>(rows);
  g.directed = directed && symmetry != "symmetric";
  long long seen = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u >> v))
      throw std::runtime_error("edge list: malformed entry line '" + line + "'");
    if (has_value) {
      double w;
      if (!(ls >> w))
        throw std::runtime_error("edge list: missing value on line '" + line + "'");
    }
    if (u < 1 || u > rows || v < 1 || v > cols)
      throw std::runtime_error("edge list: index out of range on line '" + line + "'");
    ++seen;
    if (u == v) continue;
    g.arcs.emplace_back(static_cast<int>(u - 1), static_cast<int>(v - 1));
    if (symmetrize) g.arcs.emplace_back(static_cast<int>(v - 1), static_cast<int>(u - 1));
  }
  if (declared >= 0 && seen != declared)
    throw std::runtime_error("edge list: entry count does not match the size line");
  finish_graph(g);
  return g;
}

inline MotifGraph load_plain_edges(std::istream& in, const std::string& first,
                                   bool directed) {
  MotifGraph g;
  g.directed = directed;
  std::unordered_map<long long, int> ids;  // compacted in order of first appearance
  auto id_of = [&](long long raw) {
    auto [it, fresh] = ids.try_emplace(raw, static_cast<int>(ids.size()));
    (void)fresh;
    return it->second;
  };
  auto consume = [&](const std::string& line) {
    if (line.empty()) return;
    if (line[0] == '%' || line[0] == '#') return;
    if (line.find_first_not_of(" \t\r") == std::string::npos) return;
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u >> v))
      throw std::runtime_error("edge list: malformed line '" + line + "'");
    if (u < 0 || v < 0)
      throw std::runtime_error("edge list: negative node id on line '" + line + "'");
    if (u == v) return;
    const int a = id_of(u), b = id_of(v);
    g.arcs.emplace_back(a, b);
    if (!directed) g.arcs.emplace_back(b, a);
  };
  consume(first);
  std::string line;
  while (std::getline(in, line)) consume(line);
  g.n = static_cast<int>(ids.size());
  finish_graph(g);
  return g;
}

}  // namespace detail

/// Reads either a Matrix Market coordinate file (pattern/real, general or
/// symmetric) or a plain whitespace "u v" edge list. Symmetrization is
/// applied when the file declares symmetric storage or directed is false.
inline MotifGraph load_edge_list(std::istream& in, bool directed) {
  std::string first;
  while (std::getline(in, first)) {
    if (first.rfind("%%MatrixMarket", 0) == 0)
      return detail::load_matrix_market(in, first, directed);
    if (!first.empty() && first[0] != '%' && first[0] != '#' &&
        first.find_first_not_of(" \t\r") != std::string::npos)
      return detail::load_plain_edges(in, first, directed);
  }
  throw std::runtime_error("edge list: file has no edges");
}

inline MotifGraph load_edge_list(const std::string& path, bool directed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("edge list: cannot open '" + path + "'");
  return load_edge_list(in, directed);
}

/// Order-3 binary tensor with t_{ijk} = 1 exactly when the distinct nodes
/// i, j, k carry a closed directed walk of length three through all of them
/// (a triangle, in the undirected case). The value is set on all six
/// permutations of each such triple.
inline SparseTensor three_cycle_tensor(const MotifGraph& g) {
  const int n = g.n;
  std::vector<std::vector<int>> out(n);
  std::unordered_set<std::int64_t> arc_set;
  arc_set.reserve(g.arcs.size() * 2);
  for (auto [u, v] : g.arcs) {
    out[u].push_back(v);
    arc_set.insert(static_cast<std::int64_t>(u) * n + v);
  }
  auto has_arc = [&](int u, int v) {
    return arc_set.count(static_cast<std::int64_t>(u) * n + v) != 0;
  };

  std::unordered_set<std::int64_t> triples;
  for (int a = 0; a < n; ++a)
    for (int b : out[a]) {
      if (b == a) continue;
      for (int c : out[b]) {
        if (c == a || c == b) continue;
        if (!has_arc(c, a)) continue;
        int lo = std::min({a, b, c}), hi = std::max({a, b, c});
        int mid = a + b + c - lo - hi;
        triples.insert((static_cast<std::int64_t>(lo) * n + mid) * n + hi);
      }
    }

  std::vector<int> indices;
  std::vector<double> values;
  indices.reserve(triples.size() * 18);
  values.reserve(triples.size() * 6);
  for (std::int64_t key : triples) {
    int hi = static_cast<int>(key % n);
    int mid = static_cast<int>((key / n) % n);
    int lo = static_cast<int>(key / n / n);
    int p[3] = {lo, mid, hi};
    std::sort(p, p + 3);
    do {
      indices.insert(indices.end(), {p[0], p[1], p[2]});
      values.push_back(1.0);
    } while (std::next_permutation(p, p + 3));
  }
  return SparseTensor(3, n, std::move(indices), std::move(values));
}

inline DatasetStats dataset_stats(const MotifGraph& g, const SparseTensor& t) {
  return {g.n, static_cast<std::int64_t>(g.arcs.size()),
          static_cast<std::int64_t>(t.nnz())};
}

/// a_{1jj} = 1 for 2 <= j <= n and a_{i11} = 1 for 2 <= i <= n.
inline SparseTensor tensor_a(int n) {
  if (n < 2) throw std::invalid_argument("tensor_a: n must be >= 2");
  std::vector<int> indices;
  std::vector<double> values;
  for (int j = 1; j < n; ++j) {
    indices.insert(indices.end(), {0, j, j});
    values.push_back(1.0);
  }
  for (int i = 1; i < n; ++i) {
    indices.insert(indices.end(), {i, 0, 0});
    values.push_back(1.0);
  }
  return SparseTensor(3, n, std::move(indices), std::move(values));
}

/// b_{ijj} = i + j (1-based) for i != j.
inline SparseTensor tensor_b(int n) {
  if (n < 2) throw std::invalid_argument("tensor_b: n must be >= 2");
  std::vector<int> indices;
  std::vector<double> values;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      indices.insert(indices.end(), {i, j, j});
      values.push_back(static_cast<double>(i + j + 2));
    }
  return SparseTensor(3, n, std::move(indices), std::move(values));
}

/// c_{1nn} = 1, c_{i11} = 1 for 2 <= i <= n, c_{njj} = 1 for 1 <= j <= n-1.
inline SparseTensor tensor_c(int n) {
  if (n < 2) throw std::invalid_argument("tensor_c: n must be >= 2");
  std::vector<std::array<int, 3>> tuples;
  tuples.push_back({0, n - 1, n - 1});
  for (int i = 1; i < n; ++i) tuples.push_back({i, 0, 0});
  for (int j = 0; j < n - 1; ++j) tuples.push_back({n - 1, j, j});
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  std::vector<int> indices;
  std::vector<double> values;
  for (auto& tp : tuples) {
    indices.insert(indices.end(), tp.begin(), tp.end());
    values.push_back(1.0);
  }
  return SparseTensor(3, n, std::move(indices), std::move(values));
}

/// The 3x3x3x3 symmetric test tensor of Kofidis and Regalia, given by one
/// representative value per index multiset; with `absolute` the entrywise
/// absolute value is taken.
inline SparseTensor kofidis_regalia_tensor(bool absolute) {
  struct Rep {
    int i, j, k, l;
    double v;
  };
  static constexpr Rep reps[] = {
      {1, 1, 1, 1, 0.2883}, {1, 1, 1, 2, -0.0031}, {1, 1, 1, 3, 0.1973},
      {1, 1, 2, 2, -0.2485}, {1, 1, 2, 3, -0.2939}, {1, 1, 3, 3, 0.3847},
      {1, 2, 2, 2, 0.2972}, {1, 2, 2, 3, 0.1862},  {1, 2, 3, 3, 0.0919},
      {1, 3, 3, 3, -0.3619}, {2, 2, 2, 2, 0.1241}, {2, 2, 2, 3, -0.3420},
      {2, 2, 3, 3, 0.2127}, {2, 3, 3, 3, 0.2727},  {3, 3, 3, 3, -0.3054},
  };
  std::vector<int> indices;
  std::vector<double> values;
  for (const Rep& r : reps) {
    indices.insert(indices.end(), {r.i - 1, r.j - 1, r.k - 1, r.l - 1});
    values.push_back(absolute ? std::abs(r.v) : r.v);
  }
  return SparseTensor(4, 3, std::move(indices), std::move(values),
                      SparseTensor::Storage::symmetric);
}

/// The reducible 3x3x3 example tensor, read off its three frontal slices.
inline SparseTensor example_reducible_tensor() {
  std::vector<int> indices{
      0, 2, 0,  // slice 1
      1, 2, 0,
      0, 1, 1,  // slice 2
      0, 1, 2,  // slice 3
      2, 2, 2,
  };
  std::vector<double> values{1.0, 1.0, 1.0, 1.0, 1.0};
  return SparseTensor(3, 3, std::move(indices), std::move(values));
}

}  // namespace tenspect

#endif  // TENSPECT_INGESTION_HPP
