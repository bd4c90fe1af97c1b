#ifndef TENSPECT_EXTRAPOLATION_HPP
#define TENSPECT_EXTRAPOLATION_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tenspect/spectral.hpp"
#include "tenspect/tensor.hpp"

namespace tenspect {

/// Wynn's scalar epsilon algorithm, one diagonal per input term.
///
/// Cells follow the rhombus rule e_{j+1}^{(i)} = e_{j-1}^{(i+1)} +
/// 1/(e_j^{(i+1)} - e_j^{(i)}). A division whose denominator falls below
/// breakdown_rel times the operand scale marks the cell `infinite`; cells
/// downstream of an infinite pair treat the reciprocal as zero, which lets
/// even columns survive an exactly converged (constant) tail. Cells that
/// cannot be recovered are `dead`.
class ScalarEpsilonTable {
 public:
  enum class CellState : unsigned char { ok, infinite, dead };
  struct Cell {
    double value = 0.0;
    CellState state = CellState::dead;
  };

  explicit ScalarEpsilonTable(double breakdown_rel = 1e-14)
      : breakdown_rel_(breakdown_rel) {}

  void push(double s) {
    const std::size_t m = diagonals_.size();
    std::vector<Cell> diag(m + 1);
    diag[0] = {s, CellState::ok};
    for (std::size_t j = 1; j <= m; ++j) {
      const Cell& a = diagonals_[m - 1][j - 1];  // e_{j-1}^{(m-j)}
      const Cell& b = diag[j - 1];               // e_{j-1}^{(m-j+1)}
      const Cell parent = j >= 2 ? diag[j - 2] : Cell{0.0, CellState::ok};
      diag[j] = combine(parent, a, b);
    }
    diagonals_.push_back(std::move(diag));
  }

  int terms() const { return static_cast<int>(diagonals_.size()); }

  bool has(int column, int index) const {
    return column >= 0 && index >= 0 && column + index < terms();
  }

  /// Cell e_column^{(index)}.
  Cell cell(int column, int index) const {
    if (!has(column, index)) throw std::out_of_range("ScalarEpsilonTable::cell");
    return diagonals_[column + index][column];
  }

  double breakdown_rel() const { return breakdown_rel_; }

 private:
  Cell combine(const Cell& parent, const Cell& a, const Cell& b) const {
    if (a.state == CellState::dead || b.state == CellState::dead ||
        parent.state == CellState::dead)
      return {0.0, CellState::dead};
    if (a.state == CellState::infinite || b.state == CellState::infinite)
      return parent;  // reciprocal of an unbounded difference vanishes
    const double denom = b.value - a.value;
    const double scale = std::max(std::abs(a.value), std::abs(b.value));
    if (!std::isfinite(denom) || std::abs(denom) <= breakdown_rel_ * scale)
      return {0.0, CellState::infinite};
    if (parent.state == CellState::infinite) return {0.0, CellState::infinite};
    const double v = parent.value + 1.0 / denom;
    if (!std::isfinite(v)) return {0.0, CellState::infinite};
    return {v, CellState::ok};
  }

  double breakdown_rel_;
  std::vector<std::vector<Cell>> diagonals_;
};

/// Runs the scalar epsilon algorithm over a whole sequence (at least three terms).
inline ScalarEpsilonTable wynn_epsilon(std::span<const double> scalars,
                                       double breakdown_rel = 1e-14) {
  if (scalars.size() < 3)
    throw std::invalid_argument("wynn_epsilon: need at least 3 terms");
  ScalarEpsilonTable table(breakdown_rel);
  for (double s : scalars) table.push(s);
  return table;
}

struct Stea2Result {
  Vector value;
  int depth = 0;        // deepest even column reached, as a multiple of 2
  bool breakdown = false;
};

/// Incremental triangular scheme for the second simplified topological
/// epsilon transformation. Iterates stream in one by one; after 2h+1 pushes
/// the extrapolated vector z_{2h}^{(0)} can be extracted. Holds at most h+2
/// full-length vectors at any time (one rolling diagonal plus a workspace);
/// the scalar table grows separately and is cheap.
class Stea2State {
 public:
  Stea2State(int h, Vector y, double breakdown_rel = 1e-14)
      : h_(h),
        y_(std::move(y)),
        eps_(breakdown_rel),
        z_(static_cast<std::size_t>(h) + 1),
        cur_ok_(static_cast<std::size_t>(h) + 1, 0),
        prev_ok_(static_cast<std::size_t>(h) + 1, 0),
        ever_(static_cast<std::size_t>(h) + 1, 0) {
    if (h < 1) throw std::invalid_argument("Stea2State: h must be >= 1");
    if (inf_norm(y_) == 0.0)
      throw std::invalid_argument("Stea2State: functional vector y must be nonzero");
  }

  int capacity() const { return 2 * h_ + 1; }
  int pushed() const { return pushed_; }
  bool complete() const { return pushed_ == capacity(); }

  void push(const Vector& x) {
    if (complete()) throw std::logic_error("Stea2State: sequence already complete");
    if (x.size() != y_.size())
      throw std::invalid_argument("Stea2State: iterate length mismatch");
    const int m = pushed_++;
    eps_.push(dot(y_, x));
    prev_ok_ = cur_ok_;
    std::fill(cur_ok_.begin(), cur_ok_.end(), char{0});

    if (m > 0) std::swap(saved_, z_[0]);  // saved_ := z_0^{(m-1)}
    z_[0] = x;
    cur_ok_[0] = 1;
    ever_[0] = 1;

    const int jmax = std::min(h_, m / 2);
    for (int j = 1; j <= jmax; ++j) {
      if (!cur_ok_[j - 1] || !prev_ok_[j - 1]) break;  // truncated diagonal
      const auto top = eps_.cell(2 * j, m - 2 * j);
      const auto left = eps_.cell(2 * j - 2, m - 2 * j + 1);
      const auto below = eps_.cell(2 * j - 2, m - 2 * j + 2);
      if (top.state != ScalarEpsilonTable::CellState::ok ||
          left.state != ScalarEpsilonTable::CellState::ok ||
          below.state != ScalarEpsilonTable::CellState::ok)
        break;
      const double denom = below.value - left.value;
      const double scale = std::max(std::abs(below.value), std::abs(left.value));
      if (!std::isfinite(denom) || std::abs(denom) <= eps_.breakdown_rel() * scale)
        break;
      const double ratio = (top.value - left.value) / denom;
      // saved_ holds z_{2j-2}^{(m-2j+1)}, z_[j-1] the fresh z_{2j-2}^{(m-2j+2)}
      for (std::size_t i = 0; i < saved_.size(); ++i)
        saved_[i] += ratio * (z_[j - 1][i] - saved_[i]);
      std::swap(saved_, z_[j]);  // z_[j] := new cell, saved_ := old z_[j]
      cur_ok_[j] = 1;
      ever_[j] = 1;
    }

    int live = saved_.empty() ? 0 : 1;
    for (const Vector& v : z_)
      if (!v.empty()) ++live;
    peak_live_ = std::max(peak_live_, live);
  }

  /// Deepest valid column value; the target z_{2h}^{(0)} unless a breakdown
  /// truncated the scheme, in which case the flag is set.
  Stea2Result extract() const {
    if (!complete()) throw std::logic_error("Stea2State: sequence not complete");
    int depth = 0;
    for (int j = h_; j >= 0; --j)
      if (ever_[j]) {
        depth = j;
        break;
      }
    return {z_[depth], 2 * depth, depth < h_};
  }

  const ScalarEpsilonTable& scalar_table() const { return eps_; }
  int peak_live_vectors() const { return peak_live_; }

 private:
  int h_;
  Vector y_;
  ScalarEpsilonTable eps_;
  std::vector<Vector> z_;
  std::vector<char> cur_ok_, prev_ok_, ever_;
  Vector saved_;
  int pushed_ = 0;
  int peak_live_ = 0;
};

/// One-shot transformation of exactly 2h+1 iterates.
inline Stea2Result stea2_extrapolate(std::span<const Vector> xs, const Vector& y,
                                     int h) {
  if (h < 1) throw std::invalid_argument("stea2_extrapolate: h must be >= 1");
  if (xs.size() != static_cast<std::size_t>(2 * h + 1))
    throw std::invalid_argument("stea2_extrapolate: need exactly 2h+1 iterates");
  Stea2State state(h, y);
  for (const Vector& x : xs) state.push(x);
  return state.extract();
}

enum class YPolicy { last_extrapolated, fixed };

struct RestartConfig {
  int h = 3;        // 2h inner power steps per cycle
  int cycles = 3;
  YPolicy y_policy = YPolicy::last_extrapolated;
  std::optional<Vector> fixed_y;
  double target_residual = 0.0;  // stop early once the residual drops below; 0 disables
};

namespace detail {

// Clamp tiny negative entries of an extrapolated vector to zero; large
// violations or non-finite entries reject the vector.
inline bool project_to_cone(Vector& v) {
  double scale = 0.0;
  for (double c : v) {
    if (!std::isfinite(c)) return false;
    scale = std::max(scale, std::abs(c));
  }
  if (scale == 0.0) return false;
  const double tol = 1e-13 * scale;
  for (double& c : v) {
    if (c < -tol) return false;
    if (c < 0.0) c = 0.0;
  }
  return true;
}

}  // namespace detail

/// Restarted extrapolation: per cycle run 2h power steps, extrapolate the
/// recorded iterates, and restart from the (re-projected, normalized)
/// extrapolated vector. Restart points are flagged in the trace.
inline SolveResult restarted_solve(const SparseTensor& t, const SolveConfig& cfg,
                                   const RestartConfig& rcfg) {
  detail::require_valid(cfg);
  if (rcfg.h < 1) throw std::invalid_argument("restarted_solve: h must be >= 1");
  if (rcfg.cycles < 1) throw std::invalid_argument("restarted_solve: cycles must be >= 1");
  if (!t.nonnegative())
    throw std::invalid_argument("restarted_solve: tensor must be entrywise nonnegative");
  const ConePattern cone = cone_pattern(t);
  if (cone.empty())
    throw std::runtime_error("restarted_solve: the cone of preserved positive patterns is empty");

  const PNorm pn(cfg.p);
  SolveResult out;
  IterationTrace& tr = out.trace;
  tr.seed = cfg.seed;
  if (cfg.p <= static_cast<double>(t.order()))
    tr.warnings.push_back("p <= number of modes: convergence is not guaranteed");

  Vector x = detail::initial_iterate(t, cfg);
  std::vector<char> pattern(t.dim(), 1);
  bool pattern_stable = pattern == cone.support;

  Vector y = (rcfg.y_policy == YPolicy::fixed && rcfg.fixed_y) ? *rcfg.fixed_y : x;
  if (static_cast<int>(y.size()) != t.dim() || inf_norm(y) == 0.0)
    throw std::invalid_argument("restarted_solve: invalid fixed functional vector");

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ns = [&] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  int k = 0;
  bool at_restart = false;
  double diff = 0.0;
  double lambda = 0.0, res = 0.0;

  // Records the row for the current x using one map application; returns
  // true when the early-stop target is met.
  auto record_row = [&](const Vector& z) {
    lambda = dot(x, z);
    const Vector phi = duality_map(x, pn.p);
    res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      res = std::max(res, std::abs(z[i] - lambda * phi[i]));
    tr.steps.push_back({k, lambda, res, k == 0 ? 0.0 : diff, at_restart,
                        tr.map_applications, elapsed_ns()});
    if (cfg.record_iterates) tr.iterates.push_back(x);
    at_restart = false;
    return rcfg.target_residual > 0.0 && res < rcfg.target_residual;
  };

  for (int cycle = 0; cycle < rcfg.cycles; ++cycle) {
    Stea2State state(rcfg.h, y);
    state.push(x);
    for (int j = 1; j <= 2 * rcfg.h; ++j) {
      const Vector z = t.apply(x);
      ++tr.map_applications;
      if (record_row(z)) {
        tr.converged = true;
        out.lambda = lambda;
        out.u = std::move(x);
        tr.wall_ns = elapsed_ns();
        return out;
      }
      std::vector<char> zpat = pattern_stable ? pattern : detail::bool_apply(t, pattern);
      Vector ynew = detail::shifted_update(z, zpat, x, pn, cfg.sigma, cfg.variant);
      const double ny = p_norm(ynew, pn.p);
      if (ny == 0.0 || !std::isfinite(ny))
        throw std::runtime_error("restarted_solve: map produced a zero or non-finite iterate");
      for (double& v : ynew) v /= ny;
      Vector d(ynew.size());
      for (std::size_t i = 0; i < ynew.size(); ++i) d[i] = ynew[i] - x[i];
      diff = p_norm(d, pn.p);
      x = std::move(ynew);
      if (!pattern_stable) {
        pattern = std::move(zpat);
        pattern_stable = pattern == cone.support;
      }
      ++k;
      state.push(x);
    }

    Stea2Result ex = state.extract();
    if (ex.breakdown) ++tr.breakdown_events;
    Vector cand = std::move(ex.value);
    if (detail::project_to_cone(cand)) {
      const double nc = p_norm(cand, pn.p);
      for (double& v : cand) v /= nc;
      Vector d(cand.size());
      for (std::size_t i = 0; i < cand.size(); ++i) d[i] = cand[i] - x[i];
      diff = p_norm(d, pn.p);
      x = std::move(cand);
      pattern = detail::nonzero_pattern(x);
      pattern_stable = pattern == cone.support;
    } else {
      ++tr.fallback_events;  // keep the last plain iterate for this cycle
    }
    at_restart = true;
    if (rcfg.y_policy == YPolicy::last_extrapolated) y = x;
  }

  // one extra application to report the final restart point
  const Vector z = t.apply(x);
  ++tr.map_applications;
  if (record_row(z)) tr.converged = true;
  tr.converged = tr.converged ||
                 res < (rcfg.target_residual > 0.0 ? rcfg.target_residual : cfg.tol);
  out.lambda = lambda;
  out.u = std::move(x);
  tr.wall_ns = elapsed_ns();
  return out;
}

}  // namespace tenspect

#endif  // TENSPECT_EXTRAPOLATION_HPP
