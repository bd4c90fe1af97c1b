// Command-line front end: build or load a nonnegative tensor, run the plain
// or extrapolated shifted power iteration, and emit machine-readable traces
// and summaries.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tenspect/tenspect.hpp"

namespace {

using nlohmann::json;
using namespace tenspect;

struct ProblemOpts {
  std::string generator;
  std::string tensor_file;
  std::string graph_file;
  bool directed = false;
  int n = 10;
};

struct RunOpts {
  double p = 3.00001;
  double sigma = 0.0;
  std::string variant = "alg1";
  double tol = 1e-10;
  int max_iter = 10000;
  std::uint64_t seed = 0;
  std::string stop_on = "stepdiff";
  bool extrapolate = false;
  int two_h = 6;
  int cycles = 3;
  std::string y_policy = "last-extrapolated";
  bool deterministic = false;
  std::string trace_out;
  std::string summary_out;
};

void add_problem_flags(CLI::App* cmd, ProblemOpts& po) {
  cmd->add_option("--generator", po.generator,
                  "Built-in problem: example310|tensorA|tensorB|tensorC|kofidis-abs")
      ->check(CLI::IsMember({"example310", "tensorA", "tensorB", "tensorC", "kofidis-abs"}));
  cmd->add_option("--n", po.n, "Mode size for the tensorA/B/C generators");
  cmd->add_option("--tensor-file", po.tensor_file, "Tensor in the text COO format");
  cmd->add_option("--graph", po.graph_file,
                  "Graph file (Matrix Market or plain edge list); a three-cycle tensor is built");
  auto* dir = cmd->add_flag("--directed", po.directed, "Treat the graph as directed");
  cmd->add_flag("--undirected{false}", po.directed, "Treat the graph as undirected")
      ->excludes(dir);
}

void add_run_flags(CLI::App* cmd, RunOpts& ro) {
  cmd->add_option("--p", ro.p, "Norm exponent p > 1");
  cmd->add_option("--sigma", ro.sigma, "Shift sigma >= 0");
  cmd->add_option("--variant", ro.variant, "Iteration variant")
      ->check(CLI::IsMember({"alg1", "alg2"}));
  cmd->add_option("--tol", ro.tol, "Stopping tolerance");
  cmd->add_option("--max-iter", ro.max_iter, "Iteration cap");
  cmd->add_option("--seed", ro.seed, "Seed for the random positive start");
  cmd->add_option("--stop-on", ro.stop_on, "Stopping criterion")
      ->check(CLI::IsMember({"stepdiff", "residual"}));
  cmd->add_flag("--extrapolate", ro.extrapolate, "Run the restarted extrapolated method");
  cmd->add_option("--two-h", ro.two_h, "Inner power steps per cycle (even)");
  cmd->add_option("--cycles", ro.cycles, "Number of restart cycles");
  cmd->add_option("--y-policy", ro.y_policy, "Functional vector update policy")
      ->check(CLI::IsMember({"last-extrapolated", "fixed-x0"}));
  cmd->add_flag("--deterministic", ro.deterministic,
                "Zero wall-clock fields so identical runs produce identical bytes");
  cmd->add_option("--trace-out", ro.trace_out, "Per-iteration CSV output path");
  cmd->add_option("--summary-out", ro.summary_out, "JSON summary path (stdout if omitted)");
  cmd->set_config("--config", "", "Configuration file with key=value lines");
}

struct Problem {
  SparseTensor tensor;
  json source;
};

Problem load_problem(const ProblemOpts& po) {
  const int given = !po.generator.empty() + !po.tensor_file.empty() + !po.graph_file.empty();
  if (given != 1)
    throw CLI::ValidationError(
        "problem", "exactly one of --generator, --tensor-file, --graph is required");
  if (!po.generator.empty()) {
    json src{{"kind", "generator"}, {"name", po.generator}};
    if (po.generator == "example310") return {example_reducible_tensor(), src};
    if (po.generator == "kofidis-abs") return {kofidis_regalia_tensor(true), src};
    src["n"] = po.n;
    if (po.generator == "tensorA") return {tensor_a(po.n), src};
    if (po.generator == "tensorB") return {tensor_b(po.n), src};
    return {tensor_c(po.n), src};
  }
  if (!po.tensor_file.empty()) {
    std::ifstream in(po.tensor_file);
    if (!in) throw std::runtime_error("cannot open tensor file '" + po.tensor_file + "'");
    return {read_tensor_text(in),
            json{{"kind", "tensor-file"}, {"path", po.tensor_file}}};
  }
  const MotifGraph g = load_edge_list(po.graph_file, po.directed);
  SparseTensor t = three_cycle_tensor(g);
  const DatasetStats stats = dataset_stats(g, t);
  return {std::move(t),
          json{{"kind", "graph"},
               {"path", po.graph_file},
               {"directed", po.directed},
               {"nodes", stats.n},
               {"nnz_adjacency", stats.nnz_adjacency},
               {"nnz_tensor", stats.nnz_tensor}}};
}

SolveConfig make_config(const RunOpts& ro) {
  SolveConfig cfg;
  cfg.p = ro.p;
  cfg.sigma = ro.sigma;
  cfg.variant = ro.variant == "alg2" ? Variant::alg2 : Variant::alg1;
  cfg.tol = ro.tol;
  cfg.max_iter = ro.max_iter;
  cfg.seed = ro.seed;
  cfg.stop = ro.stop_on == "residual" ? StopRule::residual : StopRule::step_diff;
  return cfg;
}

RestartConfig make_restart_config(const RunOpts& ro) {
  if (ro.two_h < 2 || ro.two_h % 2 != 0)
    throw CLI::ValidationError("--two-h", "must be an even integer >= 2");
  RestartConfig rc;
  rc.h = ro.two_h / 2;
  rc.cycles = ro.cycles;
  rc.y_policy = ro.y_policy == "fixed-x0" ? YPolicy::fixed : YPolicy::last_extrapolated;
  return rc;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(const std::string& path, const IterationTrace& tr,
                     bool deterministic) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace output '" + path + "'");
  out << "k,lambda_k,residual_inf,step_diff_p,restart_flag,"
         "cumulative_map_applications,wall_ns\n";
  for (const auto& s : tr.steps)
    out << s.k << ',' << fmt_double(s.lambda) << ',' << fmt_double(s.residual) << ','
        << fmt_double(s.step_diff) << ',' << (s.restart ? 1 : 0) << ','
        << s.map_applications << ',' << (deterministic ? 0 : s.wall_ns) << '\n';
}

json config_echo(const RunOpts& ro) {
  return json{{"p", ro.p},
              {"sigma", ro.sigma},
              {"variant", ro.variant},
              {"tol", ro.tol},
              {"max_iter", ro.max_iter},
              {"seed", ro.seed},
              {"stop_on", ro.stop_on},
              {"extrapolate", ro.extrapolate},
              {"two_h", ro.two_h},
              {"cycles", ro.cycles},
              {"y_policy", ro.y_policy},
              {"deterministic", ro.deterministic}};
}

json result_summary(const SolveResult& res, const RunOpts& ro) {
  const IterationTrace& tr = res.trace;
  return json{{"lambda", res.lambda},
              {"residual", tr.steps.empty() ? 0.0 : tr.steps.back().residual},
              {"iterations", tr.steps.empty() ? 0 : tr.steps.back().k},
              {"converged", tr.converged},
              {"map_applications", tr.map_applications},
              {"wall_ns", ro.deterministic ? 0 : tr.wall_ns},
              {"breakdown_events", tr.breakdown_events},
              {"fallback_events", tr.fallback_events},
              {"seed", tr.seed},
              {"warnings", tr.warnings}};
}

void emit_summary(const json& summary, const std::string& path) {
  if (path.empty()) {
    std::cout << summary.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open summary output '" + path + "'");
  out << summary.dump(2) << '\n';
}

int run_solve(const ProblemOpts& po, const RunOpts& ro) {
  const Problem prob = load_problem(po);
  const SolveConfig cfg = make_config(ro);
  SolveResult res = ro.extrapolate
                        ? restarted_solve(prob.tensor, cfg, make_restart_config(ro))
                        : solve(prob.tensor, cfg);
  for (const std::string& w : res.trace.warnings) std::cerr << "warning: " << w << '\n';
  if (!ro.trace_out.empty()) write_trace_csv(ro.trace_out, res.trace, ro.deterministic);
  json summary{{"problem", prob.source},
               {"config", config_echo(ro)},
               {"result", result_summary(res, ro)}};
  emit_summary(summary, ro.summary_out);
  return 0;
}

int run_compare(const ProblemOpts& po, RunOpts ro, double target_residual) {
  const Problem prob = load_problem(po);

  SolveConfig plain_cfg = make_config(ro);
  plain_cfg.stop = StopRule::residual;
  plain_cfg.tol = target_residual;
  const SolveResult plain = solve(prob.tensor, plain_cfg);

  RestartConfig rc = make_restart_config(ro);
  rc.target_residual = target_residual;
  if (rc.cycles * 2 * rc.h < ro.max_iter)
    rc.cycles = std::max(rc.cycles, (ro.max_iter + 2 * rc.h - 1) / (2 * rc.h));
  const SolveConfig ex_cfg = make_config(ro);
  const SolveResult extra = restarted_solve(prob.tensor, ex_cfg, rc);

  if (!ro.trace_out.empty()) {
    write_trace_csv(ro.trace_out + ".plain.csv", plain.trace, ro.deterministic);
    write_trace_csv(ro.trace_out + ".extrapolated.csv", extra.trace, ro.deterministic);
  }
  auto leg = [&](const SolveResult& r) {
    json j = result_summary(r, ro);
    j["reached_target"] = r.trace.converged;
    return j;
  };
  json summary{{"problem", prob.source},
               {"config", config_echo(ro)},
               {"target_residual", target_residual},
               {"plain", leg(plain)},
               {"extrapolated", leg(extra)}};
  if (plain.trace.converged && extra.trace.converged) {
    summary["speedup_map_applications"] =
        static_cast<double>(plain.trace.map_applications) /
        static_cast<double>(extra.trace.map_applications);
    if (!ro.deterministic && extra.trace.wall_ns > 0)
      summary["speedup_wall"] = static_cast<double>(plain.trace.wall_ns) /
                                static_cast<double>(extra.trace.wall_ns);
  }
  emit_summary(summary, ro.summary_out);
  return 0;
}

int run_continuity(const ProblemOpts& po, const RunOpts& ro, std::vector<double> eps_grid) {
  if (po.generator != "example310")
    throw CLI::ValidationError(
        "--generator", "continuity needs a problem with a built-in reference (example310)");
  const Problem prob = load_problem(po);
  const double mu = (1.0 + std::sqrt(5.0)) / 2.0;
  const Vector reference{mu * mu, mu, 1.0};
  const double d = prob.tensor.order();

  if (eps_grid.empty()) eps_grid = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  std::sort(eps_grid.rbegin(), eps_grid.rend());

  std::vector<double> dists;
  std::vector<Vector> solutions;
  for (double eps : eps_grid) {
    RunOpts local = ro;
    local.p = d + eps;
    SolveConfig cfg = make_config(local);
    const SolveResult res = solve(prob.tensor, cfg);
    dists.push_back(hilbert_distance(res.u, reference));
    solutions.push_back(res.u);
  }

  if (!ro.trace_out.empty()) {
    std::ofstream out(ro.trace_out);
    if (!out) throw std::runtime_error("cannot open trace output '" + ro.trace_out + "'");
    out << "epsilon,hilbert_distance";
    for (int i = 1; i <= prob.tensor.dim(); ++i) out << ",x" << i;
    out << '\n';
    for (std::size_t r = 0; r < eps_grid.size(); ++r) {
      out << fmt_double(eps_grid[r]) << ',' << fmt_double(dists[r]);
      for (double v : solutions[r]) out << ',' << fmt_double(v);
      out << '\n';
    }
  }

  // least-squares slope of log d_H against log eps
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto m = static_cast<double>(eps_grid.size());
  for (std::size_t r = 0; r < eps_grid.size(); ++r) {
    const double lx = std::log(eps_grid[r]), ly = std::log(dists[r]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

  json points = json::array();
  for (std::size_t r = 0; r < eps_grid.size(); ++r)
    points.push_back({{"epsilon", eps_grid[r]}, {"hilbert_distance", dists[r]}});
  json summary{{"problem", prob.source},
               {"config", config_echo(ro)},
               {"slope", slope},
               {"points", points}};
  emit_summary(summary, ro.summary_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perron eigenpairs of nonnegative tensors via shifted power iterations "
               "with restarted epsilon-extrapolation"};
  app.require_subcommand(1);

  ProblemOpts solve_po, compare_po, cont_po;
  RunOpts solve_ro, compare_ro, cont_ro;
  double target_residual = 1e-9;
  std::vector<double> eps_grid;

  CLI::App* cmd_solve = app.add_subcommand("solve", "Run one plain or extrapolated solve");
  add_problem_flags(cmd_solve, solve_po);
  add_run_flags(cmd_solve, solve_ro);

  CLI::App* cmd_compare = app.add_subcommand(
      "compare", "Run plain and extrapolated legs from the same start and report speedup");
  add_problem_flags(cmd_compare, compare_po);
  add_run_flags(cmd_compare, compare_ro);
  cmd_compare->add_option("--target-residual", target_residual,
                          "Residual both legs must reach");

  CLI::App* cmd_cont = app.add_subcommand(
      "continuity", "Sweep p = d + eps and report distances to the reference eigenvector");
  add_problem_flags(cmd_cont, cont_po);
  add_run_flags(cmd_cont, cont_ro);
  cmd_cont->add_option("--eps", eps_grid, "Epsilon grid (descending log grid by default)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_solve->parsed()) return run_solve(solve_po, solve_ro);
    if (cmd_compare->parsed()) return run_compare(compare_po, compare_ro, target_residual);
    return run_continuity(cont_po, cont_ro, eps_grid);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
