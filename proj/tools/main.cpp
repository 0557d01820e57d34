// proxent: closed-form proximal averages of entropy and energy on a robust
// Lambert W kernel, with moment-problem solvers, homotopy schedules and
// feasibility diagnostics. Emits CSV/JSON only; plotting stays external.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "proxent/averages.hpp"
#include "proxent/feasibility.hpp"
#include "proxent/kernels.hpp"
#include "proxent/moment_problem.hpp"
#include "proxent/solvers.hpp"

using nlohmann::json;
using namespace proxent;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadArgs = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitNumerical = 4;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_output(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << body;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(std::stoi(cell));
  return out;
}

bool parse_bool(const std::string& s) { return s == "1" || s == "true"; }

// Flat key-value config; command-line flags win over file values.
class ConfigMerge {
 public:
  ConfigMerge(const CLI::App* cmd, const std::string& path) : cmd_(cmd) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    kv_ = moment::flat_key_values(in);
  }

  const std::string* value(const std::string& flag) const {
    if (cmd_->count("--" + flag) > 0) return nullptr;
    const auto it = kv_.find(flag);
    return it == kv_.end() ? nullptr : &it->second;
  }

 private:
  const CLI::App* cmd_;
  std::map<std::string, std::string> kv_;
};

struct ProblemFlags {
  double shift = 0.6;
  int moments = 8;
  int quad = 20;
  std::string family = "proximal";
  std::vector<double> params{0.5};
  bool limiting = false;

  void attach(CLI::App* cmd, double default_shift) {
    shift = default_shift;
    cmd->add_option("--shift", shift,
                    "generator shift c in c + sin(3 pi s^2)/2");
    cmd->add_option("--moments", moments, "number of moment constraints")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--quad", quad, "quadrature order")
        ->check(CLI::Range(1, 256));
    cmd->add_option("--family", family, "average family")
        ->check(CLI::IsMember({"weighted", "proximal"}));
    cmd->add_option("--param", params, "family parameter(s) in [0,1]")
        ->delimiter(',');
    cmd->add_flag("--limiting", limiting,
                  "limiting semantics at the weighted t = 1 endpoint");
  }

  void apply_config(const ConfigMerge& cfg) {
    if (auto* v = cfg.value("shift")) shift = std::stod(*v);
    if (auto* v = cfg.value("moments")) moments = std::stoi(*v);
    if (auto* v = cfg.value("quad")) quad = std::stoi(*v);
    if (auto* v = cfg.value("family")) family = *v;
    if (auto* v = cfg.value("param")) params = parse_double_list(*v);
    if (auto* v = cfg.value("limiting")) limiting = parse_bool(*v);
    if (family != "weighted" && family != "proximal") {
      throw CLI::ValidationError("family", "must be weighted or proximal");
    }
  }

  averages::AverageSpec spec(double p) const {
    averages::AverageSpec s;
    s.family = family == "weighted" ? averages::Family::Weighted
                                    : averages::Family::Proximal;
    s.parameter = p;
    s.endpoint_mode = limiting ? averages::EndpointMode::Limiting
                               : averages::EndpointMode::Exact;
    s.validate();
    return s;
  }

  std::vector<double> sorted_params() const {
    auto p = params;
    std::sort(p.begin(), p.end());
    return p;
  }

  moment::MomentProblem problem(double p) const {
    moment::Generator gen;
    gen.base_shift = shift;
    return moment::MomentProblem(
        gen, spec(p), moments,
        quadrature::QuadratureRule::gauss_legendre(quad));
  }
};

struct SolverFlags {
  std::string method = "newton";
  double step = 1.0;
  int iters = 50;
  double tol = 1e-8;
  bool pure_newton = false;
  std::string start_path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--method", method, "solver")
        ->check(CLI::IsMember({"newton", "grad-dual", "grad-sos"}));
    cmd->add_option("--step", step, "gradient step-size modifier");
    cmd->add_option("--iters", iters, "iteration budget")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol", tol, "residual-norm stopping threshold");
    cmd->add_flag("--pure-newton", pure_newton,
                  "plain Newton steps, no globalization");
    cmd->add_option("--start", start_path,
                    "warm start: JSON file with a mu array (or a solve "
                    "result), or an inline JSON array");
  }

  void apply_config(const ConfigMerge& cfg) {
    if (auto* v = cfg.value("method")) method = *v;
    if (auto* v = cfg.value("step")) step = std::stod(*v);
    if (auto* v = cfg.value("iters")) iters = std::stoi(*v);
    if (auto* v = cfg.value("tol")) tol = std::stod(*v);
    if (auto* v = cfg.value("pure-newton")) pure_newton = parse_bool(*v);
    if (auto* v = cfg.value("start")) start_path = *v;
    if (method != "newton" && method != "grad-dual" && method != "grad-sos") {
      throw CLI::ValidationError("method", "unknown solver " + method);
    }
  }

  solvers::Method parsed_method() const {
    if (method == "newton") return solvers::Method::Newton;
    if (method == "grad-dual") return solvers::Method::GradDual;
    return solvers::Method::GradSOS;
  }

  solvers::SolverConfig config(int n_moments) const {
    solvers::SolverConfig cfg;
    cfg.method = parsed_method();
    cfg.step = step;
    cfg.max_iter = iters;
    cfg.tol = tol;
    cfg.pure_newton = pure_newton;
    if (!start_path.empty()) {
      json j;
      if (start_path.front() == '[') {
        j = json::parse(start_path);
      } else {
        std::ifstream in(start_path);
        if (!in) {
          throw CLI::ValidationError("--start",
                                     "cannot open file " + start_path);
        }
        in >> j;
      }
      const json& arr = j.is_array() ? j : j.at("mu");
      Eigen::VectorXd mu(arr.size());
      for (std::size_t i = 0; i < arr.size(); ++i) {
        mu(i) = arr[i].get<double>();
      }
      if (mu.size() != n_moments) {
        throw CLI::ValidationError("--start", "mu length != moments");
      }
      cfg.start = std::move(mu);
    }
    return cfg;
  }
};

json result_to_json(const solvers::SolveResult& res) {
  json j;
  j["mu"] = std::vector<double>(res.mu.data(), res.mu.data() + res.mu.size());
  j["residual_norm"] = res.residual_norm;
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  j["residual_history"] = res.residual_history;
  if (!res.failure_reason.empty()) j["failure_reason"] = res.failure_reason;
  return j;
}

// ----------------------------------------------------------------- eval --

int run_eval(const ProblemFlags& prob, const std::string& which,
             const std::vector<double>& grid, const std::string& out_path) {
  if (grid.size() != 3) {
    throw CLI::ValidationError("--grid", "need lo hi count");
  }
  const double lo = grid[0], hi = grid[1];
  const int count = static_cast<int>(grid[2]);
  if (count < 1 || (count > 1 && hi < lo)) {
    throw CLI::ValidationError("--grid", "bad range");
  }

  std::ostringstream csv;
  csv << "x,value,parameter,family\n";
  for (double p : prob.sorted_params()) {
    const auto spec = prob.spec(p);
    for (int i = 0; i < count; ++i) {
      const double x = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
      double v;
      if (which == "f") {
        v = averages::f_value(spec, x).value();
      } else if (which == "fstar") {
        v = averages::fstar_value(spec, x);
      } else {
        v = averages::fstar_prime(spec, x);
      }
      csv << fmt(x) << ',' << fmt(v) << ',' << fmt(p) << ',' << prob.family
          << '\n';
    }
  }
  write_output(out_path, csv.str());
  return kExitOk;
}

// ---------------------------------------------------------------- solve --

int run_solve(const ProblemFlags& prob, const SolverFlags& solver,
              bool strict, int samples, const std::string& out_path,
              const std::string& format) {
  const auto params = prob.sorted_params();
  if (format == "csv" && params.size() != 1) {
    throw CLI::ValidationError("--format",
                               "csv curve output needs a single --param");
  }

  json results = json::array();
  bool all_converged = true;
  std::string curve_csv;

  for (double p : params) {
    const auto problem = prob.problem(p);
    const auto res = solvers::solve(problem, solver.config(prob.moments));
    all_converged = all_converged && res.converged;

    json j = result_to_json(res);
    j["family"] = prob.family;
    j["parameter"] = p;
    j["limiting"] = prob.limiting;
    j["shift"] = prob.shift;
    j["moments"] = prob.moments;
    j["quad"] = prob.quad;
    j["method"] = solver.method;
    j["step"] = solver.step;
    j["tol"] = solver.tol;
    results.push_back(std::move(j));

    if (format == "csv") {
      std::vector<double> s(samples), x(samples);
      for (int i = 0; i < samples; ++i) {
        s[i] = samples == 1 ? 0.0 : static_cast<double>(i) / (samples - 1);
      }
      problem.primal_curve(res.mu, s, x);
      std::ostringstream csv;
      csv << "s,x_of_s\n";
      for (int i = 0; i < samples; ++i) {
        csv << fmt(s[i]) << ',' << fmt(x[i]) << '\n';
      }
      curve_csv = csv.str();
    }
  }

  if (format == "csv") {
    write_output(out_path, curve_csv);
  } else {
    const json out = results.size() == 1 ? results.front() : results;
    write_output(out_path, out.dump(2) + "\n");
  }
  return strict && !all_converged ? kExitNotConverged : kExitOk;
}

// ------------------------------------------------------------- homotopy --

struct HomotopyFlags {
  double delta = 0.1;
  int stages = 3;
  std::vector<int> budgets;
  int final_iters = 100;
  bool two_stage = false;
  bool table = false;
  std::vector<int> table_iters{100, 1100, 2100};

  void attach(CLI::App* cmd) {
    cmd->add_option("--delta", delta, "downward shift per stage");
    cmd->add_option("--stages", stages, "number of shifted stages (upsilon)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--budgets", budgets,
                    "per-stage gradient iteration budgets (last repeats)")
        ->delimiter(',');
    cmd->add_option("--final-iters", final_iters,
                    "final-stage budget when --budgets is not given")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--two-stage", two_stage,
                  "solve N = 0 then N = stages directly");
    cmd->add_flag("--table", table,
                  "emit the residual table over params x budgets");
    cmd->add_option("--table-iters", table_iters,
                    "final-stage budgets for --table columns")
        ->delimiter(',');
  }

  void apply_config(const ConfigMerge& cfg) {
    if (auto* v = cfg.value("delta")) delta = std::stod(*v);
    if (auto* v = cfg.value("stages")) stages = std::stoi(*v);
    if (auto* v = cfg.value("budgets")) budgets = parse_int_list(*v);
    if (auto* v = cfg.value("final-iters")) final_iters = std::stoi(*v);
    if (auto* v = cfg.value("two-stage")) two_stage = parse_bool(*v);
  }

  solvers::HomotopyConfig config(const SolverFlags& solver) const {
    solvers::HomotopyConfig h;
    h.delta = delta;
    h.stages = stages;
    h.two_stage = two_stage;
    h.inner.method = solver.parsed_method() == solvers::Method::Newton
                         ? solvers::Method::GradDual
                         : solver.parsed_method();
    h.inner.step = solver.step;
    h.inner.tol = solver.tol;
    h.stage0.tol = solver.tol;
    h.stage0.max_iter = 50;
    if (!budgets.empty()) {
      h.inner_iters = budgets;
    } else if (two_stage) {
      h.inner_iters = {final_iters};
    } else {
      h.inner_iters.assign(std::max(stages - 1, 0), 5);
      h.inner_iters.push_back(final_iters);
    }
    return h;
  }
};

int run_homotopy(const ProblemFlags& prob, const SolverFlags& solver,
                 const HomotopyFlags& hf, const std::string& out_path) {
  moment::Generator base;
  base.base_shift = prob.shift;

  if (hf.table) {
    // rows: parameter; columns: final-stage budget
    std::ostringstream csv;
    csv << "parameter";
    for (int it : hf.table_iters) csv << ',' << it;
    csv << '\n';
    for (double p : prob.sorted_params()) {
      const auto tmpl = prob.problem(p);
      csv << fmt(p);
      for (int it : hf.table_iters) {
        auto hcfg = hf.config(solver);
        if (hcfg.inner_iters.empty()) {
          hcfg.inner_iters = {it};
        } else {
          hcfg.inner_iters.back() = it;
        }
        const auto out = solvers::homotopy_solve(base, hcfg, tmpl);
        csv << ',' << fmt(out.stage_results.back().residual_norm);
      }
      csv << '\n';
    }
    write_output(out_path, csv.str());
    return kExitOk;
  }

  json runs = json::array();
  bool all_completed = true;
  for (double p : prob.sorted_params()) {
    const auto tmpl = prob.problem(p);
    const auto out = solvers::homotopy_solve(base, hf.config(solver), tmpl);
    all_completed = all_completed && out.completed;

    json stages = json::array();
    for (std::size_t k = 0; k < out.stage_results.size(); ++k) {
      json stage = result_to_json(out.stage_results[k]);
      stage["shift"] = out.shifts[k];
      stages.push_back(std::move(stage));
    }
    json j;
    j["family"] = prob.family;
    j["parameter"] = p;
    j["base_shift"] = prob.shift;
    j["delta"] = hf.delta;
    j["stages"] = std::move(stages);
    j["completed"] = out.completed;
    runs.push_back(std::move(j));
  }

  const json out = runs.size() == 1 ? runs.front() : runs;
  write_output(out_path, out.dump(2) + "\n");
  return all_completed ? kExitOk : kExitNumerical;
}

// ---------------------------------------------------------- feasibility --

int run_feasibility(const std::vector<double>& shifts, int moments,
                    int data_quad, const std::string& out_path) {
  json reports = json::array();
  for (double c : shifts) {
    moment::Generator gen;
    gen.base_shift = c;
    const auto sys = feasibility::build_system(
        moments, gen, quadrature::QuadratureRule::gauss_legendre(data_quad));
    const auto rep = feasibility::feasibility_report(sys);
    json j;
    j["shift"] = c;
    j["x"] = std::vector<double>(rep.x.data(), rep.x.data() + rep.x.size());
    j["min_component"] = rep.min_component;
    j["orthant_distance"] = rep.orthant_distance;
    j["condition_estimate"] = rep.condition_estimate;
    j["system_residual"] = rep.system_residual;
    j["classification"] =
        rep.classification == feasibility::Classification::FeasibleCertificate
            ? "feasible-certificate"
            : "indeterminate";
    reports.push_back(std::move(j));
  }
  const json out = reports.size() == 1 ? reports.front() : reports;
  write_output(out_path, out.dump(2) + "\n");
  return kExitOk;
}

// named example presets
void apply_solve_preset(const std::string& name, ProblemFlags& prob) {
  if (name.empty()) return;
  if (name == "example1") {
    prob.shift = 3.0 / 5.0;
  } else if (name == "example2") {
    prob.shift = 7.0 / 20.0;
  } else if (name == "example3") {
    prob.shift = 1.0 / 5.0;
  } else {
    throw CLI::ValidationError("--preset", "unknown preset " + name);
  }
}

void apply_homotopy_preset(const std::string& name, ProblemFlags& prob,
                           SolverFlags& solver, HomotopyFlags& hf) {
  if (name.empty()) return;
  prob.shift = 7.0 / 20.0;
  prob.family = "proximal";
  prob.params = {0.0, 0.25, 0.5, 0.75, 1.0};
  hf.delta = 0.1;
  hf.stages = 3;
  hf.table_iters = {100, 1100, 2100};
  if (name == "example5-sos") {
    solver.method = "grad-sos";
    solver.step = 0.1;
    hf.two_stage = false;
  } else if (name == "example5-dual") {
    solver.method = "grad-dual";
    solver.step = 1.0;
    hf.two_stage = true;
  } else {
    throw CLI::ValidationError("--preset", "unknown preset " + name);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "proximal averages of entropy and energy, moment-problem solvers, "
      "homotopy schedules, feasibility diagnostics"};
  app.require_subcommand(1);

  std::string out_path, format = "json", simd = "auto";
  app.add_option("--out", out_path, "output path (default stdout)");
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--simd", simd, "kernel backend override")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate f / f* / (f*)' on a grid");
  std::string eval_cfg;
  eval->add_option("--config", eval_cfg, "flat key=value config file");
  ProblemFlags eval_prob;
  eval_prob.attach(eval, 0.6);
  std::string which = "f";
  std::vector<double> grid{-5.0, 5.0, 201.0};
  eval->add_option("--which", which, "function to evaluate")
      ->check(CLI::IsMember({"f", "fstar", "fstar_prime"}));
  eval->add_option("--grid", grid, "lo hi count")->expected(3)->delimiter(',');

  // solve
  auto* solve = app.add_subcommand("solve", "solve one moment problem");
  std::string solve_cfg;
  solve->add_option("--config", solve_cfg, "flat key=value config file");
  ProblemFlags solve_prob;
  solve_prob.attach(solve, 0.6);
  SolverFlags solve_solver;
  solve_solver.attach(solve);
  bool strict = false;
  int samples = 201;
  std::string solve_preset;
  solve->add_flag("--strict", strict, "exit 3 when not converged");
  solve->add_option("--samples", samples, "primal curve sample count")
      ->check(CLI::PositiveNumber);
  solve->add_option("--preset", solve_preset,
                    "example1 | example2 | example3 (sets the shift)");

  // homotopy
  auto* hom = app.add_subcommand("homotopy", "sequence-of-problems schedule");
  std::string hom_cfg;
  hom->add_option("--config", hom_cfg, "flat key=value config file");
  ProblemFlags hom_prob;
  hom_prob.attach(hom, 7.0 / 20.0);
  SolverFlags hom_solver;
  hom_solver.method = "grad-dual";
  hom_solver.attach(hom);
  HomotopyFlags hom_flags;
  hom_flags.attach(hom);
  std::string hom_preset;
  hom->add_option("--preset", hom_preset, "example5-sos | example5-dual");

  // feasibility
  auto* feas =
      app.add_subcommand("feasibility", "square-system orthant diagnostic");
  std::string feas_cfg;
  feas->add_option("--config", feas_cfg, "flat key=value config file");
  std::vector<double> feas_shifts{7.0 / 20.0, 1.0 / 5.0, 1.0 / 20.0};
  int feas_moments = 8, feas_quad = 20;
  feas->add_option("--shift", feas_shifts, "generator shift c value(s)")
      ->delimiter(',');
  feas->add_option("--moments", feas_moments, "moments = abscissas")
      ->check(CLI::PositiveNumber);
  feas->add_option("--quad", feas_quad, "rule for the data vector b")
      ->check(CLI::Range(1, 256));

  // table: preset shortcut for the homotopy residual tables
  auto* table = app.add_subcommand("table", "preset residual tables");
  std::string table_preset = "example5-dual";
  table->add_option("--preset", table_preset, "example5-sos | example5-dual");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadArgs;
  }

  try {
    if (simd == "scalar") {
      kernels::force_backend(kernels::Backend::Scalar);
    } else if (simd == "avx2") {
      try {
        kernels::force_backend(kernels::Backend::Avx2);
      } catch (const std::runtime_error& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return kExitBadArgs;
      }
    }

    if (eval->parsed()) {
      const ConfigMerge cfg(eval, eval_cfg);
      eval_prob.apply_config(cfg);
      return run_eval(eval_prob, which, grid, out_path);
    }
    if (solve->parsed()) {
      apply_solve_preset(solve_preset, solve_prob);
      const ConfigMerge cfg(solve, solve_cfg);
      solve_prob.apply_config(cfg);
      solve_solver.apply_config(cfg);
      return run_solve(solve_prob, solve_solver, strict, samples, out_path,
                       format);
    }
    if (hom->parsed()) {
      apply_homotopy_preset(hom_preset, hom_prob, hom_solver, hom_flags);
      const ConfigMerge cfg(hom, hom_cfg);
      hom_prob.apply_config(cfg);
      hom_solver.apply_config(cfg);
      hom_flags.apply_config(cfg);
      return run_homotopy(hom_prob, hom_solver, hom_flags, out_path);
    }
    if (feas->parsed()) {
      const ConfigMerge cfg(feas, feas_cfg);
      if (auto* v = cfg.value("shift")) feas_shifts = parse_double_list(*v);
      if (auto* v = cfg.value("moments")) feas_moments = std::stoi(*v);
      if (auto* v = cfg.value("quad")) feas_quad = std::stoi(*v);
      return run_feasibility(feas_shifts, feas_moments, feas_quad, out_path);
    }
    if (table->parsed()) {
      ProblemFlags prob;
      SolverFlags solver;
      HomotopyFlags hf;
      hf.table = true;
      apply_homotopy_preset(table_preset, prob, solver, hf);
      return run_homotopy(prob, solver, hf, out_path);
    }
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitBadArgs;
  } catch (const feasibility::SingularSystemError& e) {
    std::cerr << "numerical failure: " << e.what() << " (condition "
              << e.condition() << ")\n";
    return kExitNumerical;
  } catch (const solvers::SingularJacobianError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
