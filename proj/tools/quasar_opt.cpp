// quasar-opt: benchmark driver for the continuized optimizers and baselines.
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "quasar/bench.hpp"
#include "quasar/continuized.hpp"
#include "quasar/problem_io.hpp"
#include "quasar/quasar_analysis.hpp"

namespace fs = std::filesystem;
using namespace quasar;

namespace {

struct ProblemFlags {
  std::string link = "logistic";
  double alpha = 0.5;
  std::size_t n = 1000;
  std::size_t d = 50;
  std::uint64_t seed = 1;
  std::string problem;

  void add(CLI::App* app) {
    app->add_option("--link", link, "identity | logistic | relu | leaky-relu | quadratic")->capture_default_str();
    app->add_option("--alpha", alpha, "Leaky-ReLU slope")->capture_default_str();
    app->add_option("--n", n, "Samples")->capture_default_str();
    app->add_option("--d", d, "Dimension")->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--problem", problem, "Load <stem>.csv/.json instead of generating");
  }

  ExperimentConfig config() const {
    ExperimentConfig c;
    c.link = parse_link_kind(link);
    c.alpha = alpha;
    c.n = n;
    c.d = d;
    c.seed = seed;
    if (!problem.empty()) c.problem = problem;
    return c;
  }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

int cmd_generate(const ProblemFlags& pf, const std::string& out, const std::string& name) {
  ExperimentConfig cfg = pf.config();
  require(!cfg.problem, "generate: --problem makes no sense here");
  const GlmProblem p = experiment_problem(cfg);
  fs::create_directories(out);
  write_problem(p, fs::path(out) / name);
  write_manifest(out, "generate", &cfg, {name + ".csv", name + ".json", "manifest.json"});
  std::cout << (fs::path(out) / name).string() << '\n';
  return 0;
}

struct RunFlags {
  std::string algo;
  std::optional<double> rho, mu, L, eps, r2, kappa, step;
  std::optional<std::size_t> iters;
  std::optional<std::uint64_t> budget;
  std::size_t runs = 1;
  std::uint64_t record_every = 1;
  bool no_wall_time = false;
  std::string out = "out";
};

int cmd_run(const ProblemFlags& pf, const RunFlags& rf) {
  const ExperimentConfig cfg = pf.config();
  const Algo algo = parse_algo(rf.algo);
  const GlmProblem problem = experiment_problem(cfg);
  const Objective obj = empirical_objective(problem);

  auto need = [&](const std::optional<double>& v, const char* flag) {
    if (!v) throw InvalidArgument(rf.algo + " requires " + flag);
    return *v;
  };
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  RunSpec spec;
  spec.algo = algo;
  spec.iters = rf.iters.value_or(cfg.iters_for(algo));
  spec.grad_budget = rf.budget;
  spec.eps = rf.eps.value_or(1e-8);
  spec.record_every = rf.record_every;
  spec.wall_time = !rf.no_wall_time;
  switch (algo) {
    case Algo::continuized_strong:
    case Algo::hss_strong:
      spec.point = {need(rf.L, "--L"), need(rf.mu, "--mu"), need(rf.rho, "--rho")};
      break;
    case Algo::continuized_quasar:
    case Algo::hss_quasar:
      spec.point = {need(rf.L, "--L"), kNaN, need(rf.rho, "--rho")};
      break;
    case Algo::gd:
    case Algo::glmtron:
      spec.point = {rf.step ? 1.0 / *rf.step : need(rf.L, "--L or --step"), kNaN, kNaN};
      break;
    case Algo::accel_glmtron:
      spec.point = {kNaN, kNaN, kNaN};
      if (rf.mu || rf.r2 || rf.kappa)
        spec.glm = GlmtronParams::make(need(rf.mu, "--mu"), need(rf.r2, "--r2"), need(rf.kappa, "--kappa"));
      break;
  }

  std::vector<RunTrace> traces;
  std::vector<RecoveryTrace> recovery;
  int status = 0;
  for (std::size_t r = 0; r < rf.runs; ++r) {
    RunResult res = execute_run(problem, obj, spec, cfg.seed, run_stream(cfg, r));
    if (res.diverged) {
      std::cerr << "run " << r << ": " << res.error << '\n';
      status = 1;
    }
    if (is_recovery(algo))
      recovery.push_back(std::move(res.recovery));
    else
      traces.push_back(std::move(res.trace));
  }
  fs::create_directories(rf.out);
  std::ostringstream csv;
  if (is_recovery(algo))
    write_recovery_traces_csv(csv, recovery);
  else
    write_run_traces_csv(csv, traces);
  write_file(fs::path(rf.out) / "trace.csv", csv.str());
  write_manifest(rf.out, "run", &cfg, {"trace.csv", "manifest.json"});
  return status;
}

int cmd_grid(const std::string& config_path, const std::optional<std::string>& out,
             const std::optional<std::uint64_t>& seed) {
  ExperimentConfig cfg = ExperimentConfig::load(config_path);
  if (out) cfg.out = *out;
  if (seed) cfg.seed = *seed;
  const ExperimentResult result = run_experiment(cfg);
  emit_report(result, cfg.out);
  for (const AlgoResult& ar : result.algos)
    std::cout << to_string(ar.algo) << ": L=" << ar.best.L << " mu=" << ar.best.mu << " rho=" << ar.best.rho
              << " score=" << ar.best_score << '\n';
  return 0;
}

struct CheckFlags {
  std::string property = "quasar";
  std::optional<double> rho, mu, cv, nu, radius, tol;
  std::size_t points = 1000;
  std::string out;
};

int cmd_check(const ProblemFlags& pf, const CheckFlags& cf) {
  const ExperimentConfig cfg = pf.config();
  const GlmProblem problem = experiment_problem(cfg);
  const Objective obj = empirical_objective(problem);
  SeededRng rng(cfg.seed, derive_stream(cfg.data_id(), fnv1a64("check")));
  const Vec w0 = initial_point(rng, problem.d());
  const double radius = cf.radius.value_or(3.0 * (w0 - problem.w_star).norm());
  const PointSet pts = sample_ball(rng, problem.w_star, radius, cf.points);
  const double tol = cf.tol.value_or(-1.0);
  const double f_star = obj.value(problem.w_star);

  auto need = [&](const std::optional<double>& v, const char* flag) {
    if (!v) throw InvalidArgument("--property " + cf.property + " requires " + flag);
    return *v;
  };
  CertReport rep;
  if (cf.property == "quasar")
    rep = check_quasar(obj, problem.w_star, cf.rho ? *cf.rho : estimate_rho(obj, problem.w_star, pts), pts, tol);
  else if (cf.property == "strong-quasar")
    rep = check_strong_quasar(obj, problem.w_star, need(cf.rho, "--rho"), need(cf.mu, "--mu"), pts, tol);
  else if (cf.property == "one-point")
    rep = check_one_point_convex(obj, problem.w_star, need(cf.cv, "--cv"), pts, tol);
  else if (cf.property == "pl")
    rep = check_pl(obj, f_star, need(cf.nu, "--nu"), pts, tol);
  else if (cf.property == "qg")
    rep = check_qg(obj, problem.w_star, need(cf.nu, "--nu"), pts, tol);
  else
    throw InvalidArgument("unknown property '" + cf.property + "'");

  nlohmann::json j = to_json(rep);
  j["radius"] = radius;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!cf.out.empty()) {
    fs::create_directories(cf.out);
    write_file(fs::path(cf.out) / "cert.json", text);
    write_manifest(cf.out, "check", &cfg, {"cert.json", "manifest.json"});
  }
  return 0;
}

struct DiscFlags {
  double rho = 1.0;
  double mu = 1.0;
  double L = 100.0;
  double dt = 1e-4;
  std::size_t jumps = 20;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_verify_discretization(const DiscFlags& df) {
  Vec diag(2);
  diag << df.mu, df.L;
  Vec w_star(2);
  w_star << 1.0, -1.0;
  const Objective obj = diagonal_quadratic(diag, w_star);
  SeededRng rng(df.seed, fnv1a64("verify-discretization"));
  const JumpSchedule schedule = build_schedule(rng, df.jumps);
  Vec w0(2);
  w0 << 0.5, 0.25;
  nlohmann::json j;
  j["rho"] = df.rho;
  j["mu"] = df.mu;
  j["L"] = df.L;
  j["jumps"] = df.jumps;
  nlohmann::json rows = nlohmann::json::array();
  for (double scale : {4.0, 2.0, 1.0}) {
    const double dt = df.dt * scale;
    rows.push_back({{"dt", dt},
                    {"max_rel_error", discretization_gap(obj, w0, w0, schedule, df.rho, df.mu, df.L, dt, df.jumps)}});
  }
  j["errors"] = rows;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!df.out.empty()) {
    fs::create_directories(df.out);
    write_file(fs::path(df.out) / "discretization.json", text);
    write_manifest(df.out, "verify-discretization", nullptr, {"discretization.json", "manifest.json"});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuized Nesterov acceleration benchmarks"};
  app.require_subcommand(1);

  ProblemFlags gen_pf;
  std::string gen_out = "out";
  std::string gen_name = "problem";
  auto* gen = app.add_subcommand("generate", "Write a synthetic GLM problem");
  gen_pf.add(gen);
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();
  gen->add_option("--name", gen_name, "File stem inside --out")->capture_default_str();

  ProblemFlags run_pf;
  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run one algorithm with fixed parameters");
  run_pf.add(run);
  run->add_option("--algo", rf.algo,
                  "continuized-quasar | continuized-strong | gd | hss-strong | hss-quasar | glmtron | accel-glmtron")
      ->required();
  run->add_option("--rho", rf.rho);
  run->add_option("--mu", rf.mu);
  run->add_option("--L", rf.L);
  run->add_option("--step", rf.step, "Step size for gd / glmtron (instead of --L)");
  run->add_option("--eps", rf.eps, "Target accuracy for hss-quasar");
  run->add_option("--r2", rf.r2, "R^2 override for accel-glmtron");
  run->add_option("--kappa", rf.kappa, "kappa_tilde override for accel-glmtron");
  run->add_option("--iters", rf.iters);
  run->add_option("--grad-budget", rf.budget);
  run->add_option("--runs", rf.runs)->capture_default_str();
  run->add_option("--record-every", rf.record_every)->capture_default_str();
  run->add_flag("--no-wall-time", rf.no_wall_time, "Write time_s as 0");
  run->add_option("--out", rf.out, "Output directory")->capture_default_str();

  std::string grid_config;
  std::optional<std::string> grid_out;
  std::optional<std::uint64_t> grid_seed;
  auto* grid = app.add_subcommand("grid", "Grid search and multi-seed report");
  grid->add_option("--config", grid_config, "key = value experiment file")->required();
  grid->add_option("--out", grid_out, "Overrides the config's out");
  grid->add_option("--seed", grid_seed, "Overrides the config's seed");

  ProblemFlags check_pf;
  CheckFlags cf;
  auto* check = app.add_subcommand("check", "Sampling-based certification of a structural property");
  check_pf.add(check);
  check->add_option("--property", cf.property, "quasar | strong-quasar | one-point | pl | qg")->capture_default_str();
  check->add_option("--rho", cf.rho, "Defaults to the estimated rho for --property quasar");
  check->add_option("--mu", cf.mu);
  check->add_option("--cv", cf.cv);
  check->add_option("--nu", cf.nu);
  check->add_option("--points", cf.points)->capture_default_str();
  check->add_option("--radius", cf.radius, "Ball radius around w* (default 3 |w0 - w*|)");
  check->add_option("--tol", cf.tol);
  check->add_option("--out", cf.out, "Also write cert.json here");

  DiscFlags df;
  auto* disc = app.add_subcommand("verify-discretization", "Discrete iterates vs Euler-integrated process");
  disc->add_option("--rho", df.rho)->capture_default_str();
  disc->add_option("--mu", df.mu)->capture_default_str();
  disc->add_option("--L", df.L)->capture_default_str();
  disc->add_option("--dt", df.dt)->capture_default_str();
  disc->add_option("--jumps", df.jumps)->capture_default_str();
  disc->add_option("--seed", df.seed)->capture_default_str();
  disc->add_option("--out", df.out);

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return cmd_generate(gen_pf, gen_out, gen_name);
    if (run->parsed()) return cmd_run(run_pf, rf);
    if (grid->parsed()) return cmd_grid(grid_config, grid_out, grid_seed);
    if (check->parsed()) return cmd_check(check_pf, cf);
    if (disc->parsed()) return cmd_verify_discretization(df);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
