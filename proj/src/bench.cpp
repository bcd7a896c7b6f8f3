#include "quasar/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <tuple>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "quasar/continuized.hpp"
#include "quasar/event_clock.hpp"
#include "quasar/hss.hpp"
#include "quasar/problem_io.hpp"

namespace quasar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct AlgoName {
  Algo algo;
  const char* name;
};

constexpr AlgoName kAlgoNames[] = {
    {Algo::continuized_quasar, "continuized-quasar"},
    {Algo::continuized_strong, "continuized-strong"},
    {Algo::gd, "gd"},
    {Algo::hss_strong, "hss-strong"},
    {Algo::hss_quasar, "hss-quasar"},
    {Algo::glmtron, "glmtron"},
    {Algo::accel_glmtron, "accel-glmtron"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw InvalidArgument("config: '" + key + "' expects a number, got '" + v + "'");
  return x;
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || v[0] == '-')
    throw InvalidArgument("config: '" + key + "' expects a nonnegative integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("config: '" + key + "' expects true/false, got '" + v + "'");
}

bool uses_mu(Algo a) { return a == Algo::continuized_strong || a == Algo::hss_strong; }
bool uses_rho(Algo a) { return a != Algo::gd && a != Algo::glmtron && a != Algo::accel_glmtron; }

nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string to_string(Algo a) {
  for (const auto& e : kAlgoNames)
    if (e.algo == a) return e.name;
  throw InvalidArgument("unknown algorithm");
}

Algo parse_algo(const std::string& name) {
  for (const auto& e : kAlgoNames)
    if (name == e.name) return e.algo;
  throw InvalidArgument("unknown algorithm '" + name + "'");
}

bool is_stochastic(Algo a) { return a != Algo::gd && a != Algo::hss_strong && a != Algo::hss_quasar; }
bool is_recovery(Algo a) { return a == Algo::glmtron || a == Algo::accel_glmtron; }

void GridSpec::validate() const {
  require(q_lo <= q_hi, "GridSpec: q_lo must not exceed q_hi");
  require(!rho_set.empty(), "GridSpec: rho_set is empty");
  for (double r : rho_set) require(r > 0.0, "GridSpec: rho values must be positive");
}

std::vector<double> GridSpec::values() const { return decade_grid(q_lo, q_hi); }

std::vector<GridPoint> expand_grid(const GridSpec& spec) {
  spec.validate();
  const std::vector<double> vals = spec.values();
  std::vector<double> rhos(spec.rho_set);
  std::sort(rhos.begin(), rhos.end());
  std::vector<GridPoint> out;
  for (double L : vals)
    for (double mu : vals)
      if (L > mu)
        for (double rho : rhos) out.push_back({L, mu, rho});
  if (out.empty()) throw InvalidArgument("expand_grid: no (L, mu) pair satisfies L > mu");
  return out;
}

std::vector<GridPoint> grid_for(Algo a, const GridSpec& spec) {
  if (a == Algo::accel_glmtron) return {{kNaN, kNaN, kNaN}};
  if (a == Algo::glmtron) {
    spec.validate();
    std::vector<GridPoint> out;
    for (double L : spec.values()) out.push_back({L, kNaN, kNaN});
    return out;
  }
  std::vector<GridPoint> out;
  for (GridPoint p : expand_grid(spec)) {
    if (!uses_mu(a)) p.mu = kNaN;
    if (!uses_rho(a)) p.rho = kNaN;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const GridPoint& q) {
      return q.L == p.L && (q.mu == p.mu || (std::isnan(q.mu) && std::isnan(p.mu))) &&
             (q.rho == p.rho || (std::isnan(q.rho) && std::isnan(p.rho)));
    });
    if (!seen) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ExperimentConfig

void ExperimentConfig::validate() const {
  require(n >= 1 && d >= 1, "config: n and d must be >= 1");
  require(!algorithms.empty(), "config: no algorithms");
  require(runs >= 1, "config: runs must be >= 1");
  require(!selection_runs || *selection_runs >= 1, "config: selection_runs must be >= 1");
  require(iters_deterministic >= 1 && iters_stochastic >= 1, "config: iteration budgets must be >= 1");
  require(record_every >= 1, "config: record_every must be >= 1");
  require(eps > 0.0, "config: eps must be positive");
  grid.validate();
  LinkFunction::make(link, alpha);
}

std::size_t ExperimentConfig::iters_for(Algo a) const { return is_stochastic(a) ? iters_stochastic : iters_deterministic; }

std::size_t ExperimentConfig::selection_runs_or_default() const { return selection_runs.value_or(runs); }

std::string ExperimentConfig::to_text() const {
  std::ostringstream o;
  o << "link = " << to_string(link) << '\n';
  o << "alpha = " << format_double(alpha) << '\n';
  o << "n = " << n << '\n';
  o << "d = " << d << '\n';
  if (problem) o << "problem = " << *problem << '\n';
  o << "algorithms = ";
  for (std::size_t i = 0; i < algorithms.size(); ++i) o << (i ? "," : "") << to_string(algorithms[i]);
  o << '\n';
  o << "iters_deterministic = " << iters_deterministic << '\n';
  o << "iters_stochastic = " << iters_stochastic << '\n';
  if (grad_budget) o << "grad_budget = " << *grad_budget << '\n';
  o << "runs = " << runs << '\n';
  if (selection_runs) o << "selection_runs = " << *selection_runs << '\n';
  o << "seed = " << seed << '\n';
  o << "out = " << out << '\n';
  o << "q_lo = " << grid.q_lo << '\n';
  o << "q_hi = " << grid.q_hi << '\n';
  o << "rho_set = ";
  for (std::size_t i = 0; i < grid.rho_set.size(); ++i) o << (i ? "," : "") << format_double(grid.rho_set[i]);
  o << '\n';
  o << "score = " << (score == ScoreKind::auc ? "auc" : "final") << '\n';
  o << "record_every = " << record_every << '\n';
  o << "eps = " << format_double(eps) << '\n';
  o << "wall_time = " << (wall_time ? "true" : "false") << '\n';
  if (glm_mu) o << "glm_mu = " << format_double(*glm_mu) << '\n';
  if (glm_r2) o << "glm_r2 = " << format_double(*glm_r2) << '\n';
  if (glm_kappa) o << "glm_kappa = " << format_double(*glm_kappa) << '\n';
  return o.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key == "link") c.link = parse_link_kind(v);
    else if (key == "alpha") c.alpha = parse_real(key, v);
    else if (key == "n") c.n = parse_count(key, v);
    else if (key == "d") c.d = parse_count(key, v);
    else if (key == "problem") c.problem = v;
    else if (key == "algorithms") {
      c.algorithms.clear();
      for (const auto& name : split(v, ',')) c.algorithms.push_back(parse_algo(name));
    } else if (key == "iters") c.iters_deterministic = c.iters_stochastic = parse_count(key, v);
    else if (key == "iters_deterministic") c.iters_deterministic = parse_count(key, v);
    else if (key == "iters_stochastic") c.iters_stochastic = parse_count(key, v);
    else if (key == "grad_budget") c.grad_budget = parse_count(key, v);
    else if (key == "runs") c.runs = parse_count(key, v);
    else if (key == "selection_runs") c.selection_runs = parse_count(key, v);
    else if (key == "seed") c.seed = parse_count(key, v);
    else if (key == "out") c.out = v;
    else if (key == "q_lo") c.grid.q_lo = static_cast<int>(parse_real(key, v));
    else if (key == "q_hi") c.grid.q_hi = static_cast<int>(parse_real(key, v));
    else if (key == "rho_set") {
      c.grid.rho_set.clear();
      for (const auto& r : split(v, ',')) c.grid.rho_set.push_back(parse_real(key, r));
    } else if (key == "score") {
      if (v == "final") c.score = ScoreKind::final_gap;
      else if (v == "auc") c.score = ScoreKind::auc;
      else throw InvalidArgument("config: score must be 'final' or 'auc'");
    } else if (key == "record_every") c.record_every = parse_count(key, v);
    else if (key == "eps") c.eps = parse_real(key, v);
    else if (key == "wall_time") c.wall_time = parse_bool(key, v);
    else if (key == "glm_mu") c.glm_mu = parse_real(key, v);
    else if (key == "glm_r2") c.glm_r2 = parse_real(key, v);
    else if (key == "glm_kappa") c.glm_kappa = parse_real(key, v);
    else throw InvalidArgument("config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::uint64_t ExperimentConfig::config_id() const {
  ExperimentConfig c = *this;
  c.out.clear();
  return fnv1a64(c.to_text());
}

std::uint64_t ExperimentConfig::data_id() const {
  std::ostringstream o;
  if (problem)
    o << "problem=" << *problem;
  else
    o << "link=" << to_string(link) << ";alpha=" << format_double(alpha) << ";n=" << n << ";d=" << d;
  return fnv1a64(o.str());
}

std::uint64_t problem_stream(const ExperimentConfig& cfg) { return derive_stream(cfg.data_id(), 0); }

std::uint64_t run_stream(const ExperimentConfig& cfg, std::size_t run_index) {
  return derive_stream(cfg.data_id(), run_index + 1);
}

GlmProblem experiment_problem(const ExperimentConfig& cfg) {
  if (cfg.problem) return read_problem(*cfg.problem);
  SeededRng rng(cfg.seed, problem_stream(cfg));
  return generate_problem(rng, static_cast<Eigen::Index>(cfg.n), static_cast<Eigen::Index>(cfg.d),
                          LinkFunction::make(cfg.link, cfg.alpha));
}

// ---------------------------------------------------------------------------
// Single runs

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

void summarize(RunResult& r, const std::vector<double>& metric) {
  r.final_metric = metric.empty() ? kNaN : metric.back();
  r.mean_metric = mean_of(metric);
  if (r.diverged) r.final_metric = r.mean_metric = kInf;
}

}  // namespace

RunResult execute_run(const GlmProblem& problem, const Objective& obj, const RunSpec& spec, std::uint64_t master_seed,
                      std::uint64_t stream) {
  RunResult r;
  SeededRng rng(master_seed, stream);
  const Vec w0 = initial_point(rng, problem.d());
  const GridPoint& p = spec.point;

  if (is_recovery(spec.algo)) {
    RecoveryOptions opts;
    opts.record_every = spec.record_every;
    opts.seed = stream;
    try {
      if (spec.algo == Algo::glmtron) {
        r.recovery = glmtron_run(problem, w0, 1.0 / p.L, spec.iters, rng, opts);
      } else {
        GlmtronParams gp;
        if (spec.glm) {
          gp = *spec.glm;
        } else {
          SeededRng est(master_seed, derive_stream(stream, 0xC0FFEE));
          gp = default_glmtron_params(problem, w0, est);
        }
        const JumpSchedule schedule = build_schedule(rng, std::max<std::size_t>(spec.iters, 1));
        r.recovery = accel_glmtron_run(problem, w0, w0, gp, schedule, spec.iters, rng, opts);
      }
    } catch (const RecoveryDivergenceError& e) {
      r.recovery = e.trace();
      r.diverged = true;
      r.error = e.what();
    } catch (const Error& e) {
      r.recovery.algo = to_string(spec.algo);
      r.recovery.seed = stream;
      r.diverged = true;
      r.error = e.what();
    }
    std::vector<double> metric;
    for (const auto& row : r.recovery.rows) metric.push_back(row.dist);
    summarize(r, metric);
    return r;
  }

  RunOptions opts;
  opts.w_star = problem.w_star;
  opts.record_every = spec.record_every;
  opts.wall_time = spec.wall_time;
  opts.seed = stream;
  opts.grad_budget = spec.grad_budget;
  std::size_t k_max = spec.iters;
  // Continuized methods and GD take exactly one gradient per iteration.
  if (spec.grad_budget && spec.algo != Algo::hss_strong && spec.algo != Algo::hss_quasar)
    k_max = std::min<std::size_t>(k_max, *spec.grad_budget);
  try {
    switch (spec.algo) {
      case Algo::continuized_quasar:
        r.trace = continuized_run(obj, w0, w0, build_schedule(rng, std::max<std::size_t>(k_max, 1)),
                                  quasar_schedule(p.rho, p.L), k_max, opts);
        break;
      case Algo::continuized_strong:
        r.trace = continuized_run(obj, w0, w0, build_schedule(rng, std::max<std::size_t>(k_max, 1)),
                                  strong_quasar_schedule(p.rho, p.mu, p.L), k_max, opts);
        break;
      case Algo::gd:
        r.trace = gd_run(obj, w0, 1.0 / p.L, k_max, opts);
        break;
      case Algo::hss_strong:
        r.trace = hss_agd_strong(obj, w0, w0, p.rho, p.mu, p.L, k_max, opts);
        break;
      case Algo::hss_quasar:
        r.trace = hss_agd_quasar(obj, w0, w0, p.rho, p.L, spec.eps, k_max, opts);
        break;
      default:
        throw InvalidArgument("execute_run: unsupported algorithm");
    }
  } catch (const DivergenceError& e) {
    r.trace = e.trace();
    r.diverged = true;
    r.error = e.what();
  } catch (const Error& e) {
    r.trace.algo = to_string(spec.algo);
    r.trace.seed = stream;
    r.diverged = true;
    r.error = e.what();
  }
  std::vector<double> metric;
  for (const auto& row : r.trace.rows) metric.push_back(row.f_gap);
  summarize(r, metric);
  return r;
}

// ---------------------------------------------------------------------------
// Sweep

std::size_t worker_count() {
  if (const char* env = std::getenv("QUASAR_OPT_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*env != '\0' && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    throw InvalidArgument("QUASAR_OPT_WORKERS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, experiment_problem(cfg)); }

ExperimentResult run_experiment(const ExperimentConfig& cfg, const GlmProblem& problem) {
  cfg.validate();
  problem.validate();
  const Objective obj = empirical_objective(problem);
  const std::size_t workers = worker_count();
  const std::size_t sel_runs = cfg.selection_runs_or_default();

  std::optional<GlmtronParams> glm_override;
  if (cfg.glm_mu || cfg.glm_r2 || cfg.glm_kappa) {
    require(cfg.glm_mu && cfg.glm_r2 && cfg.glm_kappa, "config: glm_mu, glm_r2 and glm_kappa go together");
    glm_override = GlmtronParams::make(*cfg.glm_mu, *cfg.glm_r2, *cfg.glm_kappa);
  }

  auto spec_for = [&](Algo a, const GridPoint& p, std::uint64_t record_every) {
    RunSpec s;
    s.algo = a;
    s.point = p;
    s.iters = cfg.iters_for(a);
    s.grad_budget = is_recovery(a) ? std::nullopt : cfg.grad_budget;
    s.eps = cfg.eps;
    s.record_every = record_every;
    s.wall_time = cfg.wall_time;
    s.glm = glm_override;
    return s;
  };

  ExperimentResult result;
  result.cfg = cfg;
  for (Algo a : cfg.algorithms) {
    AlgoResult ar;
    ar.algo = a;
    const std::vector<GridPoint> grid = grid_for(a, cfg.grid);
    // Selection only needs the score, so rows are thinned unless AUC is requested.
    const std::uint64_t sel_every =
        cfg.score == ScoreKind::auc ? cfg.record_every : static_cast<std::uint64_t>(cfg.iters_for(a)) + 1;
    std::vector<RunResult> sel(grid.size() * sel_runs);
    parallel_for(sel.size(), workers, [&](std::size_t i) {
      const std::size_t t = i / sel_runs;
      const std::size_t r = i % sel_runs;
      RunResult res = execute_run(problem, obj, spec_for(a, grid[t], sel_every), cfg.seed, run_stream(cfg, r));
      res.trace.rows.clear();
      res.recovery.rows.clear();
      sel[i] = std::move(res);
    });

    ar.best_score = kInf;
    std::size_t best = 0;
    for (std::size_t t = 0; t < grid.size(); ++t) {
      GridScore gs;
      gs.point = grid[t];
      gs.runs = sel_runs;
      double sum = 0.0;
      for (std::size_t r = 0; r < sel_runs; ++r) {
        const RunResult& res = sel[t * sel_runs + r];
        if (res.diverged) ++gs.diverged_runs;
        const double m = cfg.score == ScoreKind::auc ? res.mean_metric : res.final_metric;
        sum += std::isnan(m) ? kInf : m;
      }
      gs.score = sum / static_cast<double>(sel_runs);
      if (gs.score < ar.best_score) {
        ar.best_score = gs.score;
        best = t;
      }
      ar.scores.push_back(gs);
    }
    ar.best = grid[best];

    std::vector<RunResult> finals(cfg.runs);
    parallel_for(cfg.runs, workers, [&](std::size_t r) {
      finals[r] = execute_run(problem, obj, spec_for(a, ar.best, cfg.record_every), cfg.seed, run_stream(cfg, r));
    });
    for (RunResult& f : finals) {
      if (is_recovery(a))
        ar.recovery.push_back(std::move(f.recovery));
      else
        ar.traces.push_back(std::move(f.trace));
    }
    result.algos.push_back(std::move(ar));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Reporting

namespace {

template <typename Trace, typename Metric>
std::vector<AveragedRow> average_impl(const std::vector<Trace>& traces, Metric metric) {
  std::vector<AveragedRow> out;
  if (traces.empty()) return out;
  std::size_t len = std::numeric_limits<std::size_t>::max();
  for (const auto& t : traces) len = std::min(len, t.rows.size());
  const double m = static_cast<double>(traces.size());
  for (std::size_t i = 0; i < len; ++i) {
    AveragedRow a;
    a.k = traces.front().rows[i].k;
    a.min = kInf;
    a.max = -kInf;
    for (const auto& t : traces) {
      const auto& row = t.rows[i];
      const auto [calls, secs, value] = metric(row);
      a.grad_calls += calls / m;
      a.time_s += secs / m;
      a.mean += value / m;
      a.min = std::min(a.min, value);
      a.max = std::max(a.max, value);
    }
    out.push_back(a);
  }
  return out;
}

}  // namespace

std::vector<AveragedRow> average_traces(const std::vector<RunTrace>& traces) {
  return average_impl(traces, [](const TraceRow& r) {
    return std::tuple{static_cast<double>(r.grad_calls), r.time_s, r.f_gap};
  });
}

std::vector<AveragedRow> average_traces(const std::vector<RecoveryTrace>& traces) {
  return average_impl(traces, [](const RecoveryRow& r) {
    return std::tuple{static_cast<double>(r.pg_calls), 0.0, r.dist};
  });
}

std::string averaged_header(const std::string& axis, const std::string& metric) {
  return "algo," + axis + "," + metric + "," + metric + "_min," + metric + "_max,runs";
}

namespace {

void write_averaged_rows(std::ostream& out, const std::string& algo, const std::string& axis,
                         const std::vector<AveragedRow>& rows, std::size_t runs) {
  for (const AveragedRow& a : rows) {
    out << algo << ',';
    if (axis == "iteration")
      out << a.k;
    else if (axis == "grad_calls")
      out << format_double(a.grad_calls);
    else
      out << format_double(a.time_s);
    out << ',' << format_double(a.mean) << ',' << format_double(a.min) << ',' << format_double(a.max) << ',' << runs
        << '\n';
  }
}

nlohmann::json point_json(const GridPoint& p) {
  return {{"L", number_or_null(p.L)}, {"mu", number_or_null(p.mu)}, {"rho", number_or_null(p.rho)}};
}

}  // namespace

std::vector<std::string> emit_report(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    files.push_back(name);
  };

  std::vector<RunTrace> all_runs;
  std::vector<RecoveryTrace> all_recovery;
  for (const std::string axis : kAxes) {
    std::ostringstream combined;
    combined << averaged_header(axis, "f_gap") << '\n';
    for (const AlgoResult& ar : result.algos) {
      if (is_recovery(ar.algo)) continue;
      const auto rows = average_traces(ar.traces);
      std::ostringstream one;
      one << averaged_header(axis, "f_gap") << '\n';
      write_averaged_rows(one, to_string(ar.algo), axis, rows, ar.traces.size());
      write_averaged_rows(combined, to_string(ar.algo), axis, rows, ar.traces.size());
      emit("trace_" + to_string(ar.algo) + "_" + axis + ".csv", one.str());
    }
    emit("trace_" + axis + ".csv", combined.str());
  }

  std::ostringstream recovery_combined;
  recovery_combined << averaged_header("iteration", "dist") << '\n';
  for (const AlgoResult& ar : result.algos) {
    all_runs.insert(all_runs.end(), ar.traces.begin(), ar.traces.end());
    all_recovery.insert(all_recovery.end(), ar.recovery.begin(), ar.recovery.end());
    if (!is_recovery(ar.algo)) continue;
    const auto rows = average_traces(ar.recovery);
    std::ostringstream one;
    one << averaged_header("iteration", "dist") << '\n';
    write_averaged_rows(one, to_string(ar.algo), "iteration", rows, ar.recovery.size());
    write_averaged_rows(recovery_combined, to_string(ar.algo), "iteration", rows, ar.recovery.size());
    emit("recovery_" + to_string(ar.algo) + "_iteration.csv", one.str());
  }
  emit("recovery_iteration.csv", recovery_combined.str());

  {
    std::ostringstream o;
    write_run_traces_csv(o, all_runs);
    emit("runs.csv", o.str());
  }
  {
    std::ostringstream o;
    write_recovery_traces_csv(o, all_recovery);
    emit("recovery_runs.csv", o.str());
  }
  {
    std::ostringstream o;
    o << "algo,L,mu,rho,score,diverged_runs,runs\n";
    for (const AlgoResult& ar : result.algos)
      for (const GridScore& g : ar.scores)
        o << to_string(ar.algo) << ',' << format_double(g.point.L) << ',' << format_double(g.point.mu) << ','
          << format_double(g.point.rho) << ',' << format_double(g.score) << ',' << g.diverged_runs << ',' << g.runs
          << '\n';
    emit("grid_scores.csv", o.str());
  }
  {
    nlohmann::json s;
    s["config_id"] = result.cfg.config_id();
    s["metric"] = result.cfg.score == ScoreKind::auc ? "auc" : "final";
    nlohmann::json algos = nlohmann::json::object();
    for (const AlgoResult& ar : result.algos) {
      nlohmann::json a;
      a["best"] = point_json(ar.best);
      a["score"] = number_or_null(ar.best_score);
      a["tuples"] = ar.scores.size();
      std::size_t all_div = 0;
      for (const auto& g : ar.scores) all_div += g.diverged_runs == g.runs ? 1 : 0;
      a["diverged_tuples"] = all_div;
      a["runs"] = is_recovery(ar.algo) ? ar.recovery.size() : ar.traces.size();
      a["metric"] = is_recovery(ar.algo) ? "dist" : "f_gap";
      std::vector<double> finals;
      if (is_recovery(ar.algo)) {
        for (const auto& t : ar.recovery)
          if (!t.rows.empty()) finals.push_back(t.rows.back().dist);
      } else {
        for (const auto& t : ar.traces)
          if (!t.rows.empty()) finals.push_back(t.rows.back().f_gap);
      }
      a["final_median"] = finals.empty() ? nlohmann::json(nullptr) : number_or_null(median(finals));
      algos[to_string(ar.algo)] = a;
    }
    s["algorithms"] = algos;
    emit("summary.json", s.dump(2) + "\n");
  }
  files.push_back("manifest.json");
  write_manifest(dir, "grid", &result.cfg, files);
  return files;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const ExperimentConfig* cfg,
                    const std::vector<std::string>& files) {
  std::filesystem::create_directories(dir);
  nlohmann::json m;
  m["tool"] = "quasar-opt";
  m["command"] = command;
  if (cfg) {
    m["config_id"] = cfg->config_id();
    m["data_id"] = cfg->data_id();
    m["config"] = cfg->to_text();
  }
  m["files"] = files;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace quasar
