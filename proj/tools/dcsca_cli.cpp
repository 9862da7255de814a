// dcsca command-line harness: generate instances, run a solver, or compare
// several solvers on the same instance. See README.md for examples.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "dcsca/anomaly.hpp"
#include "dcsca/capped_l1.hpp"
#include "dcsca/distributed.hpp"
#include "dcsca/io.hpp"
#include "dcsca/sca.hpp"

namespace {

using namespace dcsca;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;

struct Options {
  std::string problem = "anomaly";  // anomaly | capped_l1
  std::string scale = "desk";       // desk | paper | NxKxIxRHO | NxK
  std::uint64_t seed = 1;
  std::string algorithm = "stela";
  double delta = 1e-6;
  int max_iter = 1000;
  std::string line_search = "exact";
  double alpha = 0.5;
  double beta = 0.5;
  double c = 1e4;
  std::optional<double> theta;
  std::optional<double> lambda_override;
  std::optional<double> mu_override;
  int nodes = 1;
  int threads = 1;
  std::string out;
  std::string format = "csv";  // csv | json
  std::string instance;        // input file for run/compare
  std::string timing = "wall";  // wall | none
  std::string config;
  std::string algorithms;  // comma list, compare only
};

struct Dims {
  Index n = 0, k = 0, i = 0, rho = 0;
};

Dims parse_scale(const std::string& problem, const std::string& scale) {
  if (problem == "anomaly") {
    if (scale == "desk") return {50, 100, 100, 5};
    if (scale == "paper") return {1000, 4000, 4000, 10};
    Dims d;
    if (std::sscanf(scale.c_str(), "%ldx%ldx%ldx%ld", &d.n, &d.k, &d.i, &d.rho) == 4)
      return d;
    throw std::invalid_argument("anomaly scale must be desk, paper or NxKxIxRHO");
  }
  if (scale == "desk") return {200, 1000, 0, 0};
  if (scale == "paper") return {10000, 50000, 0, 0};
  Dims d;
  if (std::sscanf(scale.c_str(), "%ldx%ld", &d.n, &d.k) == 2) return d;
  throw std::invalid_argument("capped_l1 scale must be desk, paper or NxK");
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line is not key=value: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

// Config file supplies defaults; explicitly passed flags win.
void apply_config(const std::map<std::string, std::string>& kv, CLI::App& app,
                  Options& o) {
  auto unset = [&](const char* flag) {
    const CLI::Option* opt = app.get_option(flag);
    return opt->count() == 0;
  };
  for (const auto& [key, value] : kv) {
    if (key == "problem" && unset("--problem")) o.problem = value;
    else if (key == "scale" && unset("--scale")) o.scale = value;
    else if (key == "seed" && unset("--seed")) o.seed = std::stoull(value);
    else if (key == "algorithm" && unset("--algorithm")) o.algorithm = value;
    else if (key == "delta" && unset("--delta")) o.delta = std::stod(value);
    else if (key == "max_iter" && unset("--max-iter")) o.max_iter = std::stoi(value);
    else if (key == "line_search" && unset("--line-search")) o.line_search = value;
    else if (key == "alpha" && unset("--alpha")) o.alpha = std::stod(value);
    else if (key == "beta" && unset("--beta")) o.beta = std::stod(value);
    else if (key == "c" && unset("--c")) o.c = std::stod(value);
    else if (key == "theta" && unset("--theta")) o.theta = std::stod(value);
    else if (key == "lambda" && unset("--lambda")) o.lambda_override = std::stod(value);
    else if (key == "mu" && unset("--mu")) o.mu_override = std::stod(value);
    else if (key == "nodes" && unset("--nodes")) o.nodes = std::stoi(value);
    else if (key == "threads" && unset("--threads")) o.threads = std::stoi(value);
    else if (key == "out" && unset("--out")) o.out = value;
    else if (key == "format" && unset("--format")) o.format = value;
    else if (key == "instance" && unset("--instance")) o.instance = value;
    else if (key == "timing" && unset("--timing")) o.timing = value;
    else if (key == "algorithms" && unset("--algorithms")) o.algorithms = value;
    else if (key == "problem" || key == "scale" || key == "seed" ||
             key == "algorithm" || key == "delta" || key == "max_iter" ||
             key == "line_search" || key == "alpha" || key == "beta" ||
             key == "c" || key == "theta" || key == "lambda" || key == "mu" ||
             key == "nodes" || key == "threads" || key == "out" ||
             key == "format" || key == "instance" || key == "timing" ||
             key == "algorithms") {
      // known key overridden by a flag: nothing to do
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
}

void strip_timing(std::vector<IterationTrace>& trace) {
  for (auto& r : trace) r.elapsed_seconds = 0.0;
}

void write_trace(const Options& o, const std::string& path,
                 std::vector<IterationTrace> trace) {
  if (o.timing == "none") strip_timing(trace);
  io::write_text_file(path, o.format == "json" ? trace_to_json(trace)
                                               : trace_to_csv(trace));
}

// ---------------------------------------------------------------- instances

struct LoadedInstance {
  std::string kind;
  std::optional<anomaly::GeneratedInstance> anomaly_inst;
  std::optional<capped_l1::GeneratedInstance> capped_inst;
};

LoadedInstance make_instance(const Options& o) {
  LoadedInstance li;
  if (!o.instance.empty()) {
    li.kind = io::instance_kind(o.instance);
    if (li.kind == "anomaly")
      li.anomaly_inst = io::load_anomaly(o.instance);
    else
      li.capped_inst = io::load_capped(o.instance);
  } else {
    const Dims d = parse_scale(o.problem, o.scale);
    li.kind = o.problem;
    if (o.problem == "anomaly") {
      li.anomaly_inst = anomaly::generate_data(d.n, d.k, d.i, d.rho, o.seed);
    } else if (o.problem == "capped_l1") {
      if (o.scale == "paper")
        std::fprintf(stderr,
                     "warning: paper-scale capped_l1 allocates a 10000x50000 "
                     "double matrix (~4 GB); proceeding\n");
      li.capped_inst = capped_l1::generate_data(d.n, d.k, 0.1, 1e-4, o.seed);
    } else {
      throw std::invalid_argument("unknown problem: " + o.problem);
    }
  }
  // Parameter overrides rebuild the problem so derived quantities stay valid.
  if (li.anomaly_inst && (o.lambda_override || o.mu_override)) {
    auto& g = *li.anomaly_inst;
    g.problem = anomaly::Problem::make(
        g.problem.Y, g.problem.D, o.lambda_override.value_or(g.problem.lambda),
        o.mu_override.value_or(g.problem.mu), g.problem.rho);
  }
  if (li.capped_inst && (o.mu_override || o.theta)) {
    auto& g = *li.capped_inst;
    g.problem = capped_l1::Problem::make(g.problem.A, g.problem.b,
                                         o.mu_override.value_or(g.problem.mu),
                                         o.theta.value_or(g.problem.theta));
  }
  return li;
}

// --------------------------------------------------------------------- runs

struct RunOutcome {
  std::vector<IterationTrace> trace;
  bool converged = false;
  double final_gap = 0.0;
  std::string comm_json;  // non-empty only for the distributed solver
};

DcProblem capped_dc_problem(const capped_l1::Problem& p) {
  DcProblem dp;
  dp.dimension = p.A.cols();
  dp.f = [&p](const Vector& x) { return 0.5 * (p.A * x - p.b).squaredNorm(); };
  dp.f_grad = [&p](const Vector& x) {
    return Vector(p.A.transpose() * (p.A * x - p.b));
  };
  dp.g_plus = [&p](const Vector& x) { return p.mu * x.template lpNorm<1>(); };
  dp.g_minus = [&p](const Vector& x) {
    double s = 0.0;
    for (Index k = 0; k < x.size(); ++k)
      s += std::abs(x(k)) - std::min(std::abs(x(k)), p.theta);
    return p.mu * s;
  };
  dp.g_minus_subgrad = [&p](const Vector& x) { return capped_l1::xi_minus(p, x); };
  return dp;
}

RunOutcome run_capped(const Options& o, const capped_l1::Problem& p) {
  const Vector x0 = Vector::Zero(p.A.cols());
  RunOutcome out;
  if (o.algorithm == "stela") {
    if (o.line_search == "exact") {
      auto r = capped_l1::run_stela(p, x0, o.delta, o.max_iter);
      out = {std::move(r.trace), r.converged, r.final_gap, ""};
    } else {
      // Generic driver for the alternative line searches.
      const DcProblem dp = capped_dc_problem(p);
      SurrogateSolver s;
      s.description = "capped_l1 stela direction";
      s.solve = [&p](const Vector& x, const Vector& xi) {
        return capped_l1::stela_direction(
            p, x, Vector(p.A.transpose() * (p.A * x - p.b)), xi);
      };
      auto r = run_sca(dp, s, parse_line_search(o.line_search), x0, o.delta,
                       o.max_iter);
      out = {std::move(r.trace), r.converged, r.final_gap, ""};
    }
  } else if (o.algorithm == "classic_mm") {
    auto r = capped_l1::run_classic_mm(p, x0, o.max_iter, o.delta);
    out = {std::move(r.trace), r.converged, r.final_gap, ""};
  } else if (o.algorithm == "proximal_mm") {
    auto r = capped_l1::run_proximal_mm(p, x0, o.alpha, o.beta, o.max_iter, o.delta);
    out = {std::move(r.trace), r.converged, r.final_gap, ""};
  } else if (o.algorithm == "gist") {
    DcProblem dp;  // smooth part absorbs -g^-; penalty is the plain l1 norm
    dp.dimension = p.A.cols();
    dp.f = [&p](const Vector& x) {
      double s = 0.0;
      for (Index k = 0; k < x.size(); ++k)
        s += std::abs(x(k)) - std::min(std::abs(x(k)), p.theta);
      return 0.5 * (p.A * x - p.b).squaredNorm() - p.mu * s;
    };
    dp.f_grad = [&p](const Vector& x) {
      return Vector(p.A.transpose() * (p.A * x - p.b) - capped_l1::xi_minus(p, x));
    };
    dp.g_plus = [&p](const Vector& x) { return p.mu * x.template lpNorm<1>(); };
    dp.g_minus = [](const Vector&) { return 0.0; };
    dp.g_minus_subgrad = [&p](const Vector& x) { return Vector(Vector::Zero(x.size())); };
    auto r = gist_baseline(dp, p.mu, x0, o.beta, o.alpha, o.max_iter, o.delta);
    out = {std::move(r.trace), r.converged, r.final_gap, ""};
  } else {
    throw std::invalid_argument("algorithm '" + o.algorithm +
                                "' is not available for capped_l1");
  }
  return out;
}

RunOutcome run_anomaly(const Options& o, const anomaly::Problem& p) {
  const anomaly::State z0 = anomaly::default_start(p, o.seed);
  RunOutcome out;
  if (o.algorithm == "stela") {
    if (o.line_search != "exact")
      throw std::invalid_argument(
          "anomaly stela supports only the exact line search");
    auto r = anomaly::run_stela(p, z0, o.delta, o.max_iter);
    out = {std::move(r.trace), r.converged, r.final_gap, ""};
  } else if (o.algorithm == "bcd") {
    auto r = anomaly::run_bcd(p, z0, o.max_iter);
    out = {std::move(r.trace), true, 0.0, ""};  // fixed sweep budget
  } else if (o.algorithm == "admm") {
    auto r = anomaly::run_admm(p, z0, o.c, o.max_iter);
    out = {std::move(r.trace), r.converged, r.final_gap, ""};
  } else if (o.algorithm == "stela_distributed") {
    auto r = distributed::run_distributed_stela(p, z0, o.nodes, o.delta, o.max_iter);
    out = {std::move(r.trace), r.converged, r.final_gap, r.comm.to_json()};
  } else {
    throw std::invalid_argument("algorithm '" + o.algorithm +
                                "' is not available for anomaly");
  }
  return out;
}

RunOutcome run_one(const Options& o, const LoadedInstance& li) {
  if (li.kind == "anomaly") return run_anomaly(o, li.anomaly_inst->problem);
  return run_capped(o, li.capped_inst->problem);
}

// ------------------------------------------------------------- subcommands

int cmd_gen(const Options& o) {
  if (o.out.empty()) throw std::invalid_argument("gen requires --out");
  const LoadedInstance li = make_instance(o);
  if (li.kind == "anomaly") {
    io::save_anomaly(o.out, *li.anomaly_inst);
    std::printf("wrote %s  lambda=%.17g  mu=%.17g\n", o.out.c_str(),
                li.anomaly_inst->problem.lambda, li.anomaly_inst->problem.mu);
  } else {
    io::save_capped(o.out, *li.capped_inst);
    std::printf("wrote %s  mu=%.17g  theta=%.17g\n", o.out.c_str(),
                li.capped_inst->problem.mu, li.capped_inst->problem.theta);
  }
  return kExitOk;
}

int cmd_run(const Options& o) {
  const LoadedInstance li = make_instance(o);
  const RunOutcome r = run_one(o, li);
  if (!o.out.empty()) {
    write_trace(o, o.out, r.trace);
    if (!r.comm_json.empty()) io::write_text_file(o.out + ".comm.json", r.comm_json);
  }
  const auto& last = r.trace.back();
  std::printf("algorithm=%s iterations=%d final_h=%.17g gap=%.17g seconds=%.6f "
              "converged=%d\n",
              o.algorithm.c_str(), last.iteration, last.h_value, r.final_gap,
              last.elapsed_seconds, int(r.converged));
  return r.converged ? kExitOk : kExitNoConvergence;
}

double time_to_tolerance(const std::vector<IterationTrace>& trace, double h_star,
                         double tol) {
  for (const auto& row : trace)
    if ((row.h_value - h_star) / h_star <= tol) return row.elapsed_seconds;
  return -1.0;
}

int cmd_compare(const Options& o) {
  std::vector<std::string> algos;
  std::stringstream ss(o.algorithms);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) algos.push_back(item);
  if (algos.size() < 2)
    throw std::invalid_argument("compare requires --algorithms with >= 2 entries");

  const LoadedInstance li = make_instance(o);
  std::vector<RunOutcome> runs;
  for (const auto& a : algos) {
    Options oa = o;
    oa.algorithm = a;
    runs.push_back(run_one(oa, li));
    if (!o.out.empty()) {
      const std::string path =
          o.out + "_" + a + (o.format == "json" ? ".json" : ".csv");
      write_trace(o, path, runs.back().trace);
    }
  }

  double h_star = runs[0].trace.back().h_value;
  for (const auto& r : runs) h_star = std::min(h_star, r.trace.back().h_value);

  std::printf("%-18s %-22s %-10s %-12s %-12s\n", "algorithm", "final_h", "iters",
              "t(1e-2)", "t(1e-4)");
  for (size_t i = 0; i < algos.size(); ++i) {
    const auto& tr = runs[i].trace;
    const double t2 = time_to_tolerance(tr, h_star, 1e-2);
    const double t4 = time_to_tolerance(tr, h_star, 1e-4);
    std::printf("%-18s %-22.15g %-10d %-12.6f %-12.6f\n", algos[i].c_str(),
                tr.back().h_value, tr.back().iteration, t2, t4);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  if (const char* env_seed = std::getenv("DCSCA_SEED"))
    o.seed = std::strtoull(env_seed, nullptr, 10);

  CLI::App app{"dcsca: difference-of-convex SCA solvers and benchmarks"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", o.problem, "anomaly | capped_l1");
    sub->add_option("--scale", o.scale, "desk | paper | explicit dims");
    sub->add_option("--seed", o.seed, "64-bit seed (env DCSCA_SEED fallback)");
    sub->add_option("--algorithm", o.algorithm,
                    "stela | bcd | admm | classic_mm | proximal_mm | gist | "
                    "stela_distributed");
    sub->add_option("--delta", o.delta, "stationarity tolerance");
    sub->add_option("--max-iter", o.max_iter, "iteration budget");
    sub->add_option("--line-search", o.line_search,
                    "exact | successive[:a:b:m] | constant[:g]");
    sub->add_option("--alpha", o.alpha, "line-search alpha");
    sub->add_option("--beta", o.beta, "line-search beta");
    sub->add_option("--c", o.c, "admm penalty parameter");
    sub->add_option("--theta", o.theta, "capped-l1 cap");
    sub->add_option("--lambda", o.lambda_override, "anomaly lambda override");
    sub->add_option("--mu", o.mu_override, "sparsity weight override");
    sub->add_option("--nodes", o.nodes, "node count for stela_distributed");
    sub->add_option("--threads", o.threads, "kernel threads (default 1)");
    sub->add_option("--out", o.out, "output path / prefix");
    sub->add_option("--format", o.format, "csv | json");
    sub->add_option("--instance", o.instance, "existing instance file");
    sub->add_option("--timing", o.timing, "wall | none (zeroed seconds column)");
    sub->add_option("--config", o.config, "key=value config file (flags win)");
    return sub;
  };

  CLI::App* gen = add_common(app.add_subcommand("gen", "generate an instance"));
  CLI::App* run = add_common(app.add_subcommand("run", "run one algorithm"));
  CLI::App* cmp = add_common(app.add_subcommand("compare", "compare algorithms"));
  cmp->add_option("--algorithms", o.algorithms, "comma-separated algorithm list");

  try {
    app.parse(argc, argv);
    CLI::App* active = gen->parsed() ? gen : run->parsed() ? run : cmp;
    if (!o.config.empty()) apply_config(read_config(o.config), *active, o);
    if (o.format != "csv" && o.format != "json")
      throw std::invalid_argument("format must be csv or json");
    if (o.timing != "wall" && o.timing != "none")
      throw std::invalid_argument("timing must be wall or none");
    if (o.threads < 1) throw std::invalid_argument("threads must be >= 1");
    set_num_threads(o.threads);

    if (gen->parsed()) return cmd_gen(o);
    if (run->parsed()) return cmd_run(o);
    return cmd_compare(o);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}
