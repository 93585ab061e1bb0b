#include "pmp/cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include "pmp/baselines.hpp"
#include "pmp/cmp.hpp"
#include "pmp/hawkes.hpp"
#include "pmp/pet.hpp"
#include "pmp/rb.hpp"

namespace pmp::cli {

namespace {

const std::vector<std::string> kCommands{"gen-hawkes", "estimate-network", "pet-run", "solve", "compare"};
const std::vector<std::string> kSolvers{"cmp", "rb-cmp", "full-rb", "md", "pg", "apg"};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

RunConfig parse_config(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{"Penalized Poisson likelihood solvers (mirror prox family)", "pmp"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_config("--config", "", "flat 'key = value' file; command-line flags take precedence");
  app.allow_config_extras(false);

  app.add_option("command", cfg.command, "gen-hawkes | estimate-network | pet-run | solve | compare")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("--solver", cfg.solver)->check(CLI::IsMember(kSolvers));
  app.add_option("--solvers", cfg.solvers, "comma-separated list for compare");
  app.add_option("--input", cfg.input, "problem file (solve, compare, pet-run) or event file (estimate-network)");
  app.add_option("--output", cfg.output, "history CSV; events file for gen-hawkes; file prefix for compare");
  app.add_option("--out-dir", cfg.out_dir, "directory for base.csv and infectivity.csv");
  app.add_option("--fstar-file", cfg.fstar_file, "file holding the reference optimal value f*");
  app.add_option("--setup", cfg.setup)->check(CLI::IsMember({"auto", "entropy", "entropy-shell", "euclidean"}));
  app.add_option("--stepsize", cfg.stepsize)->check(CLI::IsMember({"theory", "line-search", "constant"}));
  double alpha = 0.0;
  auto* alpha_opt = app.add_option("--alpha", alpha)->check(CLI::PositiveNumber);
  app.add_option("--gamma", cfg.gamma, "constant stepsize")->check(CLI::PositiveNumber);
  app.add_option("--safety", cfg.safety, "multiplier of the theory stepsize")->check(CLI::Range(1e-300, 1.0));
  app.add_option("--ls-scale", cfg.ls_scale, "line search starts at this multiple of the theory stepsize")
      ->check(CLI::PositiveNumber);
  app.add_option("--gamma0", cfg.gamma0, "mirror descent base stepsize; 0 tunes it on a grid")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--lipschitz0", cfg.lipschitz0)->check(CLI::PositiveNumber);
  app.add_option("--lambda1", cfg.lambda1)->check(CLI::NonNegativeNumber);
  app.add_option("--blocks", cfg.blocks)->check(CLI::PositiveNumber);
  app.add_option("--iters", cfg.iters)->check(CLI::NonNegativeNumber);
  app.add_option("--seed", cfg.seed);
  app.add_option("--report-every", cfg.report_every)->check(CLI::NonNegativeNumber);
  double budget = 0.0;
  auto* budget_opt = app.add_option("--pass-budget", budget)->check(CLI::PositiveNumber);
  app.add_option("--pass-step", cfg.pass_step)->check(CLI::PositiveNumber);
  app.add_option("--threads", cfg.threads)->check(CLI::NonNegativeNumber);
  app.add_option("--users", cfg.users)->check(CLI::PositiveNumber);
  app.add_option("--horizon", cfg.horizon)->check(CLI::PositiveNumber);
  app.add_option("--kernel-rate", cfg.kernel_rate)->check(CLI::PositiveNumber);
  app.add_option("--alpha1", cfg.alpha1)->check(CLI::PositiveNumber);
  app.add_option("--alpha2", cfg.alpha2)->check(CLI::PositiveNumber);
  app.add_option("--side", cfg.side)->check(CLI::Range(std::size_t{8}, std::size_t{1} << 15));
  app.add_option("--rows", cfg.rows, "detector rows; 0 means 2 * side^2")->check(CLI::NonNegativeNumber);
  app.add_option("--density", cfg.density)->check(CLI::Range(1e-12, 1.0));
  app.add_option("--noise", cfg.noise)->check(CLI::IsMember({"noiseless", "poisson"}));
  app.add_option("--counts", cfg.counts, "PET counts file (with --input)");
  app.add_option("--image", cfg.image, "PET reconstruction output");
  app.add_option("--save-instance", cfg.save_instance, "PET: write <prefix>.problem and <prefix>.counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::Error& e) {
    throw UsageError(e.what());
  }
  if (alpha_opt->count() > 0) cfg.alpha = alpha;
  if (budget_opt->count() > 0) cfg.pass_budget = budget;
  if (auto* c = app.get_config_ptr(); c && c->count() > 0) cfg.config_file = c->as<std::string>();

  const bool needs_input = cfg.command == "solve" || cfg.command == "compare" || cfg.command == "estimate-network";
  if (needs_input && cfg.input.empty()) throw UsageError("--input is required for " + cfg.command);
  if (cfg.command == "gen-hawkes" && cfg.output.empty()) throw UsageError("--output is required for gen-hawkes");
  if (cfg.command == "compare" && cfg.output.empty()) throw UsageError("--output (file prefix) is required for compare");
  if (cfg.stepsize == "constant" && !(cfg.gamma > 0.0)) throw UsageError("--stepsize constant needs --gamma");
  if (cfg.command == "pet-run" && !cfg.input.empty() && cfg.counts.empty()) {
    throw UsageError("--input for pet-run needs --counts");
  }
  for (const auto& s : split_list(cfg.solvers)) {
    if (std::find(kSolvers.begin(), kSolvers.end(), s) == kSolvers.end()) throw UsageError("unknown solver in --solvers: " + s);
  }
  return cfg;
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& c) {
  auto num = [](double v) { return format_double(v); };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string("default"); };
  return {
      {"command", c.command},
      {"solver", c.solver},
      {"solvers", c.solvers},
      {"input", c.input},
      {"output", c.output},
      {"out-dir", c.out_dir},
      {"fstar-file", c.fstar_file},
      {"config", c.config_file},
      {"setup", c.setup},
      {"stepsize", c.stepsize},
      {"alpha", opt(c.alpha)},
      {"gamma", num(c.gamma)},
      {"safety", num(c.safety)},
      {"ls-scale", num(c.ls_scale)},
      {"gamma0", num(c.gamma0)},
      {"lipschitz0", num(c.lipschitz0)},
      {"lambda1", num(c.lambda1)},
      {"blocks", std::to_string(c.blocks)},
      {"iters", std::to_string(c.iters)},
      {"seed", std::to_string(c.seed)},
      {"report-every", std::to_string(c.report_every)},
      {"pass-budget", opt(c.pass_budget)},
      {"pass-step", num(c.pass_step)},
      {"threads", std::to_string(c.threads)},
      {"users", std::to_string(c.users)},
      {"horizon", num(c.horizon)},
      {"kernel-rate", num(c.kernel_rate)},
      {"alpha1", num(c.alpha1)},
      {"alpha2", num(c.alpha2)},
      {"side", std::to_string(c.side)},
      {"rows", std::to_string(c.rows)},
      {"density", num(c.density)},
      {"noise", c.noise},
      {"counts", c.counts},
      {"image", c.image},
      {"save-instance", c.save_instance},
  };
}

namespace {

std::vector<std::string> header(const RunConfig& cfg, const std::vector<std::string>& extra = {}) {
  std::vector<std::string> lines;
  for (const auto& [k, v] : describe(cfg)) lines.push_back(k + " = " + v);
  lines.insert(lines.end(), extra.begin(), extra.end());
  return lines;
}

std::string history_text(const std::vector<HistoryRow>& rows, const std::vector<std::string>& comments) {
  std::ostringstream out;
  write_history_csv(out, rows, comments);
  return out.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_atomic(path, text);
  }
}

std::optional<double> read_fstar(const std::string& path) {
  if (path.empty()) return std::nullopt;
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  double v;
  std::string rest;
  if (!(in >> v) || (in >> rest) || !std::isfinite(v)) throw ParseError(path + ": expected a single finite number");
  return v;
}

ProximalSetup make_setup(const RunConfig& cfg, const std::string& solver) {
  std::string s = cfg.setup;
  if (s == "auto") s = (solver == "pg" || solver == "apg") ? "euclidean" : "entropy-shell";
  if (s == "euclidean") return ProximalSetup::euclidean();
  if (s == "entropy") return ProximalSetup::entropy();
  return ProximalSetup::entropy_shell_capped();
}

StepsizePolicy make_policy(const RunConfig& cfg) {
  if (cfg.stepsize == "constant") return StepsizePolicy::constant(cfg.gamma);
  if (cfg.stepsize == "theory") return StepsizePolicy::theory(cfg.safety);
  return StepsizePolicy::line_search(cfg.gamma, cfg.ls_scale);
}

SolveOptions make_options(const RunConfig& cfg, std::optional<double> f_star) {
  SolveOptions o;
  o.alpha = cfg.alpha;
  o.policy = make_policy(cfg);
  o.max_iters = cfg.iters;
  o.report_every = cfg.report_every;
  o.pass_budget = cfg.pass_budget;
  o.f_star = f_star;
  return o;
}

const std::vector<double> kMdGrid{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0};

// Runs `solver` on the problem data; `notes` collects derived settings for the CSV header.
SolveReport run_solver(const RunConfig& cfg, const std::string& solver, const ProblemData& data,
                       const SolveOptions& opts, std::vector<std::string>& notes) {
  const auto p = PoissonProblem::assemble(data.s, data.c, data.a, PenaltySpec::l1(cfg.lambda1, data.s.size()),
                                          make_setup(cfg, solver));
  if (solver == "cmp") return solve_cmp(p, opts);
  if (solver == "rb-cmp" || solver == "full-rb") {
    const auto part = BlockPartition::uniform(p.m(), std::min(cfg.blocks, p.m()));
    return solver == "rb-cmp" ? solve_rb_cmp(p, part, opts, cfg.seed) : solve_full_rb(p, part, opts, cfg.seed);
  }
  if (solver == "md") {
    double g0 = cfg.gamma0;
    if (!(g0 > 0.0)) {
      g0 = tune_md_stepsize(p, kMdGrid, opts);
      notes.push_back("md tuned gamma0 = " + format_double(g0));
    }
    return solve_md(p, g0, opts);
  }
  BaselineConfig bc;
  bc.kind = solver == "pg" ? BaselineConfig::Kind::prox_grad : BaselineConfig::Kind::acc_prox_grad;
  bc.lipschitz0 = cfg.lipschitz0;
  return solve_baseline(p, bc, opts);
}

int cmd_solve(const RunConfig& cfg) {
  const auto data = read_problem_file(cfg.input);
  const auto opts = make_options(cfg, read_fstar(cfg.fstar_file));
  std::vector<std::string> notes;
  const auto rep = run_solver(cfg, cfg.solver, data, opts, notes);
  emit(cfg.output, history_text(rep.history, header(cfg, notes)));
  return 0;
}

int cmd_compare(const RunConfig& cfg) {
  const auto data = read_problem_file(cfg.input);
  auto opts = make_options(cfg, read_fstar(cfg.fstar_file));
  // every solver gets the pass budget of cfg.iters batch CMP iterations unless given
  const double budget = cfg.pass_budget ? *cfg.pass_budget : 2.0 * static_cast<double>(cfg.iters);
  opts.pass_budget = budget;
  opts.max_iters = std::numeric_limits<std::size_t>::max();
  opts.report_every = 1;
  std::vector<std::pair<std::string, std::string>> outputs;
  for (const auto& solver : split_list(cfg.solvers)) {
    std::vector<std::string> notes{"compare solver = " + solver, "pass budget = " + format_double(budget)};
    const auto rep = run_solver(cfg, solver, data, opts, notes);
    const auto grid = align_to_pass_grid(rep.history, cfg.pass_step, budget);
    outputs.emplace_back(cfg.output + "." + solver + ".csv", history_text(grid, header(cfg, notes)));
  }
  for (const auto& [path, text] : outputs) write_text_atomic(path, text);
  return 0;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return dir.empty() ? name : dir + "/" + name;
}

int cmd_gen_hawkes(const RunConfig& cfg) {
  const auto net = random_network(cfg.users, cfg.seed);
  const auto seq = simulate_hawkes(net.base, net.infectivity, cfg.horizon, cfg.kernel_rate, cfg.seed + 1);
  write_events(cfg.output, seq);
  if (!cfg.out_dir.empty()) {
    write_base_csv(join_path(cfg.out_dir, "base.csv"), net.base);
    write_infectivity_csv(join_path(cfg.out_dir, "infectivity.csv"), net.infectivity, cfg.users);
  }
  return 0;
}

int cmd_estimate_network(const RunConfig& cfg) {
  const auto seq = read_events(cfg.input);
  NetworkOptions no;
  no.kernel_rate = cfg.kernel_rate;
  no.setup = {cfg.alpha1, cfg.alpha2};
  no.blocks = cfg.blocks;
  no.seed = cfg.seed;
  no.solve = make_options(cfg, read_fstar(cfg.fstar_file));
  std::vector<std::string> notes;
  const auto np = assemble_network_problem(precompute_stats(seq, cfg.kernel_rate), cfg.lambda1, no.setup);
  if (cfg.solver == "cmp") {
    no.solver = NetworkSolver::cmp;
  } else if (cfg.solver == "rb-cmp") {
    no.solver = NetworkSolver::rb_cmp;
  } else if (cfg.solver == "md") {
    no.solver = NetworkSolver::md;
    no.gamma0 = cfg.gamma0;
    if (!(no.gamma0 > 0.0)) {
      no.gamma0 = tune_md_stepsize(np.problem, kMdGrid, no.solve);
      notes.push_back("md tuned gamma0 = " + format_double(no.gamma0));
    }
  } else {
    throw UsageError("estimate-network supports cmp, rb-cmp and md");
  }
  const auto est = estimate_network(np, no);
  const std::string text = history_text(est.report.history, header(cfg, notes));
  emit(cfg.output, text);
  write_base_csv(join_path(cfg.out_dir, "base.csv"), est.base);
  write_infectivity_csv(join_path(cfg.out_dir, "infectivity.csv"), est.infectivity, np.users);
  return 0;
}

int cmd_pet_run(const RunConfig& cfg) {
  PETInstance inst;
  if (!cfg.input.empty()) {
    auto data = read_problem_file(cfg.input);
    inst = PETInstance::make(std::move(data.a), read_counts(cfg.counts));
  } else {
    const auto x = generate_phantom(cfg.side);
    const std::size_t n = x.size();
    const std::size_t m = cfg.rows > 0 ? cfg.rows : 2 * n;
    auto a = generate_system_matrix(m, n, cfg.density, cfg.seed);
    const bool noiseless = cfg.noise == "noiseless";
    auto w = simulate_counts(a, x, noiseless ? CountMode::noiseless : CountMode::poisson, cfg.seed + 1);
    inst = PETInstance::make(std::move(a), std::move(w), x, noiseless);
    if (!cfg.save_instance.empty()) {
      write_problem_file(cfg.save_instance + ".problem", inst.a.column_sums(), inst.w, inst.a);
      write_counts(cfg.save_instance + ".counts", inst.w);
    }
  }
  const auto rep = solve_pet(inst, make_options(cfg, read_fstar(cfg.fstar_file)));
  emit(cfg.output, history_text(rep.history, header(cfg, {"theta = " + format_double(inst.theta)})));
  if (!cfg.image.empty()) write_image_csv(cfg.image, rep.final_x);
  return 0;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& err) {
  try {
    if (cfg.threads > 0) omp_set_num_threads(static_cast<int>(cfg.threads));
    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "compare") return cmd_compare(cfg);
    if (cfg.command == "gen-hawkes") return cmd_gen_hawkes(cfg);
    if (cfg.command == "estimate-network") return cmd_estimate_network(cfg);
    if (cfg.command == "pet-run") return cmd_pet_run(cfg);
    err << "error: unknown command " << cfg.command << '\n';
    return 1;
  } catch (const StallError& e) {
    err << "error: solver stalled: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int main(int argc, const char* const* argv) {
  RunConfig cfg;
  try {
    cfg = parse_config(argc, argv);
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  }
  return run(cfg, std::cerr);
}

}  // namespace pmp::cli
