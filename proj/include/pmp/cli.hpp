#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pmp::cli {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --help: the message is the help text.
struct HelpRequested : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;  // gen-hawkes | estimate-network | pet-run | solve | compare
  std::string solver = "cmp";  // cmp | rb-cmp | full-rb | md | pg | apg
  std::string solvers = "cmp,rb-cmp,md";  // compare
  std::string input;
  std::string output;
  std::string out_dir;
  std::string fstar_file;
  std::string config_file;
  std::string setup = "auto";  // auto | entropy | entropy-shell | euclidean
  std::string stepsize = "line-search";  // theory | line-search | constant

  std::optional<double> alpha;
  double gamma = 0.0;   // constant stepsize
  double safety = 1.0;  // theory multiplier
  double ls_scale = 1.0;  // line search: first trial = ls_scale * theory value (when --gamma is 0)
  double gamma0 = 0.0;  // md; 0 tunes on a grid
  double lipschitz0 = 1.0;  // pg/apg
  double lambda1 = 0.0;
  std::size_t blocks = 10;
  std::size_t iters = 1000;
  std::uint64_t seed = 0;
  std::size_t report_every = 1;
  std::optional<double> pass_budget;
  double pass_step = 1.0;
  std::size_t threads = 0;  // 0: runtime default

  // hawkes
  std::size_t users = 5;
  double horizon = 1000.0;
  double kernel_rate = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;

  // pet
  std::size_t side = 32;
  std::size_t rows = 0;  // 0: 2 * side^2
  double density = 0.005;
  std::string noise = "noiseless";  // noiseless | poisson
  std::string counts;
  std::string image;
  std::string save_instance;
};

/// argv[0] is the program name. A `--config file` of flat `key = value`
/// lines supplies defaults; flags override it and the last occurrence of a
/// repeated flag wins. Throws UsageError (or HelpRequested).
RunConfig parse_config(int argc, const char* const* argv);

/// Every effective setting as (key, value), in a fixed order.
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg);

/// Exit status: 0 success, 1 usage/IO/parse/data errors, 2 solver stall.
int run(const RunConfig& cfg, std::ostream& err);

/// parse_config + run with diagnostics on stderr.
int main(int argc, const char* const* argv);

}  // namespace pmp::cli
