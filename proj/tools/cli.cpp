#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "pcgame/channel.hpp"
#include "pcgame/channel_io.hpp"
#include "pcgame/error.hpp"
#include "pcgame/game.hpp"
#include "pcgame/harness.hpp"
#include "pcgame/stackelberg.hpp"
#include "pcgame/worked_examples.hpp"

namespace pcgame::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 20090301;

struct Options {
  int verbosity = 0;

  std::string channel_path;
  std::vector<double> budgets;
  std::size_t leader = 0;
  double grid_step = 0.1;
  std::string method = "dual";
  std::string schedule = "sequential";
  double iw_tolerance = 0.0;
  std::size_t iw_max_iters = 10000;

  int example = 1;

  std::string config_path;
  std::string out_dir = ".";
  std::size_t threads = 0;
  std::size_t trials = 0;

  std::size_t users = 2;
  std::size_t bins = 20;
  double direct_power = 1.0;
  double cross_power = 0.5;
  double noise = 0.01;
  RayleighProfile profile;
  std::uint64_t seed = kDefaultSeed;
  bool seed_given = false;
  std::size_t max_rejections = 10000;
  std::string out_file;
};

std::string format_alloc(const PowerAllocation& a) {
  std::ostringstream s;
  s << std::setprecision(10) << '[';
  for (std::size_t f = 0; f < a.power.size(); ++f) s << (f ? ", " : "") << a.power[f];
  s << ']';
  return s.str();
}

std::vector<double> resolve_budgets(const Options& o, std::size_t users) {
  if (o.budgets.size() == 1) return std::vector<double>(users, o.budgets.front());
  if (o.budgets.size() != users)
    throw std::invalid_argument("--budget takes one value or one per user (" + std::to_string(users) + ")");
  return o.budgets;
}

LeaderProblem load_problem(const Options& o) {
  const auto ch = read_channel_file(o.channel_path);
  LeaderProblem prob(normalize(ch), resolve_budgets(o, ch.num_users()), o.leader);
  prob.grid_step = o.grid_step;
  prob.iw_tolerance = o.iw_tolerance;
  prob.iw_max_iters = o.iw_max_iters;
  prob.validate();
  return prob;
}

void print_stackelberg(std::ostream& out, const char* label, const StackelbergResult& r) {
  out << label << ":\n";
  for (std::size_t k = 0; k < r.allocations.size(); ++k)
    out << "  user " << k << (k == r.leader ? " (leader)" : "") << ": rate " << std::setprecision(10)
        << r.rates_bits[k] << " bits, P = " << format_alloc(r.allocations[k]) << "\n";
  if (r.method == StackelbergMethod::dual)
    out << "  dual iterations " << r.dual_iterations << ", sweeps " << r.sweeps << ", mu " << r.mu
        << ", converged " << (r.converged ? "yes" : "no") << "\n";
  else
    out << "  grid evaluations " << r.evaluations << "\n";
}

int cmd_nash(const Options& o, std::ostream& out) {
  const auto ch = read_channel_file(o.channel_path);
  const auto nc = normalize(ch);
  GameConfig cfg = GameConfig::with_budgets(resolve_budgets(o, ch.num_users()));
  cfg.iw_tolerance = o.iw_tolerance;
  cfg.iw_max_iters = o.iw_max_iters;
  cfg.schedule = o.schedule == "simultaneous" ? UpdateSchedule::simultaneous : UpdateSchedule::sequential;
  if (!is_diagonally_dominant(nc)) out << "warning: channel is not diagonally dominant\n";
  const auto res = iterative_waterfilling(nc, cfg);
  for (std::size_t k = 0; k < res.allocations.size(); ++k)
    out << "user " << k << ": rate " << std::setprecision(10) << res.rates_bits[k]
        << " bits, P = " << format_alloc(res.allocations[k]) << "\n";
  out << "rounds " << res.iterations << ", converged " << (res.converged ? "yes" : "no") << "\n";
  return res.converged ? kExitOk : kExitSolver;
}

int cmd_stackelberg(const Options& o, std::ostream& out) {
  const auto prob = load_problem(o);
  bool ok = true;
  if (o.method == "exhaustive" || o.method == "both")
    print_stackelberg(out, "exhaustive", exhaustive_stackelberg(prob));
  if (o.method == "dual" || o.method == "both") {
    const auto r = algorithm1_dual(prob);
    print_stackelberg(out, "dual", r);
    ok = r.converged;
  }
  return ok ? kExitOk : kExitSolver;
}

int cmd_bounds(const Options& o, std::ostream& out) {
  const auto prob = load_problem(o);
  out << std::setprecision(10) << "interference-free bound: " << interference_free_bound(prob) << " bits\n";
  const auto b = dual_bound(prob, o.grid_step);
  out << "dual bound: " << b.value_bits << " bits (mu* = " << b.mu_star << ", sum power " << b.sum_power
      << ")\n";
  return kExitOk;
}

int cmd_example(const Options& o, std::ostream& out) {
  const auto rep = reproduce_example(o.example);
  print_report(out, rep);
  return rep.all_pass() ? kExitOk : kExitSolver;
}

int cmd_montecarlo(const Options& o, std::ostream& out) {
  std::ifstream in(o.config_path);
  if (!in) throw FormatError("cannot open config file '" + o.config_path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  auto spec = spec_from_json(doc);
  if (o.threads > 0) spec.threads = o.threads;
  if (o.trials > 0) spec.trials = o.trials;
  if (o.seed_given) spec.master_seed = o.seed;
  const auto res = run_experiment(spec);
  write_experiment(o.out_dir, spec, res);
  const auto& s = res.summary;
  out << "trials " << s.trials << ", converged " << s.n_converged << ", failed " << s.n_failed << "\n";
  for (std::size_t k = 0; k < s.users.size(); ++k)
    out << "user " << k << ": mean ratio " << std::setprecision(6) << s.users[k].mean_ratio << ", median "
        << s.users[k].median_ratio << ", improved " << s.users[k].frac_improved << "\n";
  out << "mean dual iterations " << s.mean_dual_iterations << ", mean rejections " << s.mean_rejections << "\n";
  out << "wrote " << (std::filesystem::path(o.out_dir) / "trials.csv").string() << "\n";
  return kExitOk;
}

int cmd_gen_channel(const Options& o, std::ostream& out, std::ostream& err) {
  const auto topo = Topology::uniform(o.users, o.bins, o.direct_power, o.cross_power, o.noise);
  const auto draw = sample_admissible_channel(o.profile, topo, o.seed, o.max_rejections);
  if (o.verbosity > 0) err << "rejections: " << draw.rejections << "\n";
  if (o.out_file.empty()) {
    out << channel_to_json(draw.channel).dump(2) << "\n";
  } else {
    write_channel_file(o.out_file, draw.channel);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nash and Stackelberg power control on Gaussian interference channels", "pcgame"};
  app.require_subcommand(1, 1);
  Options o;
  app.add_flag("-v,--verbose", o.verbosity, "More diagnostics on stderr");

  auto add_channel_opts = [&](CLI::App* sub) {
    sub->add_option("--channel", o.channel_path, "Channel JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--budget", o.budgets, "Power budget, one value or one per user")->required();
    sub->add_option("--iw-tol", o.iw_tolerance, "Iterative water-filling tolerance (0: 1e-8 * max budget)");
    sub->add_option("--iw-max-iters", o.iw_max_iters, "Iterative water-filling round cap");
  };

  auto* nash = app.add_subcommand("nash", "Nash equilibrium by iterative water-filling");
  add_channel_opts(nash);
  nash->add_option("--schedule", o.schedule, "sequential or simultaneous")
      ->check(CLI::IsMember({"sequential", "simultaneous"}));

  auto* stack = app.add_subcommand("stackelberg", "Leader's Stackelberg strategy");
  add_channel_opts(stack);
  stack->add_option("--method", o.method, "exhaustive, dual or both")
      ->check(CLI::IsMember({"exhaustive", "dual", "both"}));
  stack->add_option("--grid-step", o.grid_step, "Power grid step")->check(CLI::PositiveNumber);
  stack->add_option("--leader", o.leader, "Leader index (0-based)");

  auto* bounds = app.add_subcommand("bounds", "Interference-free and dual upper bounds");
  add_channel_opts(bounds);
  bounds->add_option("--grid-step", o.grid_step, "Dual grid step")->check(CLI::PositiveNumber);
  bounds->add_option("--leader", o.leader, "Leader index (0-based)");

  auto* example = app.add_subcommand("example", "Reproduce worked example 1 or 2");
  example->add_option("which", o.example, "1 or 2")->required()->check(CLI::IsMember({1, 2}));

  auto* mc = app.add_subcommand("montecarlo", "Monte-Carlo comparison of NE and the dual method");
  mc->add_option("--config", o.config_path, "Experiment JSON config")->required()->check(CLI::ExistingFile);
  mc->add_option("--out", o.out_dir, "Output directory");
  mc->add_option("--threads", o.threads, "Worker threads (overrides config)");
  mc->add_option("--trials", o.trials, "Trial count (overrides config)");
  mc->add_option("--seed", o.seed, "Master seed (overrides config)")->each([&](const std::string&) {
    o.seed_given = true;
  });

  auto* gen = app.add_subcommand("gen-channel", "Sample an admissible Rayleigh channel as JSON");
  gen->add_option("--users", o.users, "Number of users")->check(CLI::Range(2, 64));
  gen->add_option("--bins", o.bins, "Number of frequency bins")->check(CLI::PositiveNumber);
  gen->add_option("--direct-power", o.direct_power, "Total ray power of direct links");
  gen->add_option("--cross-power", o.cross_power, "Total ray power of cross links");
  gen->add_option("--noise", o.noise, "Receiver noise PSD");
  gen->add_option("--rays", o.profile.num_rays, "Number of rays");
  gen->add_option("--ray-spacing", o.profile.ray_spacing, "Delay between rays [s]");
  gen->add_option("--bandwidth", o.profile.bandwidth, "Bandwidth [Hz]");
  gen->add_option("--decay", o.profile.decay_constant, "Power-delay decay constant [s]");
  gen->add_option("--seed", o.seed, "Random seed");
  gen->add_option("--max-rejections", o.max_rejections, "Rejection cap");
  gen->add_option("--out", o.out_file, "Output file (default stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (nash->parsed()) return cmd_nash(o, out);
    if (stack->parsed()) return cmd_stackelberg(o, out);
    if (bounds->parsed()) return cmd_bounds(o, out);
    if (example->parsed()) return cmd_example(o, out);
    if (mc->parsed()) return cmd_montecarlo(o, out);
    if (gen->parsed()) return cmd_gen_channel(o, out, err);
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitUsage;
}

}  // namespace pcgame::cli
