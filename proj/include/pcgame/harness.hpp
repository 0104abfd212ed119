#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcgame/channel.hpp"
#include "pcgame/stackelberg.hpp"

namespace pcgame {

struct SolverSettings {
  double grid_step = 2.0;
  double mu_tolerance = 1e-4;
  double coord_tolerance = 1e-7;
  double coord_gain_tolerance = 1e-7;
  std::size_t coord_max_sweeps = 100;
  std::size_t dual_max_iters = 64;
  double iw_tolerance = 0.0;
  std::size_t iw_max_iters = 10000;

  void apply(LeaderProblem& prob) const;
};

/// One Monte-Carlo study: admissible Rayleigh channels, Nash equilibrium by
/// iterative water-filling versus the leader's dual method.
struct ExperimentSpec {
  std::size_t trials = 1000;
  std::size_t num_users = 2;
  std::size_t num_bins = 20;
  std::vector<double> budgets{200.0, 200.0};
  double noise = 0.01;
  double direct_power = 1.0;
  double cross_power = 0.5;
  std::size_t leader = 0;
  RayleighProfile profile;
  SolverSettings solver;
  std::uint64_t master_seed = 20090301;
  std::size_t max_rejections = 10000;
  std::vector<double> cdf_grid;  // empty: 0.50, 0.51, ..., 3.00
  std::size_t threads = 1;

  Topology topology() const;
  std::vector<double> thresholds() const;
  void validate() const;
};

/// Every field is optional and defaults as above. "budget" may be a number
/// (shared by all users) or an array. Unknown keys are rejected.
ExperimentSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const ExperimentSpec& spec);

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t rejections = 0;
  std::vector<double> rate_ne;  // bits, per user
  std::vector<double> rate_sg;  // bits, per user, leader on the dual method
  std::vector<double> ratio;    // rate_sg / rate_ne
  std::size_t ne_iterations = 0;
  std::size_t dual_iterations = 0;
  std::size_t sweeps = 0;
  bool ne_converged = false;
  bool sg_converged = false;
  std::string error;  // non-empty when a solver threw

  bool converged() const { return error.empty() && ne_converged && sg_converged; }
};

struct UserSummary {
  double mean_ratio = 0.0;
  double median_ratio = 0.0;
  double frac_improved = 0.0;  // share of converged trials with rate_sg > rate_ne
  std::size_t n_converged = 0;
};

struct ExperimentSummary {
  std::size_t trials = 0;
  std::size_t n_converged = 0;
  std::size_t n_failed = 0;  // solver errors
  double mean_rejections = 0.0;
  double mean_dual_iterations = 0.0;
  double mean_sweeps = 0.0;
  std::vector<UserSummary> users;
};

struct CdfPoint {
  double threshold;
  double fraction;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;  // ordered by trial index
  ExperimentSummary summary;
};

TrialRecord run_trial(const ExperimentSpec& spec, std::size_t trial);

/// Deterministic in spec.master_seed regardless of spec.threads.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Statistics over converged trials only; failed ones are counted, not hidden.
ExperimentSummary summarize(std::span<const TrialRecord> records, std::size_t num_users);

/// Right-continuous empirical CDF, fraction of values <= each threshold.
std::vector<CdfPoint> empirical_cdf(std::span<const double> values, std::span<const double> grid);

/// Ratios of `user` over converged trials, in trial order.
std::vector<double> converged_ratios(std::span<const TrialRecord> records, std::size_t user);

// trial,seed,rejections,user,rate_ne_bits,rate_sg_bits,ratio,converged
void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records);
std::vector<TrialRecord> read_trials_csv(std::istream& in);
void write_cdf_csv(std::ostream& out, std::span<const CdfPoint> cdf);
nlohmann::json summary_to_json(const ExperimentSummary& summary);

/// Writes trials.csv, summary.json and cdf_user<k>.csv into `dir`.
void write_experiment(const std::filesystem::path& dir, const ExperimentSpec& spec,
                      const ExperimentResult& result);

}  // namespace pcgame
