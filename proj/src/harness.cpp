#include "pcgame/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "pcgame/error.hpp"
#include "pcgame/game.hpp"
#include "pcgame/seed.hpp"

namespace pcgame {

void SolverSettings::apply(LeaderProblem& prob) const {
  prob.grid_step = grid_step;
  prob.mu_tolerance = mu_tolerance;
  prob.coord_tolerance = coord_tolerance;
  prob.coord_gain_tolerance = coord_gain_tolerance;
  prob.coord_max_sweeps = coord_max_sweeps;
  prob.dual_max_iters = dual_max_iters;
  prob.iw_tolerance = iw_tolerance;
  prob.iw_max_iters = iw_max_iters;
}

Topology ExperimentSpec::topology() const {
  return Topology::uniform(num_users, num_bins, direct_power, cross_power, noise);
}

std::vector<double> ExperimentSpec::thresholds() const {
  if (!cdf_grid.empty()) return cdf_grid;
  std::vector<double> grid;
  for (int i = 50; i <= 300; ++i) grid.push_back(i / 100.0);
  return grid;
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (num_users < 2) throw std::invalid_argument("experiment: need a leader and at least one follower");
  if (budgets.size() != num_users) throw std::invalid_argument("experiment: one budget per user required");
  if (leader >= num_users) throw std::invalid_argument("experiment: leader out of range");
  if (threads < 1) throw std::invalid_argument("experiment: threads must be >= 1");
  profile.validate();
  topology().validate();
}

TrialRecord run_trial(const ExperimentSpec& spec, std::size_t trial) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = derive_seed(spec.master_seed, trial);
  const std::size_t users = spec.num_users;
  rec.rate_ne.assign(users, std::nan(""));
  rec.rate_sg.assign(users, std::nan(""));
  rec.ratio.assign(users, std::nan(""));
  try {
    auto draw = sample_admissible_channel(spec.profile, spec.topology(), rec.seed, spec.max_rejections);
    rec.rejections = draw.rejections;
    LeaderProblem prob(normalize(draw.channel), spec.budgets, spec.leader);
    spec.solver.apply(prob);

    const auto ne = iterative_waterfilling(prob.channel, prob.game_config());
    rec.ne_iterations = ne.iterations;
    rec.ne_converged = ne.converged;
    const auto sg = algorithm1_dual(prob);
    rec.dual_iterations = sg.dual_iterations;
    rec.sweeps = sg.sweeps;
    rec.sg_converged = sg.converged;
    for (std::size_t k = 0; k < users; ++k) {
      rec.rate_ne[k] = ne.rates_bits[k];
      rec.rate_sg[k] = sg.rates_bits[k];
      rec.ratio[k] = rec.rate_sg[k] / rec.rate_ne[k];
    }
  } catch (const SolverError& e) {
    rec.error = e.what();
  }
  return rec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult out;
  out.records.resize(spec.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < spec.trials; t = next++) out.records[t] = run_trial(spec, t);
  };
  const std::size_t workers = std::min(spec.threads, spec.trials);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  out.summary = summarize(out.records, spec.num_users);
  return out;
}

std::vector<double> converged_ratios(std::span<const TrialRecord> records, std::size_t user) {
  std::vector<double> r;
  for (const auto& rec : records)
    if (rec.converged()) r.push_back(rec.ratio.at(user));
  return r;
}

ExperimentSummary summarize(std::span<const TrialRecord> records, std::size_t num_users) {
  ExperimentSummary s;
  s.trials = records.size();
  double rejections = 0.0;
  double dual_iterations = 0.0;
  double sweeps = 0.0;
  for (const auto& rec : records) {
    rejections += static_cast<double>(rec.rejections);
    if (!rec.error.empty()) ++s.n_failed;
    if (!rec.converged()) continue;
    ++s.n_converged;
    dual_iterations += static_cast<double>(rec.dual_iterations);
    sweeps += static_cast<double>(rec.sweeps);
  }
  if (s.trials > 0) s.mean_rejections = rejections / static_cast<double>(s.trials);
  if (s.n_converged > 0) {
    s.mean_dual_iterations = dual_iterations / static_cast<double>(s.n_converged);
    s.mean_sweeps = sweeps / static_cast<double>(s.n_converged);
  }

  for (std::size_t k = 0; k < num_users; ++k) {
    UserSummary u;
    auto ratios = converged_ratios(records, k);
    u.n_converged = ratios.size();
    std::size_t improved = 0;
    for (const auto& rec : records)
      if (rec.converged() && rec.rate_sg[k] > rec.rate_ne[k]) ++improved;
    if (!ratios.empty()) {
      double total = 0.0;
      for (double r : ratios) total += r;
      u.mean_ratio = total / static_cast<double>(ratios.size());
      std::sort(ratios.begin(), ratios.end());
      const std::size_t n = ratios.size();
      u.median_ratio = n % 2 == 1 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
      u.frac_improved = static_cast<double>(improved) / static_cast<double>(n);
    }
    s.users.push_back(u);
  }
  return s;
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> values, std::span<const double> grid) {
  if (values.empty()) throw std::invalid_argument("empirical_cdf: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> cdf;
  cdf.reserve(grid.size());
  for (double t : grid) {
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    cdf.push_back({t, static_cast<double>(count) / static_cast<double>(sorted.size())});
  }
  return cdf;
}

}  // namespace pcgame
