#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pcgame/channel.hpp"
#include "pcgame/game.hpp"
#include "pcgame/waterfill.hpp"

namespace pcgame {

/// A single foresighted leader facing myopic followers that settle into the
/// Nash equilibrium of their sub-game. With one follower the response is the
/// closed-form water-fill; with several it is computed by iterative
/// water-filling.
struct LeaderProblem {
  NormalizedChannel channel;
  std::vector<double> budgets;  // every user, leader included
  std::size_t leader = 0;

  double grid_step = 0.1;               // Delta_P of the discretized searches
  double mu_min = 0.0;
  std::optional<double> mu_max;         // default max_f 1 / N_leader^f
  double mu_tolerance = 1e-6;           // bracket width, relative to its upper end
  double coord_tolerance = 1e-7;        // per-sweep change, relative to the leader budget
  double coord_gain_tolerance = 1e-7;   // per-sweep gain in L', relative to max(1, |L'|)
  std::size_t coord_max_sweeps = 100;   // T2 cap
  std::size_t dual_max_iters = 64;      // T1 cap
  bool restart_from_nash = true;        // each inner ascent starts at the NE, not at the previous mu's point
  double dual_box_multiple = 2.0;       // per-bin cap of the dual grid, in leader budgets
  double max_evaluations = 1e8;
  double iw_tolerance = 0.0;            // <= 0: 1e-8 * max budget
  std::size_t iw_max_iters = 10000;

  LeaderProblem(NormalizedChannel nc, std::vector<double> budgets, std::size_t leader = 0);

  double leader_budget() const { return budgets[leader]; }
  GameConfig game_config() const;
  void validate() const;
};

enum class StackelbergMethod { exhaustive, dual };

struct StackelbergResult {
  std::size_t leader = 0;
  std::vector<PowerAllocation> allocations;  // leader and induced follower response
  std::vector<double> rates_bits;
  double leader_rate_bits = 0.0;
  StackelbergMethod method = StackelbergMethod::exhaustive;
  std::optional<double> dual_value_bits;
  double mu = 0.0;
  std::size_t dual_iterations = 0;  // T1
  std::size_t sweeps = 0;           // T2, summed over dual iterations
  std::size_t evaluations = 0;
  bool converged = true;

  const PowerAllocation& leader_alloc() const { return allocations[leader]; }
};

/// Leader rate in bits once the followers have responded to `leader_power`.
/// Throws SolverError when a multi-follower sub-game fails to converge.
double leader_objective(std::span<const double> leader_power, const LeaderProblem& prob);

/// Full profile (leader and followers' response) induced by `leader_power`.
std::vector<PowerAllocation> induced_profile(std::span<const double> leader_power,
                                             const LeaderProblem& prob);

/// Rate the leader would get water-filling alone, with no interference.
double interference_free_bound(const LeaderProblem& prob);

/// Global optimum over the grid {0, step, ..., budget}^N restricted to the
/// budget simplex; ties go to the lexicographically smallest allocation.
/// Throws EvaluationCapExceeded when the grid exceeds prob.max_evaluations.
StackelbergResult exhaustive_stackelberg(const LeaderProblem& prob);

/// L'(P, mu) in nats: leader ln-rate + mu * (budget - sum P). The budget is
/// not enforced; P only needs to be nonnegative.
double lagrangian_value(std::span<const double> leader_power, double mu, const LeaderProblem& prob);

/// D'(mu) maximized exhaustively over the box grid {0, step, ..., box}^N with
/// box = dual_box_multiple * budget. The grid is evaluated once on
/// construction; queries are linear in the number of distinct grid sums.
class DualFunction {
 public:
  DualFunction(const LeaderProblem& prob, double grid_step);

  double value_nats(double mu) const;
  /// Sum power of the maximizer; on ties the smallest sum wins, which keeps
  /// the map exactly non-increasing in mu.
  double sum_power(double mu) const;
  std::vector<double> maximizer(double mu) const;
  std::size_t grid_points() const noexcept { return points_; }

 private:
  std::size_t arg_level(double mu) const;

  double step_;
  double budget_;
  std::size_t bins_;
  std::size_t points_ = 0;
  std::vector<double> best_;              // best ln-rate per integer grid sum
  std::vector<std::vector<std::size_t>> argbest_;  // grid units of that point
};

struct DualBound {
  double mu_star = 0.0;
  double value_nats = 0.0;
  double value_bits = 0.0;
  double sum_power = 0.0;  // at mu_star
  std::size_t iterations = 0;
};

/// Minimizes D'(mu) by bisection on the sum power of the grid maximizer.
/// Any mu >= 0 yields an upper bound; the smallest value seen is returned.
DualBound dual_bound(const LeaderProblem& prob, double grid_step);

struct LocalAscent {
  std::size_t sweeps = 0;
  bool converged = false;
};

/// Coordinate-wise local maximization of L'(., mu) starting from
/// `leader_power` (updated in place). Each bin is searched on the coarse grid
/// {0, step, ..., budget}, then refined by golden section around the best
/// grid point. An update is kept only if it raises L'; when `trace` is given
/// it receives L' after every sweep's bin update.
LocalAscent local_lagrangian_ascent(const LeaderProblem& prob, double mu,
                                    std::vector<double>& leader_power,
                                    std::vector<double>* trace = nullptr);

/// Low-complexity dual method: bisect on mu, raising it while the local
/// maximizer of L'(., mu) overspends; every local ascent starts from the
/// leader's Nash allocation. The final allocation is scaled down onto the
/// budget. The best feasible point visited is kept,
/// so the result is never worse than the Nash equilibrium it started from.
StackelbergResult algorithm1_dual(const LeaderProblem& prob);

}  // namespace pcgame
