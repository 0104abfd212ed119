#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pcgame/channel.hpp"
#include "pcgame/waterfill.hpp"

namespace pcgame {

enum class UpdateSchedule {
  sequential,    // Gauss-Seidel: each user sees the updates made earlier in the round
  simultaneous,  // Jacobi: every user responds to the previous round
};

struct GameConfig {
  std::vector<double> budgets;           // one per user
  std::vector<std::size_t> fixed_users;  // allocations frozen (leaders)
  double iw_tolerance = 0.0;             // <= 0 selects 1e-8 * max budget
  std::size_t iw_max_iters = 10000;      // full rounds
  UpdateSchedule schedule = UpdateSchedule::sequential;
  std::vector<std::size_t> order;        // round-robin order; empty = by index

  static GameConfig with_budgets(std::vector<double> budgets);

  double tolerance() const;
  bool is_fixed(std::size_t user) const;
  void validate(std::size_t num_users) const;
};

struct EquilibriumResult {
  std::vector<PowerAllocation> allocations;
  std::vector<double> rates_bits;
  std::size_t iterations = 0;  // full rounds performed
  bool converged = false;
};

/// Best-response dynamics over the non-fixed users. Stops once a full round
/// moves no bin by more than the tolerance (l-infinity over all users), or
/// after iw_max_iters rounds with converged = false.
///
/// `initial` is a full profile. It is required when fixed users exist, since
/// it carries their allocations; otherwise it defaults to uniform budget/N.
EquilibriumResult iterative_waterfilling(
    const NormalizedChannel& nc, const GameConfig& cfg,
    std::optional<std::span<const PowerAllocation>> initial = std::nullopt);

struct FixedAllocation {
  std::size_t user;
  PowerAllocation allocation;
};

/// Nash equilibrium of the followers' sub-game with the given leaders held
/// fixed; leader interference enters the followers' effective noise.
/// cfg.fixed_users is replaced by the leaders' indices.
EquilibriumResult follower_subgame_ne(const NormalizedChannel& nc, const GameConfig& cfg,
                                      std::span<const FixedAllocation> leaders);

}  // namespace pcgame
