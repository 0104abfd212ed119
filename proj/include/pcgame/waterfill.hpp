#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "pcgame/channel.hpp"

namespace pcgame {

/// One user's transmit PSD across bins together with its sum-power budget.
struct PowerAllocation {
  std::vector<double> power;
  double budget = 0.0;

  double total() const;
  /// P^f >= 0 and sum P^f <= budget * (1 + 1e-9).
  bool feasible() const;

  friend bool operator==(const PowerAllocation&, const PowerAllocation&) = default;
};

/// budget / N in every bin.
PowerAllocation uniform_allocation(std::size_t bins, double budget);

inline double nats_to_bits(double nats) { return nats / std::numbers::ln2; }

/// Rate of `user` in bits with interference treated as noise, from raw gains.
double rate_bits(const ChannelRealization& ch, std::size_t user,
                 std::span<const PowerAllocation> profile);

/// Same quantity on the normalized channel, in nats and in bits.
double rate_nats(const NormalizedChannel& nc, std::size_t user,
                 std::span<const PowerAllocation> profile);
double rate_bits(const NormalizedChannel& nc, std::size_t user,
                 std::span<const PowerAllocation> profile);

/// nu^f = N_k^f + sum_{j != k} alpha_jk^f P_j^f. The entry profile[user] is ignored.
std::vector<double> effective_noise(const NormalizedChannel& nc, std::size_t user,
                                    std::span<const PowerAllocation> profile);

/// P^f = (level - nu^f)^+ with the level found by bisection on
/// [min nu, min nu + budget] until the sum is within 1e-10 * budget.
PowerAllocation waterfill_bisection(std::span<const double> nu, double budget);

struct WaterfillSolution {
  PowerAllocation allocation;
  std::size_t active_count = 0;
  double level = 0.0;
};

/// Exact water-fill: rank bins by nu (ties by index), take the largest prefix
/// k whose bins all sit below the level (B + S_k)/k, fill them to that level.
WaterfillSolution waterfill_closed_form(std::span<const double> nu, double budget);

/// Allocation-free variant for hot loops. `out` receives the powers and
/// `order` is scratch of the same length. Returns the active count.
std::size_t waterfill_closed_form(std::span<const double> nu, double budget,
                                  std::span<double> out, std::span<std::size_t> order);

/// Water-fill of `user` against everyone else in `profile`.
PowerAllocation best_response(const NormalizedChannel& nc, std::size_t user,
                              std::span<const PowerAllocation> profile, double budget);

/// Two-user form: the follower's water-fill against the other user's allocation.
PowerAllocation best_response(const PowerAllocation& leader, const NormalizedChannel& nc,
                              std::size_t follower, double budget);

}  // namespace pcgame
