#include "pcgame/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pcgame {

namespace {

void check_waterfill_input(std::span<const double> nu, double budget) {
  if (nu.empty()) throw std::invalid_argument("waterfill: no bins");
  if (!(budget > 0.0) || !std::isfinite(budget))
    throw std::invalid_argument("waterfill: budget must be positive and finite");
  for (double v : nu)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("waterfill: effective noise must be positive and finite");
}

void check_profile(const NormalizedChannel& nc, std::size_t user,
                   std::span<const PowerAllocation> profile) {
  if (profile.size() != nc.num_users() || user >= nc.num_users())
    throw std::invalid_argument("profile does not match the channel's user count");
  for (const auto& p : profile)
    if (p.power.size() != nc.num_bins())
      throw std::invalid_argument("allocation length does not match the channel's bin count");
}

}  // namespace

double PowerAllocation::total() const { return std::accumulate(power.begin(), power.end(), 0.0); }

bool PowerAllocation::feasible() const {
  return std::all_of(power.begin(), power.end(), [](double p) { return p >= 0.0; }) &&
         total() <= budget * (1.0 + 1e-9);
}

PowerAllocation uniform_allocation(std::size_t bins, double budget) {
  return {std::vector<double>(bins, budget / static_cast<double>(bins)), budget};
}

double rate_bits(const ChannelRealization& ch, std::size_t user,
                 std::span<const PowerAllocation> profile) {
  if (profile.size() != ch.num_users() || user >= ch.num_users())
    throw std::invalid_argument("profile does not match the channel's user count");
  double nats = 0.0;
  for (std::size_t f = 0; f < ch.num_bins(); ++f) {
    double denom = ch.noise(user, f);
    for (std::size_t j = 0; j < ch.num_users(); ++j)
      if (j != user) denom += profile[j].power[f] * ch.gain(j, user, f);
    nats += std::log1p(profile[user].power[f] * ch.gain(user, user, f) / denom);
  }
  return nats_to_bits(nats);
}

double rate_nats(const NormalizedChannel& nc, std::size_t user,
                 std::span<const PowerAllocation> profile) {
  check_profile(nc, user, profile);
  const auto nu = effective_noise(nc, user, profile);
  double nats = 0.0;
  for (std::size_t f = 0; f < nc.num_bins(); ++f) nats += std::log1p(profile[user].power[f] / nu[f]);
  return nats;
}

double rate_bits(const NormalizedChannel& nc, std::size_t user,
                 std::span<const PowerAllocation> profile) {
  return nats_to_bits(rate_nats(nc, user, profile));
}

std::vector<double> effective_noise(const NormalizedChannel& nc, std::size_t user,
                                    std::span<const PowerAllocation> profile) {
  check_profile(nc, user, profile);
  std::vector<double> nu(nc.num_bins());
  for (std::size_t f = 0; f < nc.num_bins(); ++f) {
    double v = nc.noise_norm(user, f);
    for (std::size_t j = 0; j < nc.num_users(); ++j)
      if (j != user) v += nc.cross(j, user, f) * profile[j].power[f];
    nu[f] = v;
  }
  return nu;
}

PowerAllocation waterfill_bisection(std::span<const double> nu, double budget) {
  check_waterfill_input(nu, budget);
  const double floor = *std::min_element(nu.begin(), nu.end());
  double lo = floor;
  double hi = floor + budget;
  auto filled = [&](double level) {
    double s = 0.0;
    for (double v : nu) s += std::max(0.0, level - v);
    return s;
  };
  const double eps = 1e-10 * budget;
  double level = hi;
  for (int it = 0; it < 200; ++it) {
    level = 0.5 * (lo + hi);
    const double s = filled(level);
    if (std::abs(s - budget) <= eps) break;
    if (s > budget)
      hi = level;
    else
      lo = level;
  }
  PowerAllocation out{std::vector<double>(nu.size()), budget};
  for (std::size_t f = 0; f < nu.size(); ++f) out.power[f] = std::max(0.0, level - nu[f]);
  return out;
}

std::size_t waterfill_closed_form(std::span<const double> nu, double budget, std::span<double> out,
                                  std::span<std::size_t> order) {
  const std::size_t n = nu.size();
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return nu[a] < nu[b] || (nu[a] == nu[b] && a < b);
  });
  // Smallest k with budget <= (k+1) nu_(k+1) - S_(k+1); k = n when none.
  std::size_t k = 1;
  double prefix = nu[order[0]];
  while (k < n) {
    const double next = nu[order[k]];
    const double upper = static_cast<double>(k + 1) * next - (prefix + next);
    if (budget <= upper) break;
    prefix += next;
    ++k;
  }
  const double level = (budget + prefix) / static_cast<double>(k);
  std::fill(out.begin(), out.end(), 0.0);
  if (k == 1) {
    out[order[0]] = budget;  // level - nu would round
    return k;
  }
  for (std::size_t m = 0; m < k; ++m) {
    const std::size_t f = order[m];
    out[f] = std::max(0.0, level - nu[f]);
  }
  return k;
}

WaterfillSolution waterfill_closed_form(std::span<const double> nu, double budget) {
  check_waterfill_input(nu, budget);
  WaterfillSolution sol;
  sol.allocation = {std::vector<double>(nu.size()), budget};
  std::vector<std::size_t> order(nu.size());
  sol.active_count = waterfill_closed_form(nu, budget, sol.allocation.power, order);
  double prefix = 0.0;
  for (std::size_t m = 0; m < sol.active_count; ++m) prefix += nu[order[m]];
  sol.level = (budget + prefix) / static_cast<double>(sol.active_count);
  return sol;
}

PowerAllocation best_response(const NormalizedChannel& nc, std::size_t user,
                              std::span<const PowerAllocation> profile, double budget) {
  const auto nu = effective_noise(nc, user, profile);
  return waterfill_closed_form(nu, budget).allocation;
}

PowerAllocation best_response(const PowerAllocation& leader, const NormalizedChannel& nc,
                              std::size_t follower, double budget) {
  if (nc.num_users() != 2 || follower > 1)
    throw std::invalid_argument("two-user best_response needs a two-user channel");
  std::vector<PowerAllocation> profile(2);
  profile[1 - follower] = leader;
  profile[follower] = {std::vector<double>(nc.num_bins(), 0.0), budget};
  return best_response(nc, follower, profile, budget);
}

}  // namespace pcgame
