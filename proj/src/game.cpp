#include "pcgame/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pcgame {

GameConfig GameConfig::with_budgets(std::vector<double> budgets) {
  GameConfig cfg;
  cfg.budgets = std::move(budgets);
  return cfg;
}

double GameConfig::tolerance() const {
  if (iw_tolerance > 0.0) return iw_tolerance;
  const double max_budget = budgets.empty() ? 1.0 : *std::max_element(budgets.begin(), budgets.end());
  return 1e-8 * max_budget;
}

bool GameConfig::is_fixed(std::size_t user) const {
  return std::find(fixed_users.begin(), fixed_users.end(), user) != fixed_users.end();
}

void GameConfig::validate(std::size_t num_users) const {
  if (budgets.size() != num_users) throw std::invalid_argument("game: one budget per user required");
  for (double b : budgets)
    if (!(b > 0.0)) throw std::invalid_argument("game: budgets must be > 0");
  for (auto u : fixed_users)
    if (u >= num_users) throw std::invalid_argument("game: fixed user out of range");
  if (!order.empty()) {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != i || sorted.size() != num_users)
        throw std::invalid_argument("game: order must be a permutation of the users");
  }
}

EquilibriumResult iterative_waterfilling(const NormalizedChannel& nc, const GameConfig& cfg,
                                         std::optional<std::span<const PowerAllocation>> initial) {
  const std::size_t users = nc.num_users();
  const std::size_t bins = nc.num_bins();
  cfg.validate(users);

  EquilibriumResult res;
  if (initial) {
    if (initial->size() != users) throw std::invalid_argument("game: initial profile has wrong size");
    res.allocations.assign(initial->begin(), initial->end());
    for (std::size_t k = 0; k < users; ++k) {
      auto& a = res.allocations[k];
      if (a.power.size() != bins) throw std::invalid_argument("game: initial allocation has wrong length");
      a.budget = cfg.budgets[k];
      if (cfg.is_fixed(k) && !a.feasible())
        throw std::invalid_argument("game: fixed user " + std::to_string(k) + " has an infeasible allocation");
    }
  } else {
    if (!cfg.fixed_users.empty())
      throw std::invalid_argument("game: fixed users need an initial profile");
    for (std::size_t k = 0; k < users; ++k) res.allocations.push_back(uniform_allocation(bins, cfg.budgets[k]));
  }

  std::vector<std::size_t> order = cfg.order;
  if (order.empty()) {
    order.resize(users);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  std::erase_if(order, [&](std::size_t k) { return cfg.is_fixed(k); });

  const double tol = cfg.tolerance();
  std::vector<double> nu(bins);
  std::vector<double> next(bins);
  std::vector<std::size_t> scratch(bins);
  std::vector<PowerAllocation> previous;

  auto respond = [&](std::size_t k, std::span<const PowerAllocation> view) {
    for (std::size_t f = 0; f < bins; ++f) {
      double v = nc.noise_norm(k, f);
      for (std::size_t j = 0; j < users; ++j)
        if (j != k) v += nc.cross(j, k, f) * view[j].power[f];
      nu[f] = v;
    }
    waterfill_closed_form(nu, cfg.budgets[k], next, scratch);
  };

  for (res.iterations = 0; res.iterations < cfg.iw_max_iters && !order.empty();) {
    ++res.iterations;
    double change = 0.0;
    if (cfg.schedule == UpdateSchedule::simultaneous) previous = res.allocations;
    for (std::size_t k : order) {
      if (cfg.schedule == UpdateSchedule::simultaneous)
        respond(k, previous);
      else
        respond(k, res.allocations);
      auto& cur = res.allocations[k].power;
      for (std::size_t f = 0; f < bins; ++f) change = std::max(change, std::abs(next[f] - cur[f]));
      std::copy(next.begin(), next.end(), cur.begin());
    }
    if (change <= tol) {
      res.converged = true;
      break;
    }
  }
  if (order.empty()) res.converged = true;

  for (std::size_t k = 0; k < users; ++k) res.rates_bits.push_back(rate_bits(nc, k, res.allocations));
  return res;
}

EquilibriumResult follower_subgame_ne(const NormalizedChannel& nc, const GameConfig& cfg,
                                      std::span<const FixedAllocation> leaders) {
  GameConfig sub = cfg;
  sub.fixed_users.clear();
  std::vector<PowerAllocation> profile;
  for (std::size_t k = 0; k < nc.num_users(); ++k)
    profile.push_back(uniform_allocation(nc.num_bins(), k < cfg.budgets.size() ? cfg.budgets[k] : 1.0));
  for (const auto& l : leaders) {
    if (l.user >= nc.num_users()) throw std::invalid_argument("game: leader index out of range");
    profile[l.user] = l.allocation;
    sub.fixed_users.push_back(l.user);
  }
  return iterative_waterfilling(nc, sub, std::span<const PowerAllocation>(profile));
}

}  // namespace pcgame
