#include "pcgame/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pcgame/error.hpp"

namespace pcgame {

namespace {

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::size_t grid_units(double range, double step) {
  return static_cast<std::size_t>(std::floor(range / step + 1e-9));
}

// Advances `m` to the next point of {m : sum m <= units} in lexicographic
// order; `used` tracks sum m. Returns false after the last point.
bool next_simplex_point(std::vector<std::size_t>& m, std::size_t& used, std::size_t units) {
  for (std::size_t i = m.size(); i-- > 0;) {
    if (used < units) {
      ++m[i];
      ++used;
      return true;
    }
    used -= m[i];
    m[i] = 0;
  }
  return false;
}

// Same for the box {0..per_bin}^N.
bool next_box_point(std::vector<std::size_t>& m, std::size_t per_bin) {
  for (std::size_t i = m.size(); i-- > 0;) {
    if (m[i] < per_bin) {
      ++m[i];
      return true;
    }
    m[i] = 0;
  }
  return false;
}

// Leader ln-rate as a function of the leader's PSD. The one-follower case
// uses the closed-form water-fill; otherwise the followers' sub-game is
// solved by iterative water-filling, optionally warm-started from the last
// response.
class ResponseModel {
 public:
  ResponseModel(const LeaderProblem& prob, bool warm_start)
      : prob_{prob},
        users_{prob.channel.num_users()},
        bins_{prob.channel.num_bins()},
        warm_{warm_start},
        nu_(bins_),
        follower_power_(bins_),
        order_(bins_) {
    if (users_ > 2) {
      cfg_ = prob.game_config();
      cfg_.iw_tolerance = cfg_.tolerance();
      cfg_.budgets[prob.leader] = std::numeric_limits<double>::infinity();
      cfg_.fixed_users = {prob.leader};
      for (std::size_t k = 0; k < users_; ++k)
        profile_.push_back(uniform_allocation(bins_, prob.budgets[k]));
    }
  }

  double leader_nats(std::span<const double> leader_power) {
    const auto& nc = prob_.channel;
    const std::size_t lead = prob_.leader;
    if (users_ == 1) {
      double r = 0.0;
      for (std::size_t f = 0; f < bins_; ++f) r += std::log1p(leader_power[f] / nc.noise_norm(lead, f));
      return r;
    }
    if (users_ == 2) {
      const std::size_t fol = 1 - lead;
      for (std::size_t f = 0; f < bins_; ++f)
        nu_[f] = nc.noise_norm(fol, f) + nc.cross(lead, fol, f) * leader_power[f];
      waterfill_closed_form(nu_, prob_.budgets[fol], follower_power_, order_);
      double r = 0.0;
      for (std::size_t f = 0; f < bins_; ++f)
        r += std::log1p(leader_power[f] /
                        (nc.noise_norm(lead, f) + nc.cross(fol, lead, f) * follower_power_[f]));
      return r;
    }
    solve_followers(leader_power);
    return rate_nats(nc, lead, profile_);
  }

  // Prepares repeated evaluations that differ from `leader_power` only in
  // `bin`. In the two-user case the follower's effective noise of the other
  // bins is kept sorted, so each evaluation is a linear merge, not a sort.
  void focus(std::span<const double> leader_power, std::size_t bin) {
    lp_.assign(leader_power.begin(), leader_power.end());
    bin_ = bin;
    if (users_ != 2) return;
    const auto& nc = prob_.channel;
    const std::size_t fol = 1 - prob_.leader;
    sorted_.clear();
    for (std::size_t f = 0; f < bins_; ++f) {
      nu_[f] = nc.noise_norm(fol, f) + nc.cross(prob_.leader, fol, f) * lp_[f];
      if (f != bin) sorted_.push_back(nu_[f]);
    }
    std::sort(sorted_.begin(), sorted_.end());
    prefix_.assign(sorted_.size() + 1, 0.0);
    for (std::size_t i = 0; i < sorted_.size(); ++i) prefix_[i + 1] = prefix_[i] + sorted_[i];
  }

  // Leader ln-rate with the focused bin set to `x`.
  double leader_nats_at(double x) {
    lp_[bin_] = x;
    if (users_ != 2) return leader_nats(lp_);
    const auto& nc = prob_.channel;
    const std::size_t lead = prob_.leader;
    const std::size_t fol = 1 - lead;
    const double budget = prob_.budgets[fol];
    const double own = nc.noise_norm(fol, bin_) + nc.cross(lead, fol, bin_) * x;
    nu_[bin_] = own;
    const std::size_t pos = static_cast<std::size_t>(
        std::lower_bound(sorted_.begin(), sorted_.end(), own) - sorted_.begin());
    auto value = [&](std::size_t i) { return i < pos ? sorted_[i] : (i == pos ? own : sorted_[i - 1]); };
    auto partial = [&](std::size_t i) { return i <= pos ? prefix_[i] : prefix_[i - 1] + own; };
    std::size_t k = 1;
    while (k < bins_) {
      const double next = value(k);
      if (budget <= static_cast<double>(k + 1) * next - (partial(k) + next)) break;
      ++k;
    }
    const double level = (budget + partial(k)) / static_cast<double>(k);
    double r = 0.0;
    for (std::size_t f = 0; f < bins_; ++f) {
      const double p2 = std::max(0.0, level - nu_[f]);
      r += std::log1p(lp_[f] / (nc.noise_norm(lead, f) + nc.cross(fol, lead, f) * p2));
    }
    return r;
  }

  // Response from a cold start: the reference value reported in results.
  std::vector<PowerAllocation> canonical_profile(std::span<const double> leader_power) {
    const std::size_t lead = prob_.leader;
    std::vector<PowerAllocation> out;
    if (users_ <= 2) {
      leader_nats(leader_power);
      out.resize(users_);
      out[lead] = {std::vector<double>(leader_power.begin(), leader_power.end()), prob_.budgets[lead]};
      if (users_ == 2) out[1 - lead] = {follower_power_, prob_.budgets[1 - lead]};
      return out;
    }
    for (std::size_t k = 0; k < users_; ++k) profile_[k] = uniform_allocation(bins_, prob_.budgets[k]);
    solve_followers(leader_power);
    out = profile_;
    out[lead].budget = prob_.budgets[lead];
    return out;
  }

 private:
  void solve_followers(std::span<const double> leader_power) {
    const std::size_t lead = prob_.leader;
    profile_[lead].power.assign(leader_power.begin(), leader_power.end());
    if (!warm_)
      for (std::size_t k = 0; k < users_; ++k)
        if (k != lead) profile_[k] = uniform_allocation(bins_, prob_.budgets[k]);
    auto res = iterative_waterfilling(prob_.channel, cfg_, std::span<const PowerAllocation>(profile_));
    if (!res.converged)
      throw SolverError("follower sub-game did not converge within " +
                        std::to_string(cfg_.iw_max_iters) + " rounds");
    profile_ = std::move(res.allocations);
  }

  const LeaderProblem& prob_;
  std::size_t users_;
  std::size_t bins_;
  bool warm_;
  std::vector<double> nu_;
  std::vector<double> follower_power_;
  std::vector<std::size_t> order_;
  std::vector<double> lp_;
  std::size_t bin_ = 0;
  std::vector<double> sorted_;
  std::vector<double> prefix_;
  GameConfig cfg_;
  std::vector<PowerAllocation> profile_;
};

void check_leader_power(std::span<const double> p, const LeaderProblem& prob, bool enforce_budget) {
  if (p.size() != prob.channel.num_bins())
    throw std::invalid_argument("leader allocation length does not match the channel");
  for (double v : p)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("leader power must be >= 0");
  if (enforce_budget && sum(p) > prob.leader_budget() * (1.0 + 1e-9))
    throw std::invalid_argument("leader allocation exceeds its budget");
}

StackelbergResult make_result(ResponseModel& model, const LeaderProblem& prob,
                              std::span<const double> leader_power, StackelbergMethod method) {
  StackelbergResult res;
  res.leader = prob.leader;
  res.method = method;
  res.allocations = model.canonical_profile(leader_power);
  for (std::size_t k = 0; k < res.allocations.size(); ++k)
    res.rates_bits.push_back(rate_bits(prob.channel, k, res.allocations));
  res.leader_rate_bits = res.rates_bits[prob.leader];
  return res;
}

double default_mu_max(const LeaderProblem& prob) {
  double m = 0.0;
  for (std::size_t f = 0; f < prob.channel.num_bins(); ++f)
    m = std::max(m, 1.0 / prob.channel.noise_norm(prob.leader, f));
  return m;
}

// Maximizes phi on [a, b] by golden section; returns the best abscissa seen.
template <class F>
std::pair<double, double> golden_max(F&& phi, double a, double b, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = phi(x1);
  double f2 = phi(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = phi(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = phi(x1);
    }
  }
  return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

LocalAscent ascend(ResponseModel& model, const LeaderProblem& prob, double mu,
                   std::vector<double>& p, std::vector<double>* trace, std::size_t& evaluations) {
  const double budget = prob.leader_budget();
  const std::size_t bins = p.size();
  const std::size_t units = grid_units(budget, prob.grid_step);
  std::vector<double> grid;
  for (std::size_t i = 0; i <= units; ++i) grid.push_back(static_cast<double>(i) * prob.grid_step);
  if (grid.back() < budget) grid.push_back(budget);
  const double x_tol = std::max(prob.coord_tolerance * budget, 1e-12);

  auto lagrangian = [&](std::span<const double> x) {
    ++evaluations;
    return model.leader_nats(x) + mu * (budget - sum(x));
  };

  LocalAscent out;
  double current = lagrangian(p);
  while (out.sweeps < prob.coord_max_sweeps) {
    ++out.sweeps;
    const double start = current;
    double change = 0.0;
    for (std::size_t f = 0; f < bins; ++f) {
      const double keep = p[f];
      const double rest = sum(p) - keep;
      model.focus(p, f);
      auto phi = [&](double x) {
        ++evaluations;
        return model.leader_nats_at(x) + mu * (budget - rest - x);
      };
      std::size_t best_i = 0;
      double best_v = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = phi(grid[i]);
        if (v > best_v) {
          best_v = v;
          best_i = i;
        }
      }
      double best_x = grid[best_i];
      const double a = grid[best_i == 0 ? 0 : best_i - 1];
      const double b = grid[std::min(best_i + 1, grid.size() - 1)];
      if (b > a) {
        const auto [gx, gv] = golden_max(phi, a, b, x_tol);
        if (gv > best_v) {
          best_v = gv;
          best_x = gx;
        }
      }
      if (best_v > current + 1e-13 * std::max(1.0, std::abs(current))) {
        p[f] = best_x;
        current = best_v;
        change = std::max(change, std::abs(best_x - keep));
      } else {
        p[f] = keep;
      }
      if (trace) trace->push_back(current);
    }
    // A sweep that barely raises L' is a stall on a ridge, not progress.
    if (change <= x_tol || current - start <= prob.coord_gain_tolerance * std::max(1.0, std::abs(current))) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace

EvaluationCapExceeded::EvaluationCapExceeded(double required, double cap)
    : SolverError("search needs about " + std::to_string(required) +
                  " objective evaluations, above the cap of " + std::to_string(cap)),
      required_{required},
      cap_{cap} {}

LeaderProblem::LeaderProblem(NormalizedChannel nc, std::vector<double> budgets_, std::size_t leader_)
    : channel{std::move(nc)}, budgets{std::move(budgets_)}, leader{leader_} {
  validate();
}

GameConfig LeaderProblem::game_config() const {
  GameConfig cfg = GameConfig::with_budgets(budgets);
  cfg.iw_tolerance = iw_tolerance;
  cfg.iw_max_iters = iw_max_iters;
  return cfg;
}

void LeaderProblem::validate() const {
  if (budgets.size() != channel.num_users())
    throw std::invalid_argument("leader problem: one budget per user required");
  if (leader >= channel.num_users()) throw std::invalid_argument("leader problem: leader out of range");
  for (double b : budgets)
    if (!(b > 0.0)) throw std::invalid_argument("leader problem: budgets must be > 0");
  if (!(grid_step > 0.0)) throw std::invalid_argument("leader problem: grid_step must be > 0");
  if (!(mu_min >= 0.0) || (mu_max && !(*mu_max > mu_min)))
    throw std::invalid_argument("leader problem: need 0 <= mu_min < mu_max");
  if (!(mu_tolerance > 0.0) || !(coord_tolerance > 0.0) || !(coord_gain_tolerance >= 0.0))
    throw std::invalid_argument("leader problem: tolerances must be > 0");
  if (!(dual_box_multiple >= 1.0)) throw std::invalid_argument("leader problem: dual box must cover the budget");
}

double leader_objective(std::span<const double> leader_power, const LeaderProblem& prob) {
  check_leader_power(leader_power, prob, true);
  ResponseModel model(prob, false);
  return nats_to_bits(model.leader_nats(leader_power));
}

std::vector<PowerAllocation> induced_profile(std::span<const double> leader_power,
                                             const LeaderProblem& prob) {
  check_leader_power(leader_power, prob, false);
  ResponseModel model(prob, false);
  return model.canonical_profile(leader_power);
}

double interference_free_bound(const LeaderProblem& prob) {
  const std::size_t bins = prob.channel.num_bins();
  std::vector<double> noise(bins);
  for (std::size_t f = 0; f < bins; ++f) noise[f] = prob.channel.noise_norm(prob.leader, f);
  const auto wf = waterfill_closed_form(noise, prob.leader_budget());
  double r = 0.0;
  for (std::size_t f = 0; f < bins; ++f) r += std::log1p(wf.allocation.power[f] / noise[f]);
  return nats_to_bits(r);
}

StackelbergResult exhaustive_stackelberg(const LeaderProblem& prob) {
  prob.validate();
  const std::size_t bins = prob.channel.num_bins();
  const std::size_t units = grid_units(prob.leader_budget(), prob.grid_step);
  // Grid points on the simplex: C(units + N, N).
  double required = 1.0;
  for (std::size_t i = 1; i <= bins; ++i)
    required *= static_cast<double>(units + i) / static_cast<double>(i);
  if (required > prob.max_evaluations) throw EvaluationCapExceeded(required, prob.max_evaluations);

  ResponseModel model(prob, true);
  std::vector<std::size_t> m(bins, 0);
  std::vector<double> p(bins, 0.0);
  std::vector<double> best_p = p;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  std::size_t evaluations = 0;
  for (;;) {
    for (std::size_t f = 0; f < bins; ++f) p[f] = static_cast<double>(m[f]) * prob.grid_step;
    const double v = model.leader_nats(p);
    ++evaluations;
    if (v > best) {
      best = v;
      best_p = p;
    }
    if (!next_simplex_point(m, used, units)) break;
  }

  auto res = make_result(model, prob, best_p, StackelbergMethod::exhaustive);
  res.evaluations = evaluations;
  return res;
}

double lagrangian_value(std::span<const double> leader_power, double mu, const LeaderProblem& prob) {
  check_leader_power(leader_power, prob, false);
  if (!(mu >= 0.0)) throw std::invalid_argument("lagrangian_value: mu must be >= 0");
  ResponseModel model(prob, false);
  return model.leader_nats(leader_power) + mu * (prob.leader_budget() - sum(leader_power));
}

DualFunction::DualFunction(const LeaderProblem& prob, double grid_step)
    : step_{grid_step}, budget_{prob.leader_budget()}, bins_{prob.channel.num_bins()} {
  prob.validate();
  if (!(grid_step > 0.0)) throw std::invalid_argument("dual function: grid_step must be > 0");
  const std::size_t per_bin = grid_units(prob.dual_box_multiple * budget_, step_);
  const double required = std::pow(static_cast<double>(per_bin + 1), static_cast<double>(bins_));
  if (required > prob.max_evaluations) throw EvaluationCapExceeded(required, prob.max_evaluations);

  best_.assign(per_bin * bins_ + 1, -std::numeric_limits<double>::infinity());
  argbest_.assign(best_.size(), {});
  ResponseModel model(prob, true);
  std::vector<std::size_t> m(bins_, 0);
  std::vector<double> p(bins_, 0.0);
  for (;;) {
    std::size_t s = 0;
    for (std::size_t f = 0; f < bins_; ++f) {
      p[f] = static_cast<double>(m[f]) * step_;
      s += m[f];
    }
    const double v = model.leader_nats(p);
    ++points_;
    if (v > best_[s]) {
      best_[s] = v;
      argbest_[s] = m;
    }
    if (!next_box_point(m, per_bin)) break;
  }
}

std::size_t DualFunction::arg_level(double mu) const {
  std::size_t arg = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < best_.size(); ++s) {
    const double v = best_[s] - mu * step_ * static_cast<double>(s);
    if (v > best) {
      best = v;
      arg = s;
    }
  }
  return arg;
}

double DualFunction::value_nats(double mu) const {
  const std::size_t s = arg_level(mu);
  return best_[s] + mu * (budget_ - step_ * static_cast<double>(s));
}

double DualFunction::sum_power(double mu) const { return step_ * static_cast<double>(arg_level(mu)); }

std::vector<double> DualFunction::maximizer(double mu) const {
  const auto& m = argbest_[arg_level(mu)];
  std::vector<double> p(bins_);
  for (std::size_t f = 0; f < bins_; ++f) p[f] = static_cast<double>(m[f]) * step_;
  return p;
}

DualBound dual_bound(const LeaderProblem& prob, double grid_step) {
  const DualFunction dual(prob, grid_step);
  const double budget = prob.leader_budget();
  double lo = prob.mu_min;
  double hi = prob.mu_max.value_or(default_mu_max(prob));
  for (int grow = 0; dual.sum_power(hi) > budget; ++grow) {
    if (grow >= 60) throw SolverError("dual_bound: could not bracket the dual optimum");
    lo = hi;
    hi *= 2.0;
  }

  DualBound out;
  auto visit = [&](double mu) {
    const double v = dual.value_nats(mu);
    if (out.iterations == 0 || v < out.value_nats) {
      out.value_nats = v;
      out.mu_star = mu;
      out.sum_power = dual.sum_power(mu);
    }
    ++out.iterations;
  };
  visit(lo);
  visit(hi);
  while (hi - lo > prob.mu_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    visit(mid);
    if (dual.sum_power(mid) > budget)
      lo = mid;
    else
      hi = mid;
  }
  out.value_bits = nats_to_bits(out.value_nats);
  return out;
}

LocalAscent local_lagrangian_ascent(const LeaderProblem& prob, double mu,
                                    std::vector<double>& leader_power, std::vector<double>* trace) {
  prob.validate();
  check_leader_power(leader_power, prob, false);
  ResponseModel model(prob, true);
  std::size_t evaluations = 0;
  return ascend(model, prob, mu, leader_power, trace, evaluations);
}

StackelbergResult algorithm1_dual(const LeaderProblem& prob) {
  prob.validate();
  const double budget = prob.leader_budget();
  const auto ne = iterative_waterfilling(prob.channel, prob.game_config());

  ResponseModel model(prob, true);
  std::vector<double> p = ne.allocations[prob.leader].power;
  std::size_t evaluations = 0;

  std::vector<double> incumbent = p;
  double incumbent_value = model.leader_nats(p);
  auto consider = [&](const std::vector<double>& x) {
    std::vector<double> y = x;
    const double total = sum(y);
    if (total > budget)
      for (double& v : y) v *= budget / total;
    const double v = model.leader_nats(y);
    ++evaluations;
    if (v > incumbent_value) {
      incumbent_value = v;
      incumbent = std::move(y);
    }
  };

  double lo = prob.mu_min;
  double hi = prob.mu_max.value_or(default_mu_max(prob));
  std::size_t t1 = 0;
  std::size_t sweeps = 0;
  bool mu_converged = false;
  while (t1 < prob.dual_max_iters) {
    ++t1;
    const double mu = 0.5 * (lo + hi);
    if (prob.restart_from_nash) p = ne.allocations[prob.leader].power;
    sweeps += ascend(model, prob, mu, p, nullptr, evaluations).sweeps;
    consider(p);
    if (sum(p) > budget)
      lo = mu;
    else
      hi = mu;
    if (hi - lo <= prob.mu_tolerance * hi) {
      mu_converged = true;
      break;
    }
  }
  const double mu = 0.5 * (lo + hi);
  if (prob.restart_from_nash) p = ne.allocations[prob.leader].power;
  const auto last = ascend(model, prob, mu, p, nullptr, evaluations);
  sweeps += last.sweeps;
  const double dual_nats = model.leader_nats(p) + mu * (budget - sum(p));
  consider(p);

  auto res = make_result(model, prob, incumbent, StackelbergMethod::dual);
  res.dual_value_bits = nats_to_bits(dual_nats);
  res.mu = mu;
  res.dual_iterations = t1;
  res.sweeps = sweeps;
  res.evaluations = evaluations;
  res.converged = ne.converged && mu_converged && last.converged;
  return res;
}

}  // namespace pcgame
