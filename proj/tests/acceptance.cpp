// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Usage: pcgame_acceptance [criterion ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "pcgame/channel.hpp"
#include "pcgame/channel_io.hpp"
#include "pcgame/game.hpp"
#include "pcgame/harness.hpp"
#include "pcgame/seed.hpp"
#include "pcgame/stackelberg.hpp"
#include "pcgame/waterfill.hpp"
#include "pcgame/worked_examples.hpp"

using namespace pcgame;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
  }
  void note(const std::string& what) { notes.push_back("      " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

double max_bin_error(const PowerAllocation& a, std::vector<double> expected) {
  double e = 0.0;
  for (std::size_t f = 0; f < expected.size(); ++f) e = std::max(e, std::abs(a.power[f] - expected[f]));
  return e;
}

// Two-user instances for the small-N criteria: unit direct power, cross 0.5,
// unit noise, budgets 10.
LeaderProblem small_instance(std::size_t bins, std::uint64_t seed, double step) {
  const auto draw = sample_admissible_channel(RayleighProfile{}, Topology::uniform(2, bins, 1.0, 0.5, 1.0), seed);
  LeaderProblem prob(normalize(draw.channel), {10, 10}, 0);
  prob.grid_step = step;
  return prob;
}

Outcome criterion1() {
  Outcome o;
  const auto prob = worked_example_problem(1);
  const auto ne = iterative_waterfilling(prob.channel, prob.game_config());
  o.check(ne.converged, "iterative water-filling converged");
  const double e1 = max_bin_error(ne.allocations[0], {2, 8});
  const double e2 = max_bin_error(ne.allocations[1], {8, 2});
  o.check(e1 <= 1e-6 && e2 <= 1e-6, fmt("NE allocations {2,8}/{8,2}: max bin error %.2e (tol 1e-6)", std::max(e1, e2)));
  for (std::size_t k = 0; k < 2; ++k)
    o.check(std::abs(ne.rates_bits[k] - 2.645) <= 1e-3,
            fmt("NE rate user %zu = %.6f, reference 2.645 +- 1e-3 (off by %.2e)", k, ne.rates_bits[k],
                std::abs(ne.rates_bits[k] - 2.645)));
  o.note(fmt("exact rate at {2,8}/{8,2} is log2(6.25) = %.6f", std::log2(6.25)));

  auto fine = prob;
  fine.grid_step = 0.01;
  const auto se = exhaustive_stackelberg(fine);
  o.check(max_bin_error(se.leader_alloc(), {0, 10}) <= 1e-9,
          fmt("exhaustive leader {%.4f, %.4f}, expected {0, 10}", se.leader_alloc().power[0],
              se.leader_alloc().power[1]));
  o.check(std::abs(se.leader_rate_bits - 2.939) <= 5e-3, fmt("R1 = %.6f, reference 2.939 +- 5e-3", se.leader_rate_bits));
  o.check(std::abs(se.rates_bits[1] - 3.474) <= 5e-3, fmt("R2 = %.6f, reference 3.474 +- 5e-3", se.rates_bits[1]));
  return o;
}

Outcome criterion2() {
  Outcome o;
  auto prob = worked_example_problem(2);
  const auto ne = iterative_waterfilling(prob.channel, prob.game_config());
  o.check(ne.converged, "iterative water-filling converged");
  const double e = std::max(max_bin_error(ne.allocations[0], {0, 10}), max_bin_error(ne.allocations[1], {10, 0}));
  o.check(e <= 1e-6, fmt("NE allocations {0,10}/{10,0}: max bin error %.2e", e));
  prob.grid_step = 0.01;
  const auto se = exhaustive_stackelberg(prob);
  const double es = std::max(max_bin_error(se.allocations[0], {0, 10}), max_bin_error(se.allocations[1], {10, 0}));
  o.check(es <= 1e-6, fmt("SE allocations {0,10}/{10,0}: max bin error %.2e", es));
  for (std::size_t k = 0; k < 2; ++k) {
    o.check(std::abs(ne.rates_bits[k] - 3.460) <= 5e-3, fmt("NE rate user %zu = %.6f, reference 3.460 +- 5e-3", k, ne.rates_bits[k]));
    o.check(std::abs(se.rates_bits[k] - 3.460) <= 5e-3, fmt("SE rate user %zu = %.6f, reference 3.460 +- 5e-3", k, se.rates_bits[k]));
  }
  const double gain = se.leader_rate_bits - ne.rates_bits[0];
  o.check(gain <= 1e-6, fmt("exhaustive optimum - NE leader rate = %.2e (tol 1e-6, NE on grid)", gain));
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::mt19937_64 rng(derive_seed(3, 0));
  std::uniform_int_distribution<std::size_t> n_dist(1, 16);
  std::uniform_real_distribution<double> log_nu(std::log(0.01), std::log(100.0)), log_b(std::log(0.1), std::log(1000.0));
  double worst_agree = 0.0, worst_margin = std::numeric_limits<double>::infinity();
  std::size_t disagree = 0, beaten = 0;
  const int instances = 10000, samples = 1000;
  for (int t = 0; t < instances; ++t) {
    const auto n = n_dist(rng);
    std::vector<double> nu(n);
    for (auto& x : nu) x = std::exp(log_nu(rng));
    const double budget = std::exp(log_b(rng));
    const auto cf = waterfill_closed_form(nu, budget).allocation.power;
    const auto bi = waterfill_bisection(nu, budget).power;
    double agree = 0.0;
    for (std::size_t f = 0; f < n; ++f) agree = std::max(agree, std::abs(cf[f] - bi[f]) / budget);
    worst_agree = std::max(worst_agree, agree);
    if (agree > 1e-8) ++disagree;
    const double r_cf = oracle::log_rate(nu, cf), r_bi = oracle::log_rate(nu, bi);
    // Bisection may stop up to 1e-10 * budget short of the budget; at a
    // marginal rate of at most 1 / min nu that is its rate slack.
    const double slack = 1e-10 * budget / *std::min_element(nu.begin(), nu.end());
    for (int s = 0; s < samples; ++s) {
      const auto p = oracle::random_feasible(n, budget, rng, s % 4 != 0);
      const double r = oracle::log_rate(nu, p);
      const double round = 1e-12 * std::max(1.0, r);
      worst_margin = std::min({worst_margin, r_cf - r, r_bi + slack - r});
      if (r_cf - r < -round || r_bi + slack - r < -round) ++beaten;
    }
  }
  o.check(disagree == 0, fmt("closed form vs bisection over %d instances: worst per-bin gap %.2e x budget (tol 1e-8)",
                             instances, worst_agree));
  o.check(beaten == 0, fmt("%d random feasible allocations per instance: %zu beat a water-fill (min margin %.2e nats, bisection credited its budget tolerance)",
                           samples, beaten, worst_margin));
  return o;
}

Outcome criterion4() {
  Outcome o;
  std::size_t converged = 0, below_ne = 0, close = 0;
  std::vector<double> gaps;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const std::size_t bins = 2 + static_cast<std::size_t>(t % 3);
    const auto prob = small_instance(bins, derive_seed(4, static_cast<std::uint64_t>(t)), 0.1);
    const auto ne = iterative_waterfilling(prob.channel, prob.game_config());
    const auto a1 = algorithm1_dual(prob);
    const auto ex = exhaustive_stackelberg(prob);
    const double gap = ex.leader_rate_bits - a1.leader_rate_bits;
    gaps.push_back(gap);
    if (gap <= 0.05) ++close;
    if (a1.converged) {
      ++converged;
      if (a1.leader_rate_bits < ne.rates_bits[0] - 1e-6) ++below_ne;
    }
  }
  o.check(below_ne == 0, fmt("leader rate >= NE - 1e-6 on all %zu converged trials (%zu violations)", converged, below_ne));
  o.check(close >= 80, fmt("within 0.05 bit of the exhaustive optimum on %zu/%d trials (need >= 80%%)", close, trials));
  o.note(fmt("gap to exhaustive optimum [bits]: median %.2e, 90%% %.2e, max %.2e, min %.2e", quantile(gaps, 0.5),
             quantile(gaps, 0.9), quantile(gaps, 1.0), quantile(gaps, 0.0)));
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::size_t weak = 0, tighter = 0, gapped = 0, monotone = 0;
  std::vector<double> gaps;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const auto prob = small_instance(2, derive_seed(5, static_cast<std::uint64_t>(t)), 0.1);
    const double opt = exhaustive_stackelberg(prob).leader_rate_bits;
    const auto db = dual_bound(prob, prob.grid_step);
    const double bound = interference_free_bound(prob);
    gaps.push_back(db.value_bits - opt);
    if (opt <= db.value_bits + 1e-6) ++weak;
    if (db.value_bits - opt > 1e-4) {
      ++gapped;
      if (db.value_bits < bound) ++tighter;
    }
    const DualFunction d(prob, prob.grid_step);
    const double top = 2.0 * std::max(db.mu_star, 1e-3);
    bool mono = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      const double sp = d.sum_power(top * i / 19.0);
      if (sp > prev) mono = false;
      prev = sp;
    }
    if (mono) ++monotone;
  }
  o.check(weak == trials, fmt("optimum <= D'(mu*) + 1e-6 on %zu/%d instances", weak, trials));
  o.check(tighter == gapped, fmt("D'(mu*) < R1max on %zu/%zu instances with a gap above 1e-4", tighter, gapped));
  o.check(monotone == trials, fmt("grid sum power non-increasing over a 20-point mu sweep on %zu/%d", monotone, trials));
  o.note(fmt("duality gap [bits]: median %.2e, max %.2e", quantile(gaps, 0.5), quantile(gaps, 1.0)));
  return o;
}

struct Ratios {
  double mean_leader = 0.0;
  std::vector<double> frac_improved;
  std::size_t converged = 0;
  std::size_t leader_below = 0;
};

Ratios ratio_stats(const ExperimentResult& r, std::size_t users) {
  Ratios s;
  s.mean_leader = r.summary.users[0].mean_ratio;
  for (std::size_t k = 0; k < users; ++k) s.frac_improved.push_back(r.summary.users[k].frac_improved);
  s.converged = r.summary.n_converged;
  for (double x : converged_ratios(r.records, 0))
    if (x < 1.0 - 1e-6) ++s.leader_below;
  return s;
}

Outcome criterion6() {
  Outcome o;
  ExperimentSpec spec;
  spec.trials = 1000;
  spec.cross_power = 0.5;
  const auto strong = run_experiment(spec);
  spec.cross_power = 0.25;
  const auto weak = run_experiment(spec);
  const auto s = ratio_stats(strong, 2), w = ratio_stats(weak, 2);
  o.check(s.leader_below == 0,
          fmt("cross 0.5: leader ratio >= 1 - 1e-6 on all %zu converged trials (%zu violations)", s.converged, s.leader_below));
  o.check(s.mean_leader - 1.0 > 0.10, fmt("cross 0.5: mean leader improvement %.2f%% (need > 10%%)", 100 * (s.mean_leader - 1)));
  o.check(w.mean_leader < s.mean_leader, fmt("cross 0.25: mean leader improvement %.2f%% < %.2f%% at cross 0.5",
                                             100 * (w.mean_leader - 1), 100 * (s.mean_leader - 1)));
  o.check(s.frac_improved[1] > 0.5, fmt("cross 0.5: myopic user improved in %.1f%% of converged trials (need > 50%%)",
                                        100 * s.frac_improved[1]));
  o.note(fmt("cross 0.5: %zu/%zu converged, %zu failed; follower mean improvement %.2f%% (reference 38%%/45%%, 95%% improved)",
             strong.summary.n_converged, strong.summary.trials, strong.summary.n_failed,
             100 * (strong.summary.users[1].mean_ratio - 1)));
  o.note(fmt("cross 0.25: %zu/%zu converged; leader/follower mean improvement %.2f%%/%.2f%% (reference 27%%/32%%)",
             weak.summary.n_converged, weak.summary.trials, 100 * (w.mean_leader - 1),
             100 * (weak.summary.users[1].mean_ratio - 1)));
  o.note(fmt("mean dual iterations %.1f, mean rejections %.1f (cross 0.5)", strong.summary.mean_dual_iterations,
             strong.summary.mean_rejections));
  return o;
}

Outcome criterion7() {
  Outcome o;
  ExperimentSpec spec;
  spec.trials = 200;
  spec.num_users = 3;
  spec.budgets = {200, 200, 200};
  spec.cross_power = 0.25;
  const auto r = run_experiment(spec);
  const auto s = ratio_stats(r, 3);
  o.check(s.leader_below == 0,
          fmt("leader ratio >= 1 - 1e-6 on all %zu converged trials (%zu violations)", s.converged, s.leader_below));
  for (std::size_t k = 1; k < 3; ++k)
    o.check(s.frac_improved[k] > 0.5,
            fmt("myopic user %zu improved in %.1f%% of converged trials (need > 50%%)", k, 100 * s.frac_improved[k]));
  o.note(fmt("%zu/%zu converged; mean improvement %.2f%% / %.2f%% / %.2f%% (reference 34%% / 10.5%%, > 83%% improved)",
             r.summary.n_converged, r.summary.trials, 100 * (r.summary.users[0].mean_ratio - 1),
             100 * (r.summary.users[1].mean_ratio - 1), 100 * (r.summary.users[2].mean_ratio - 1)));
  return o;
}

Outcome criterion8() {
  Outcome o;
  const auto topo = Topology::uniform(2, 20, 1.0, 0.5, 0.01);
  const std::vector<double> budgets{200, 200};
  const auto cfg = GameConfig::with_budgets(budgets);
  std::mt19937_64 rng(derive_seed(8, 0));
  std::size_t agree = 0, runs_failed = 0;
  double worst = 0.0;
  const int channels = 1000, starts = 20;
  for (int c = 0; c < channels; ++c) {
    const auto nc = normalize(sample_admissible_channel(RayleighProfile{}, topo, derive_seed(8, 1 + c)).channel);
    std::vector<EquilibriumResult> res;
    for (int s = 0; s < starts; ++s) {
      std::vector<PowerAllocation> init;
      for (double b : budgets) init.push_back({oracle::random_feasible(20, b, rng, s % 2 == 0), b});
      res.push_back(iterative_waterfilling(nc, cfg, std::span<const PowerAllocation>(init)));
      if (!res.back().converged) ++runs_failed;
    }
    double spread = 0.0;
    for (const auto& r : res)
      for (std::size_t k = 0; k < 2; ++k)
        spread = std::max(spread, max_bin_error(r.allocations[k], res.front().allocations[k].power));
    worst = std::max(worst, spread);
    if (spread <= 1e2 * cfg.tolerance()) ++agree;
  }
  o.check(runs_failed == 0, fmt("%d x %d runs converged (%zu did not)", channels, starts, runs_failed));
  o.check(agree == static_cast<std::size_t>(channels),
          fmt("starts agree within 1e2 x tolerance on %zu/%d channels (worst spread %.2e, tol %.2e)", agree, channels,
              worst, 1e2 * cfg.tolerance()));
  return o;
}

Outcome criterion9() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "pcgame_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "mc.json");
    cfg << R"({"trials": 8, "num_bins": 10, "budget": 50, "solver": {"grid_step": 1.0}})";
  }
  auto call = [](std::vector<std::string> args) {
    args.insert(args.begin(), "pcgame");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return std::to_string(code) + "\n" + out.str();
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };

  const std::string chan = (dir / "chan.json").string();
  const std::vector<std::vector<std::string>> runs{
      {"gen-channel", "--seed", "11", "--out", chan},
      {"nash", "--channel", chan, "--budget", "200"},
      {"stackelberg", "--channel", chan, "--budget", "200", "--grid-step", "2"},
      {"bounds", "--channel", (dir / "small.json").string(), "--budget", "10"},
      {"example", "1"},
  };
  write_channel_file(dir / "small.json",
                     sample_admissible_channel(RayleighProfile{}, Topology::uniform(2, 2, 1.0, 0.5, 1.0), 3).channel);
  for (const auto& args : runs) {
    const std::string first = call(args);
    const std::string chan_first = slurp(chan);
    const std::string second = call(args);
    std::string label = args[0];
    o.check(first == second && slurp(chan) == chan_first && first.rfind("0\n", 0) == 0,
            fmt("%s: identical stdout (%zu bytes) and channel file on rerun", label.c_str(), first.size()));
  }
  const std::vector<std::string> files{"trials.csv", "summary.json", "cdf_user0.csv", "cdf_user1.csv"};
  call({"montecarlo", "--config", (dir / "mc.json").string(), "--out", (dir / "a").string()});
  call({"montecarlo", "--config", (dir / "mc.json").string(), "--out", (dir / "b").string()});
  call({"montecarlo", "--config", (dir / "mc.json").string(), "--out", (dir / "c").string(), "--threads", "3"});
  bool same = true;
  for (const auto& f : files) {
    const auto a = slurp(dir / "a" / f);
    same = same && !a.empty() && a == slurp(dir / "b" / f) && a == slurp(dir / "c" / f);
  }
  o.check(same, "montecarlo: trials.csv, summary.json and CDF files byte-identical across reruns and thread counts");
  fs::remove_all(dir);
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double limit_s;  // runtime limit, seconds
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "Example 1 reproduction", 1.0, criterion1},
      {2, "Example 2: equilibrium is the leader optimum", 1.0, criterion2},
      {3, "water-filling cross-validation", 30.0, criterion3},
      {4, "dual method vs exhaustive search", 300.0, criterion4},
      {5, "duality sandwich and sum-power monotonicity", 300.0, criterion5},
      {6, "two-user Monte Carlo", 600.0, criterion6},
      {7, "three-user Monte Carlo", 600.0, criterion7},
      {8, "equilibrium uniqueness from random starts", 300.0, criterion8},
      {9, "determinism of CLI outputs", 0.0, criterion9},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double elapsed = seconds_since(t0);
    if (c.limit_s > 0) o.check(elapsed < c.limit_s, fmt("runtime %.2f s (limit %.0f s)", elapsed, c.limit_s));
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << fmt("  [%.2f s]", elapsed)
              << "\n";
    for (const auto& n : o.notes) std::cout << "        " << n << "\n";
    std::cout.flush();
    if (!o.pass) ++failed;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << "\n";
  return failed == 0 ? 0 : 1;
}
