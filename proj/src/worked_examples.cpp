#include "pcgame/worked_examples.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pcgame {

namespace {

constexpr double kTolerance = 5e-3;

struct Reference {
  double ne_leader, ne_follower;
  double se_leader, se_follower;
  double interference_free;  // water-fill of the leader's own noise
};

Reference reference(int which) {
  if (which == 1) return {2.645, 2.645, 2.939, 3.474, 3.814};
  return {3.460, 3.460, 3.460, 3.460, 3.590};
}

}  // namespace

ChannelRealization worked_example_channel(int which) {
  if (which != 1 && which != 2) throw std::invalid_argument("worked example must be 1 or 2");
  const double far = which == 1 ? 4.0 : 6.0;
  // gain[j][k][f]: unit direct links, 0.5 cross links.
  std::vector<double> gain{1.0, 1.0, 0.5, 0.5,   // 1 -> 1, 1 -> 2
                           0.5, 0.5, 1.0, 1.0};  // 2 -> 1, 2 -> 2
  std::vector<double> noise{far, 1.0, 1.0, far};
  return ChannelRealization(2, 2, std::move(gain), std::move(noise));
}

LeaderProblem worked_example_problem(int which) {
  return LeaderProblem(normalize(worked_example_channel(which)), {10.0, 10.0}, 0);
}

bool ExampleReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

ExampleReport reproduce_example(int which) {
  ExampleReport rep;
  rep.which = which;
  LeaderProblem prob = worked_example_problem(which);
  const Reference ref = reference(which);

  rep.nash = iterative_waterfilling(prob.channel, prob.game_config());
  prob.grid_step = 0.01;
  rep.exhaustive = exhaustive_stackelberg(prob);
  prob.grid_step = 0.1;
  rep.dual = algorithm1_dual(prob);
  rep.interference_free = interference_free_bound(prob);
  rep.bound = dual_bound(prob, 0.05);

  auto against = [&](std::string name, double value, double expected, std::string note = {}) {
    rep.rows.push_back({std::move(name), value, expected, kTolerance,
                        std::abs(value - expected) <= kTolerance, std::move(note)});
  };
  auto check = [&](std::string name, double value, bool ok, std::string note) {
    rep.rows.push_back({std::move(name), value, std::nullopt, 0.0, ok, std::move(note)});
  };

  against("NE rate, user 1", rep.nash.rates_bits[0], ref.ne_leader);
  against("NE rate, user 2", rep.nash.rates_bits[1], ref.ne_follower);
  against("SE rate, user 1 (exhaustive)", rep.exhaustive.rates_bits[0], ref.se_leader);
  against("SE rate, user 2 (exhaustive)", rep.exhaustive.rates_bits[1], ref.se_follower);
  against("Dual method rate, user 1", rep.dual.rates_bits[0], ref.se_leader);
  against("Dual method rate, user 2", rep.dual.rates_bits[1], ref.se_follower);
  against("Interference-free bound", rep.interference_free, ref.interference_free, "hand water-fill");

  const double achieved = std::max({rep.nash.rates_bits[0], rep.exhaustive.rates_bits[0], rep.dual.rates_bits[0]});
  check("Interference-free bound above achieved", rep.interference_free, rep.interference_free > achieved,
        "bound > every leader rate");
  check("Dual bound D'(mu*)", rep.bound.value_bits,
        rep.bound.value_bits >= rep.exhaustive.rates_bits[0] - 1e-6 &&
            rep.bound.value_bits <= rep.interference_free + 1e-9,
        "SE <= D'(mu*) <= bound");
  if (which == 2)
    check("SE - NE, user 1", rep.exhaustive.rates_bits[0] - rep.nash.rates_bits[0],
          std::abs(rep.exhaustive.rates_bits[0] - rep.nash.rates_bits[0]) <= 1e-6, "NE is the leader optimum");
  else
    check("SE - NE, user 1", rep.exhaustive.rates_bits[0] - rep.nash.rates_bits[0],
          rep.exhaustive.rates_bits[0] - rep.nash.rates_bits[0] >= 0.29, "leading gains >= 0.29 bit");
  return rep;
}

void print_report(std::ostream& out, const ExampleReport& rep) {
  auto alloc = [](const PowerAllocation& a) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << '{';
    for (std::size_t f = 0; f < a.power.size(); ++f) s << (f ? ", " : "") << a.power[f];
    s << '}';
    return s.str();
  };
  out << "Worked example " << rep.which << "\n";
  out << "  NE allocations: P1 = " << alloc(rep.nash.allocations[0]) << ", P2 = " << alloc(rep.nash.allocations[1])
      << " (" << rep.nash.iterations << " rounds)\n";
  out << "  SE allocations (exhaustive): P1 = " << alloc(rep.exhaustive.allocations[0])
      << ", P2 = " << alloc(rep.exhaustive.allocations[1]) << "\n";
  out << "  Dual method: P1 = " << alloc(rep.dual.allocations[0]) << ", P2 = " << alloc(rep.dual.allocations[1])
      << " (T1 = " << rep.dual.dual_iterations << ", T2 = " << rep.dual.sweeps << ")\n";
  out << "  Dual bound: mu* = " << std::setprecision(6) << rep.bound.mu_star << "\n\n";
  out << std::left << std::setw(40) << "quantity" << std::setw(12) << "value" << std::setw(12) << "reference"
      << std::setw(6) << "pass" << "note\n";
  for (const auto& r : rep.rows) {
    std::ostringstream ref;
    if (r.reference) ref << std::fixed << std::setprecision(3) << *r.reference;
    else ref << "-";
    out << std::left << std::setw(40) << r.quantity << std::setw(12) << std::fixed << std::setprecision(4)
        << r.value << std::setw(12) << ref.str() << std::setw(6) << (r.pass ? "PASS" : "FAIL") << r.note << "\n";
  }
  out << std::defaultfloat;
}

}  // namespace pcgame
