#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcgame/channel.hpp"
#include "pcgame/game.hpp"
#include "pcgame/stackelberg.hpp"

namespace pcgame {

// The two-user, two-bin games with unit direct gains, cross gains 0.5 and
// budgets 10. Game 1: receiver noise {4,1} and {1,4}, where leading pays off.
// Game 2: noise {6,1} and {1,6}, where the Nash equilibrium is already the
// leader's optimum.
ChannelRealization worked_example_channel(int which);
LeaderProblem worked_example_problem(int which);

struct ReportRow {
  std::string quantity;
  double value = 0.0;
  std::optional<double> reference;
  double tolerance = 0.0;
  bool pass = true;
  std::string note;
};

struct ExampleReport {
  int which = 1;
  EquilibriumResult nash;
  StackelbergResult exhaustive;
  StackelbergResult dual;
  double interference_free = 0.0;
  DualBound bound;
  std::vector<ReportRow> rows;

  bool all_pass() const;
};

/// Runs iterative water-filling, the exhaustive leader search (step 0.01),
/// the dual method, the interference-free bound and the dual bound (step
/// 0.05), and checks the rates against known reference values.
ExampleReport reproduce_example(int which);

void print_report(std::ostream& out, const ExampleReport& report);

}  // namespace pcgame
