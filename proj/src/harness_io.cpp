#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "pcgame/error.hpp"
#include "pcgame/harness.hpp"

namespace pcgame {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
  for (const auto& [key, _] : obj.items())
    if (!known.contains(key)) throw FormatError("unknown field '" + where + key + "'");
}

double get_number(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw FormatError("field '" + where + key + "': expected a number");
  return v.get<double>();
}

template <class Int>
Int get_count(const json& obj, const std::string& where, const char* key, Int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) throw FormatError("field '" + where + key + "': expected a non-negative integer");
  return v.get<Int>();
}

std::string fmt17(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

ExperimentSpec spec_from_json(const json& doc) {
  if (!doc.is_object()) throw FormatError("experiment config must be a JSON object");
  reject_unknown(doc, "",
                 {"trials", "num_users", "num_bins", "budget", "noise", "direct_power", "cross_power",
                  "leader", "profile", "solver", "master_seed", "max_rejections", "cdf_grid", "threads"});
  ExperimentSpec spec;
  spec.trials = get_count(doc, "", "trials", spec.trials);
  spec.num_users = get_count(doc, "", "num_users", spec.num_users);
  spec.num_bins = get_count(doc, "", "num_bins", spec.num_bins);
  spec.noise = get_number(doc, "", "noise", spec.noise);
  spec.direct_power = get_number(doc, "", "direct_power", spec.direct_power);
  spec.cross_power = get_number(doc, "", "cross_power", spec.cross_power);
  spec.leader = get_count(doc, "", "leader", spec.leader);
  spec.master_seed = get_count(doc, "", "master_seed", spec.master_seed);
  spec.max_rejections = get_count(doc, "", "max_rejections", spec.max_rejections);
  spec.threads = get_count(doc, "", "threads", spec.threads);

  spec.budgets.assign(spec.num_users, 200.0);
  if (doc.contains("budget")) {
    const auto& b = doc.at("budget");
    if (b.is_number()) {
      spec.budgets.assign(spec.num_users, b.get<double>());
    } else if (b.is_array() && b.size() == spec.num_users) {
      for (std::size_t k = 0; k < spec.num_users; ++k) {
        if (!b[k].is_number()) throw FormatError("field 'budget[" + std::to_string(k) + "]': expected a number");
        spec.budgets[k] = b[k].get<double>();
      }
    } else {
      throw FormatError("field 'budget': expected a number or an array of num_users numbers");
    }
  }

  if (doc.contains("profile")) {
    const auto& p = doc.at("profile");
    if (!p.is_object()) throw FormatError("field 'profile': expected an object");
    reject_unknown(p, "profile.", {"num_rays", "ray_spacing", "bandwidth", "decay_constant"});
    spec.profile.num_rays = get_count(p, "profile.", "num_rays", spec.profile.num_rays);
    spec.profile.ray_spacing = get_number(p, "profile.", "ray_spacing", spec.profile.ray_spacing);
    spec.profile.bandwidth = get_number(p, "profile.", "bandwidth", spec.profile.bandwidth);
    spec.profile.decay_constant = get_number(p, "profile.", "decay_constant", spec.profile.decay_constant);
  }
  if (doc.contains("solver")) {
    const auto& s = doc.at("solver");
    if (!s.is_object()) throw FormatError("field 'solver': expected an object");
    reject_unknown(s, "solver.",
                   {"grid_step", "mu_tolerance", "coord_tolerance", "coord_gain_tolerance", "coord_max_sweeps", "dual_max_iters",
                    "iw_tolerance", "iw_max_iters"});
    auto& o = spec.solver;
    o.grid_step = get_number(s, "solver.", "grid_step", o.grid_step);
    o.mu_tolerance = get_number(s, "solver.", "mu_tolerance", o.mu_tolerance);
    o.coord_tolerance = get_number(s, "solver.", "coord_tolerance", o.coord_tolerance);
    o.coord_gain_tolerance = get_number(s, "solver.", "coord_gain_tolerance", o.coord_gain_tolerance);
    o.coord_max_sweeps = get_count(s, "solver.", "coord_max_sweeps", o.coord_max_sweeps);
    o.dual_max_iters = get_count(s, "solver.", "dual_max_iters", o.dual_max_iters);
    o.iw_tolerance = get_number(s, "solver.", "iw_tolerance", o.iw_tolerance);
    o.iw_max_iters = get_count(s, "solver.", "iw_max_iters", o.iw_max_iters);
  }
  if (doc.contains("cdf_grid")) {
    const auto& g = doc.at("cdf_grid");
    if (!g.is_array() || g.empty()) throw FormatError("field 'cdf_grid': expected a non-empty array");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g[i].is_number()) throw FormatError("field 'cdf_grid[" + std::to_string(i) + "]': expected a number");
      spec.cdf_grid.push_back(g[i].get<double>());
    }
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return spec;
}

json spec_to_json(const ExperimentSpec& spec) {
  return json{
      {"trials", spec.trials},
      {"num_users", spec.num_users},
      {"num_bins", spec.num_bins},
      {"budget", spec.budgets},
      {"noise", spec.noise},
      {"direct_power", spec.direct_power},
      {"cross_power", spec.cross_power},
      {"leader", spec.leader},
      {"profile",
       {{"num_rays", spec.profile.num_rays},
        {"ray_spacing", spec.profile.ray_spacing},
        {"bandwidth", spec.profile.bandwidth},
        {"decay_constant", spec.profile.decay_constant}}},
      {"solver",
       {{"grid_step", spec.solver.grid_step},
        {"mu_tolerance", spec.solver.mu_tolerance},
        {"coord_tolerance", spec.solver.coord_tolerance},
        {"coord_gain_tolerance", spec.solver.coord_gain_tolerance},
        {"coord_max_sweeps", spec.solver.coord_max_sweeps},
        {"dual_max_iters", spec.solver.dual_max_iters},
        {"iw_tolerance", spec.solver.iw_tolerance},
        {"iw_max_iters", spec.solver.iw_max_iters}}},
      {"master_seed", spec.master_seed},
      {"max_rejections", spec.max_rejections},
      {"cdf_grid", spec.thresholds()},
      {"threads", spec.threads},
  };
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records) {
  out << "trial,seed,rejections,user,rate_ne_bits,rate_sg_bits,ratio,converged\n";
  for (const auto& rec : records) {
    for (std::size_t k = 0; k < rec.rate_ne.size(); ++k) {
      out << rec.trial << ',' << rec.seed << ',' << rec.rejections << ',' << k << ','
          << fmt17(rec.rate_ne[k]) << ',' << fmt17(rec.rate_sg[k]) << ',' << fmt17(rec.ratio[k]) << ','
          << (rec.converged() ? 1 : 0) << '\n';
    }
  }
}

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "trial,seed,rejections,user,rate_ne_bits,rate_sg_bits,ratio,converged")
    throw FormatError("trials CSV: unexpected header");
  std::vector<TrialRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 8) throw FormatError("trials CSV line " + std::to_string(line_no) + ": expected 8 columns");
    try {
      const std::size_t trial = std::stoull(cells[0]);
      const std::size_t user = std::stoull(cells[3]);
      if (records.empty() || records.back().trial != trial) {
        TrialRecord rec;
        rec.trial = trial;
        rec.seed = std::stoull(cells[1]);
        rec.rejections = std::stoull(cells[2]);
        const bool ok = cells[7] == "1";
        rec.ne_converged = ok;
        rec.sg_converged = ok;
        if (!ok) rec.error = "not converged";
        records.push_back(std::move(rec));
      }
      auto& rec = records.back();
      if (user != rec.rate_ne.size())
        throw FormatError("trials CSV line " + std::to_string(line_no) + ": users out of order");
      rec.rate_ne.push_back(std::stod(cells[4]));
      rec.rate_sg.push_back(std::stod(cells[5]));
      rec.ratio.push_back(std::stod(cells[6]));
    } catch (const std::logic_error&) {
      throw FormatError("trials CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return records;
}

void write_cdf_csv(std::ostream& out, std::span<const CdfPoint> cdf) {
  out << "threshold,fraction\n";
  for (const auto& p : cdf) out << fmt17(p.threshold) << ',' << fmt17(p.fraction) << '\n';
}

json summary_to_json(const ExperimentSummary& summary) {
  json users = json::array();
  for (const auto& u : summary.users)
    users.push_back({{"mean_ratio", u.mean_ratio},
                     {"median_ratio", u.median_ratio},
                     {"frac_improved", u.frac_improved},
                     {"n_converged", u.n_converged}});
  return json{{"trials", summary.trials},
              {"n_converged", summary.n_converged},
              {"n_failed", summary.n_failed},
              {"mean_rejections", summary.mean_rejections},
              {"mean_dual_iterations", summary.mean_dual_iterations},
              {"mean_sweeps", summary.mean_sweeps},
              {"users", users}};
}

void write_experiment(const std::filesystem::path& dir, const ExperimentSpec& spec,
                      const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "trials.csv");
    write_trials_csv(out, result.records);
  }
  {
    std::ofstream out(dir / "summary.json");
    out << summary_to_json(result.summary).dump(2) << '\n';
  }
  const auto grid = spec.thresholds();
  for (std::size_t k = 0; k < spec.num_users; ++k) {
    const auto ratios = converged_ratios(result.records, k);
    std::ofstream out(dir / ("cdf_user" + std::to_string(k) + ".csv"));
    if (ratios.empty()) {
      out << "threshold,fraction\n";
      continue;
    }
    write_cdf_csv(out, empirical_cdf(ratios, grid));
  }
}

}  // namespace pcgame
