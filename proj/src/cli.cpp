#include "hotelling/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>

#include "hotelling/analytic.hpp"
#include "hotelling/error.hpp"
#include "hotelling/generators.hpp"
#include "hotelling/io.hpp"
#include "hotelling/montecarlo.hpp"
#include "hotelling/paperlab.hpp"
#include "hotelling/parallel.hpp"
#include "hotelling/solver.hpp"

namespace hotelling::cli {

using nlohmann::json;

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError(m); };
  if (n < 2) fail("--n must be at least 2");
  if (!(length > 0.0)) fail("--length must be positive");
  if (budgets.empty()) fail("--budgets needs at least one value");
  for (double b : budgets)
    if (!(b >= 0.0)) fail("budgets must be non-negative");
  if (!densities.empty() && densities.size() != budgets.size())
    fail("--density must be given once per player");
  if (rule != "midpoint" && rule != "shell") fail("--rule must be midpoint or shell");
  if (ties != "drop" && ties != "split") fail("--ties must be drop or split");
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("--gamma must lie in (0, 1]");
  if (!(tol > 0.0)) fail("--tol must be positive");
  if (max_iters == 0) fail("--max-iters must be positive");
  if (!(p > 1.0)) fail("--p must exceed 1");
  if (!(cap > 0.0)) fail("--K must be positive");
  if (reps == 0) fail("--reps must be positive");
  if (space == "custom" && space_file.empty()) fail("--space custom needs --space-file");
  if (threads < 0) fail("--threads must be >= 0");
}

namespace {

json config_json(const RunConfig& c) {
  json j = {{"command", c.command}, {"space", c.space},  {"length", c.length}, {"n", c.n},
            {"budgets", c.budgets}, {"rule", c.rule},   {"seed", c.seed},     {"reps", c.reps},
            {"ties", c.ties},       {"gamma", c.gamma}, {"tol", c.tol},       {"max_iters", c.max_iters},
            {"p", c.p},             {"K", c.cap},       {"threads", num_threads()}};
  if (c.command == "lab") {
    if (!c.n_set) j.erase("n");
    if (!c.reps_set) j.erase("reps");
  }
  if (!c.space_file.empty()) j["space_file"] = c.space_file;
  j["densities"] = c.densities;
  if (!c.experiment.empty()) j["experiment"] = c.experiment;
  if (c.rho > 0.0) j["rho"] = c.rho;
  if (!c.out.empty()) j["out"] = c.out;
  if (!c.csv.empty()) j["csv"] = c.csv;
  return j;
}

MetricMeasureSpace build_space(const RunConfig& c) {
  if (c.space == "interval") return MetricMeasureSpace::interval(0.0, c.length, c.n);
  if (c.space == "circle") return MetricMeasureSpace::circle(c.length, c.n);
  if (c.space == "torus") {
    const auto [nx, ny] = torus_grid(c.n);
    return MetricMeasureSpace::torus(c.length, c.length, nx, ny);
  }
  if (c.space == "two_interval") return MetricMeasureSpace::two_interval_conflicting(c.n);
  if (c.space == "custom") return MetricMeasureSpace::load_custom_json(c.space_file);
  throw ValidationError("unknown space '" + c.space + "'");
}

Profile build_profile(const MetricMeasureSpace& s, const RunConfig& c) {
  std::vector<Density> fs;
  for (std::size_t i = 0; i < c.budgets.size(); ++i)
    fs.push_back(make_density(s, c.densities.empty() ? "uniform" : c.densities[i], c.budgets[i]));
  return Profile(s, std::move(fs));
}

Quadrature rule_of(const RunConfig& c) {
  return c.rule == "shell" ? Quadrature::ShellAverage : Quadrature::Midpoint;
}

class Output {
 public:
  Output(const RunConfig& c, std::ostream& fallback) : out_(&fallback) {
    if (!c.out.empty()) {
      file_ = std::make_unique<std::ofstream>(c.out);
      if (!*file_) throw ValidationError("cannot open " + c.out);
      out_ = file_.get();
    }
    line({{"type", "header"},
          {"version", HOTELLING_VERSION},
          {"rng", mc::kRngName},
          {"openmp", openmp_enabled()},
          {"config", config_json(c)}});
  }
  void line(const json& j) { *out_ << io::dump(j) << '\n'; }
  void result(json j) {
    j["type"] = "result";
    line(j);
  }

 private:
  std::ostream* out_;
  std::unique_ptr<std::ofstream> file_;
};

std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open " + path);
  return f;
}

int run_value(const RunConfig& c, Output& out) {
  const auto s = build_space(c);
  const auto p = build_profile(s, c);
  const auto v = value_all(p, rule_of(c));
  out.result({{"values", v.values}, {"total", v.total}, {"eta", s.total_mass()}});
  if (!c.csv.empty()) {
    auto f = open_csv(c.csv);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < v.values.size(); ++i)
      rows.push_back({static_cast<double>(i), c.budgets[i], v.values[i]});
    io::write_csv(f, {"player", "budget", "value"}, rows);
  }
  return kOk;
}

int run_mc(const RunConfig& c, Output& out) {
  const auto s = build_space(c);
  const auto p = build_profile(s, c);
  const mc::SampleConfig sc{c.seed, c.reps,
                            c.ties == "split" ? mc::TiePolicy::SplitEqually : mc::TiePolicy::DropTies};
  const auto est = mc::estimate_values(p, sc);
  out.result({{"mean", est.mean},
              {"std_error", est.std_error},
              {"replications", est.replications},
              {"uncovered_mean", est.uncovered_mean},
              {"tie_affected_mean", est.tie_affected_mean},
              {"max_conservation_error", est.max_conservation_error},
              {"coincident", est.coincident}});
  if (!c.csv.empty()) {
    auto f = open_csv(c.csv);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < est.mean.size(); ++i)
      rows.push_back({static_cast<double>(i), est.mean[i], est.std_error[i]});
    io::write_csv(f, {"player", "mean", "std_error"}, rows);
  }
  return kOk;
}

int run_residual(const RunConfig& c, Output& out) {
  const auto s = build_space(c);
  const auto p = build_profile(s, c);
  const auto f = p.total();
  const auto psi = psi_bar_all(s, f, rule_of(c));
  out.result({{"nash_residual", nash_residual(s, f, rule_of(c))}, {"budget", f.budget()}});
  if (!c.csv.empty()) {
    auto f_csv = open_csv(c.csv);
    std::vector<std::vector<double>> rows;
    for (std::size_t x = 0; x < s.size(); ++x) rows.push_back({static_cast<double>(x), f[x], psi[x]});
    io::write_csv(f_csv, {"cell", "f", "psi_bar"}, rows);
  }
  return kOk;
}

int run_solve(const RunConfig& c, Output& out) {
  const auto s = build_space(c);
  DynamicsOptions opts;
  opts.gamma = c.gamma;
  opts.tol = c.tol;
  opts.max_iters = c.max_iters;
  const auto start = random_feasible_profile(s, c.budgets, c.p, c.cap, c.seed);
  const auto r = br_dynamics(s, c.budgets, c.p, c.cap, opts, start);
  json profile = json::array();
  for (const auto& d : r.profile.densities())
    profile.push_back(std::vector<double>(d.values().begin(), d.values().end()));
  out.result({{"converged", r.converged},
              {"iterations", r.iterations},
              {"final_gamma", r.gamma},
              {"residual", r.trace.empty() ? 0.0 : r.trace.back()},
              {"values", r.values},
              {"fw_gaps", r.fw_gaps},
              {"improvements", r.improvements},
              {"proportionality", r.proportionality},
              {"nash_residual", r.nash_residual},
              {"profile", profile}});
  if (!c.csv.empty()) {
    auto f = open_csv(c.csv);
    std::vector<std::string> header{"cell"};
    for (std::size_t i = 0; i < c.budgets.size(); ++i) header.push_back("f" + std::to_string(i));
    std::vector<std::vector<double>> rows;
    for (std::size_t x = 0; x < s.size(); ++x) {
      std::vector<double> row{static_cast<double>(x)};
      for (const auto& d : r.profile.densities()) row.push_back(d[x]);
      rows.push_back(row);
    }
    io::write_csv(f, header, rows);
  }
  return r.converged ? kOk : kNotConverged;
}

int run_lab(const RunConfig& c, Output& out) {
  lab::LabOptions o;
  if (c.rho > 0.0) o.rho = c.rho;
  if (c.n_set) o.n = c.n;
  if (c.reps_set) o.reps = c.reps;
  o.seed = c.seed;
  std::vector<const lab::Experiment*> todo;
  if (c.experiment == "all") {
    for (const auto& e : lab::registry()) todo.push_back(&e);
  } else {
    todo.push_back(&lab::find_experiment(c.experiment));
  }
  std::unique_ptr<std::ofstream> csv;
  if (!c.csv.empty()) {
    csv = std::make_unique<std::ofstream>(open_csv(c.csv));
    *csv << "experiment,quantity,computed,reference,tolerance,comparison,reference_source,pass\n";
  }
  bool all = true;
  for (const auto* e : todo)
    for (const auto& rec : e->run(o)) {
      all = all && rec.pass;
      out.result(rec.to_json());
      if (csv)
        for (const auto& k : rec.checks)
          *csv << rec.name << ',' << k.quantity << ',' << io::format_double(k.computed) << ','
               << io::format_double(k.reference) << ',' << io::format_double(k.tolerance) << ','
               << lab::to_string(k.comparison) << ',' << lab::to_string(k.source) << ','
               << (k.pass ? 1 : 0) << '\n';
    }
  return all ? kOk : kExperimentFailed;
}

int run_space_validate(const RunConfig& c, Output& out) {
  const auto s = MetricMeasureSpace::load_custom_json(c.space_file);
  s.validate_metric();
  out.result({{"valid", true}, {"cells", s.size()}, {"eta", s.total_mass()}});
  return kOk;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Cox process Hotelling games on discretized metric measure spaces", "hotelling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", HOTELLING_VERSION);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--threads", c.threads, "worker threads, 0 = all cores");
    sub->add_option("--out", c.out, "write JSON Lines here instead of stdout");
    sub->add_option("--csv", c.csv, "also write a CSV table");
  };
  auto add_space = [&](CLI::App* sub) {
    sub->add_option("--space", c.space, "interval | circle | torus | two_interval | custom")
        ->check(CLI::IsMember({"interval", "circle", "torus", "two_interval", "custom"}));
    sub->add_option("--space-file", c.space_file, "custom space JSON");
    sub->add_option("--length", c.length, "interval length, circumference or torus side");
    sub->add_option("--n", c.n, "cells (per interval for two_interval)");
    sub->add_option("--budgets", c.budgets, "player budgets")->delimiter(',');
  };
  auto add_profile = [&](CLI::App* sub) {
    add_space(sub);
    sub->add_option("--density", c.densities, "uniform | arc:c,len | bump:c,w | file.json, per player");
  };

  auto* value = app.add_subcommand("value", "quadrature values of a profile");
  add_profile(value);
  value->add_option("--rule", c.rule, "midpoint | shell");
  add_common(value);

  auto* mcs = app.add_subcommand("mc", "Monte Carlo value estimates");
  add_profile(mcs);
  mcs->add_option("--reps", c.reps, "replications");
  mcs->add_option("--seed", c.seed);
  mcs->add_option("--ties", c.ties, "drop | split");
  add_common(mcs);

  auto* residual = app.add_subcommand("residual", "Nash residual of the aggregate");
  add_profile(residual);
  residual->add_option("--rule", c.rule, "midpoint | shell");
  add_common(residual);

  auto* solve = app.add_subcommand("solve", "best-response dynamics in the capped game");
  add_space(solve);
  solve->add_option("--p", c.p, "Theta exponent");
  solve->add_option("--K", c.cap, "cap on the Theta integral");
  solve->add_option("--gamma", c.gamma, "damping");
  solve->add_option("--tol", c.tol, "sup-norm tolerance");
  solve->add_option("--max-iters", c.max_iters);
  solve->add_option("--seed", c.seed, "random start");
  add_common(solve);

  auto* labc = app.add_subcommand("lab", "run a named experiment or all of them");
  labc->add_option("experiment", c.experiment, "experiment name or 'all'")->required();
  labc->add_option("--rho", c.rho, "override the experiment's budget");
  auto* lab_n = labc->add_option("--n", c.n, "override the grid size");
  auto* lab_reps = labc->add_option("--reps", c.reps, "override the replications");
  labc->add_option("--seed", c.seed);
  add_common(labc);

  auto* space = app.add_subcommand("space", "space utilities");
  space->require_subcommand(1);
  auto* validate = space->add_subcommand("validate", "check a custom space file");
  validate->add_option("file", c.space_file, "space JSON")->required();
  add_common(validate);

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << HOTELLING_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  for (auto* sub : {value, mcs, residual, solve, labc})
    if (sub->parsed()) c.command = sub->get_name();
  if (validate->parsed()) c.command = "space validate";
  c.n_set = lab_n->count() > 0;
  c.reps_set = lab_reps->count() > 0;

  try {
    c.validate();
    if (c.threads > 0) set_num_threads(c.threads);
    Output o(c, out);
    if (c.command == "value") return run_value(c, o);
    if (c.command == "mc") return run_mc(c, o);
    if (c.command == "residual") return run_residual(c, o);
    if (c.command == "solve") return run_solve(c, o);
    if (c.command == "lab") return run_lab(c, o);
    return run_space_validate(c, o);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace hotelling::cli
