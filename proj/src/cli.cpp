// Copyright 2026 The safepark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "safepark/cli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "safepark/errors.hpp"
#include "safepark/export.hpp"
#include "safepark/scenario.hpp"
#include "safepark/sim.hpp"
#include "safepark/verify.hpp"

#ifndef SAFEPARK_SCENARIO_DIR
#define SAFEPARK_SCENARIO_DIR "scenarios"
#endif

namespace safepark::cli {

namespace {

struct Overrides {
  std::optional<double> dt;
  std::optional<double> t_max;
};

sim::Scenario load_with_overrides(const std::string& name, const Overrides& o) {
  sim::Scenario s = load_scenario(resolve_scenario(name));
  if (o.dt) {
    // Keep the control period commensurate with the new step.
    const double ratio = s.control_dt / s.dt;
    s.dt = *o.dt;
    s.control_dt = std::round(ratio) * s.dt;
  }
  if (o.t_max) s.t_max = *o.t_max;
  s.validate();
  return s;
}

std::string_view termination_name(sim::Termination t) {
  switch (t) {
    case sim::Termination::Horizon: return "horizon";
    case sim::Termination::Converged: return "converged";
    case sim::Termination::Frozen: return "frozen";
  }
  return "?";
}

std::string summarize(const sim::TrajectoryLog& log, const sim::Scenario& s) {
  double min_h = std::numeric_limits<double>::infinity();
  double min_clearance = std::numeric_limits<double>::infinity();
  for (const auto& r : log.rows) {
    min_h = std::min(min_h, r.h);
    for (const auto& o : s.obstacles) {
      min_clearance =
          std::min(min_clearance, std::hypot(r.x - o.cx(), r.y - o.cy()) - o.radius());
    }
  }
  const auto& last = log.rows.back();
  std::string out = fmt::format(
      "controller={} rows={} termination={} t_end={:.4f} final_dist={:.6g}",
      log.label, log.rows.size(), termination_name(log.termination), last.t,
      std::hypot(last.x, last.y));
  if (!s.obstacles.empty()) {
    out += fmt::format(" min_h={:.6g} min_clearance={:.6g}", min_h, min_clearance);
  }
  return out;
}

int run_simulate(const std::string& scenario, const std::string& controller,
                 const std::string& out_csv, const std::string& out_svg,
                 const Overrides& o, std::ostream& out) {
  const sim::Scenario s = load_with_overrides(scenario, o);
  const sim::TrajectoryLog log = sim::run(s, sim::parse_controller(controller));
  sim::export_csv(log, out_csv);
  if (!out_svg.empty()) sim::export_svg(std::span(&log, 1), s, out_svg);
  out << "simulate status=ok " << summarize(log, s) << " csv=" << out_csv << '\n';
  return 0;
}

int run_compare(const std::string& scenario, const std::string& prefix,
                const std::string& out_svg, const Overrides& o, std::ostream& out) {
  const sim::Scenario s = load_with_overrides(scenario, o);
  std::vector<sim::TrajectoryLog> logs;
  for (auto c : {sim::Controller::Nominal, sim::Controller::ClfQp,
                 sim::Controller::ClfCbfQp}) {
    logs.push_back(sim::run(s, c));
    const std::string path = fmt::format("{}_{}.csv", prefix, sim::controller_name(c));
    sim::export_csv(logs.back(), path);
    out << "compare status=ok " << summarize(logs.back(), s) << " csv=" << path << '\n';
  }
  const std::string svg = out_svg.empty() ? prefix + ".svg" : out_svg;
  sim::export_svg(logs, s, svg);
  out << "compare status=ok svg=" << svg << '\n';
  return 0;
}

int print_report(const sim::Report& report, std::ostream& out, std::ostream& err) {
  for (const auto& c : report.checks) {
    out << fmt::format("verify suite={} check={} status={} worst={:.6g} threshold={:.6g}",
                       report.suite, c.name, c.passed ? "pass" : "fail", c.worst,
                       c.threshold);
    if (!c.detail.empty()) out << " detail=\"" << c.detail << '"';
    out << '\n';
    if (!c.passed) {
      err << fmt::format("error: verify {} check {} failed: worst {:.6g} vs threshold {:.6g}\n",
                         report.suite, c.name, c.worst, c.threshold);
    }
  }
  out << fmt::format("verify suite={} status={}\n", report.suite,
                     report.passed() ? "pass" : "fail");
  return report.passed() ? 0 : 1;
}

int run_verify(const std::string& suite, long samples, std::uint64_t seed,
               const std::string& scenario, std::ostream& out, std::ostream& err) {
  clf::Gains gains;
  if (!scenario.empty()) gains = load_scenario(resolve_scenario(scenario)).gains;
  int status = 0;
  if (suite == "clf" || suite == "all") {
    status |= print_report(sim::verify_clf(gains, samples, seed), out, err);
  }
  if (suite == "qp" || suite == "all") {
    status |= print_report(sim::verify_qp(samples, seed), out, err);
  }
  return status;
}

}  // namespace

std::filesystem::path resolve_scenario(const std::string& name_or_path) {
  const std::filesystem::path given(name_or_path);
  if (std::filesystem::exists(given)) return given;
  if (!given.has_parent_path()) {
    std::filesystem::path shipped = std::filesystem::path(SAFEPARK_SCENARIO_DIR) / given;
    if (!shipped.has_extension()) shipped += ".toml";
    if (std::filesystem::exists(shipped)) return shipped;
  }
  return given;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Safety-critical parking controller for force-controlled unicycles"};
  app.require_subcommand(1);

  std::string scenario;
  std::string scenario_opt;
  std::string controller = "clf-cbf-qp";
  std::string out_path;
  std::string svg_path;
  std::string suite = "all";
  long samples = 100000;
  std::uint64_t seed = 42;
  Overrides overrides;

  auto add_scenario = [&](CLI::App* sub) {
    sub->add_option("scenario_path", scenario, "Scenario file or shipped scenario name");
    sub->add_option("--scenario", scenario_opt, "Scenario file or shipped scenario name");
    sub->add_option("--dt", overrides.dt, "Override the integration step [s]")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tmax", overrides.t_max, "Override the horizon [s]")
        ->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "Run one controller on a scenario");
  add_scenario(simulate);
  simulate->add_option("--controller", controller, "nominal | clf-qp | clf-cbf-qp");
  simulate->add_option("--out", out_path, "Output CSV path")->required();
  simulate->add_option("--svg", svg_path, "Optional SVG plot path");

  auto* compare = app.add_subcommand("compare", "Run all three controllers on a scenario");
  add_scenario(compare);
  compare->add_option("--out", out_path, "Output prefix for the CSV files");
  compare->add_option("--svg", svg_path, "SVG path (default PREFIX.svg)");

  auto* verify = app.add_subcommand("verify", "Run the randomized property suites");
  verify->add_option("--suite", suite, "clf | qp | all")
      ->check(CLI::IsMember({"clf", "qp", "all"}));
  verify->add_option("--samples", samples, "Samples per check")->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "Suite seed");
  verify->add_option("--scenario", scenario_opt, "Take the gains from this scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  const std::string chosen = scenario_opt.empty() ? scenario : scenario_opt;
  try {
    if (simulate->parsed()) {
      if (chosen.empty()) throw ParseError("simulate: a scenario is required");
      return run_simulate(chosen, controller, out_path, svg_path, overrides, out);
    }
    if (compare->parsed()) {
      if (chosen.empty()) throw ParseError("compare: a scenario is required");
      const std::string prefix =
          out_path.empty() ? resolve_scenario(chosen).stem().string() : out_path;
      return run_compare(chosen, prefix, svg_path, overrides, out);
    }
    return run_verify(suite, samples, seed, chosen, out, err);
  } catch (const ParseError& e) {
    err << "error: ParseError: " << e.what() << '\n';
  } catch (const ValidationError& e) {
    err << "error: ValidationError: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace safepark::cli
