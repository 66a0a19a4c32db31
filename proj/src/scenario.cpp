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

#include "safepark/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "safepark/errors.hpp"
#include "safepark/numfmt.hpp"

namespace safepark::sim {

void Scenario::validate() const {
  vehicle.validate();
  gains.validate();
  barrier.validate();
  qp.validate();
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
  };
  require(dt > 0.0 && std::isfinite(dt), fmt::format("sim.dt must be positive, got {}", dt));
  require(control_dt >= dt && std::isfinite(control_dt),
          fmt::format("sim.control_dt must be >= dt, got {}", control_dt));
  const double ratio = control_dt / dt;
  require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio,
          fmt::format("sim.control_dt ({}) must be an integer multiple of dt ({})",
                      control_dt, dt));
  require(t_max > 0.0 && std::isfinite(t_max),
          fmt::format("sim.t_max must be positive, got {}", t_max));
  require(rho_stop >= vehicle::kRhoMin && std::isfinite(rho_stop),
          fmt::format("sim.rho_stop must be >= {}, got {}", vehicle::kRhoMin, rho_stop));
  require(std::isfinite(init.x) && std::isfinite(init.y) && std::isfinite(init.theta) &&
              std::isfinite(init.v) && std::isfinite(init.omega),
          "init state must be finite");
  for (const auto& obstacle : obstacles) {
    const double h = cbf::barrier(init, obstacle, barrier).h;
    require(h >= 0.0, fmt::format("init violates h >= 0 for obstacle at ({}, {}): h = {}",
                                  obstacle.cx(), obstacle.cy(), h));
  }
}

long Scenario::steps_per_control() const { return std::lround(control_dt / dt); }

Scenario paper_sim_scenario() {
  Scenario s;
  s.obstacles.emplace_back(-2.0, 0.0, 0.3, 40.0);
  s.init = {-3.15, 2.96, -1.43, 0.0, 0.0};
  return s;
}

Scenario paper_exp_scenario() {
  Scenario s;
  s.obstacles.emplace_back(-0.6, 0.4, 0.2, 40.0);
  s.init = {-1.08, 1.37, 0.78, 0.0, 0.0};
  return s;
}

}  // namespace safepark::sim

namespace safepark::cli {

namespace {

struct Section {
  std::string name;
  int line = 0;
  std::map<std::string, std::pair<double, int>> values;  // key -> (value, line)
};

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

class SectionReader {
 public:
  SectionReader(const Section& section, const std::string& source,
                std::set<std::string> allowed)
      : section_(section), source_(source) {
    for (const auto& [key, entry] : section.values) {
      if (!allowed.contains(key)) {
        throw ParseError(fmt::format("{}:{}: unknown key '{}' in section [{}]", source,
                                     entry.second, key, section.name));
      }
    }
  }

  double required(const std::string& key) const {
    auto it = section_.values.find(key);
    if (it == section_.values.end()) {
      throw ParseError(fmt::format("{}:{}: section [{}] is missing required key '{}'",
                                   source_, section_.line, section_.name, key));
    }
    return it->second.first;
  }

  std::optional<double> optional(const std::string& key) const {
    auto it = section_.values.find(key);
    if (it == section_.values.end()) return std::nullopt;
    return it->second.first;
  }

 private:
  const Section& section_;
  const std::string& source_;
};

}  // namespace

sim::Scenario parse_scenario(std::istream& in, const std::string& source) {
  std::vector<Section> sections;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      const bool array = line.starts_with("[[");
      const std::string close = array ? "]]" : "]";
      if (!line.ends_with(close) || line.size() <= 2 * close.size()) {
        throw ParseError(fmt::format("{}:{}: malformed section header '{}'", source,
                                     line_no, line));
      }
      const std::string name =
          trim(line.substr(close.size(), line.size() - 2 * close.size()));
      static const std::set<std::string> kTables = {"vehicle", "gains", "barrier", "qp",
                                                    "sim", "init"};
      if (array ? name != "obstacle" : !kTables.contains(name)) {
        throw ParseError(fmt::format("{}:{}: unknown section '{}'", source, line_no, line));
      }
      if (!array) {
        for (const auto& s : sections) {
          if (s.name == name) {
            throw ParseError(fmt::format("{}:{}: duplicate section [{}]", source,
                                         line_no, name));
          }
        }
      }
      sections.push_back({name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(fmt::format("{}:{}: expected 'key = value', got '{}'", source,
                                   line_no, line));
    }
    if (sections.empty()) {
      throw ParseError(fmt::format("{}:{}: key outside of any section", source, line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string text = trim(line.substr(eq + 1));
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (key.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      throw ParseError(fmt::format("{}:{}: [{}] {}: '{}' is not a number", source, line_no,
                                   sections.back().name, key, text));
    }
    auto& values = sections.back().values;
    if (values.contains(key)) {
      throw ParseError(fmt::format("{}:{}: duplicate key '{}' in [{}]", source, line_no,
                                   key, sections.back().name));
    }
    values[key] = {value, line_no};
  }

  auto find = [&](const std::string& name) -> const Section* {
    for (const auto& s : sections) {
      if (s.name == name) return &s;
    }
    return nullptr;
  };
  auto need = [&](const std::string& name) -> const Section& {
    const Section* s = find(name);
    if (!s) throw ParseError(fmt::format("{}: missing section [{}]", source, name));
    return *s;
  };

  sim::Scenario sc;
  {
    SectionReader r(need("vehicle"), source, {"mass", "inertia", "wheel_radius", "axle"});
    sc.vehicle = {r.required("mass"), r.required("inertia"), r.required("wheel_radius"),
                  r.required("axle")};
  }
  {
    SectionReader r(need("gains"), source,
                    {"lambda", "k_rho", "k_alpha", "k_z", "k_omega", "mu", "epsilon"});
    sc.gains.lambda = r.required("lambda");
    sc.gains.k_rho = r.required("k_rho");
    sc.gains.k_alpha = r.required("k_alpha");
    sc.gains.k_z = r.required("k_z");
    sc.gains.k_omega = r.required("k_omega");
    sc.gains.mu = r.required("mu");
    sc.gains.epsilon = r.optional("epsilon").value_or(0.5 * sc.gains.mu);
  }
  {
    SectionReader r(need("barrier"), source, {"l_v", "l_omega", "alpha_h_slope"});
    sc.barrier = {r.required("l_v"), r.required("l_omega"), r.required("alpha_h_slope")};
  }
  for (const auto& s : sections) {
    if (s.name != "obstacle") continue;
    SectionReader r(s, source, {"cx", "cy", "radius", "scale"});
    sc.obstacles.emplace_back(r.required("cx"), r.required("cy"), r.required("radius"),
                              r.required("scale"));
  }
  if (const Section* q = find("qp")) {
    SectionReader r(*q, source, {"m_weight", "gamma"});
    const double m = r.optional("m_weight").value_or(1.0);
    sc.qp = qp::QpParams::stability_mode(m);
    if (auto gamma = r.optional("gamma")) sc.qp.gamma = *gamma;
  }
  if (const Section* q = find("sim")) {
    SectionReader r(*q, source, {"dt", "control_dt", "t_max", "rho_stop", "seed"});
    sc.dt = r.optional("dt").value_or(sc.dt);
    sc.control_dt = r.optional("control_dt").value_or(sc.dt);
    sc.t_max = r.optional("t_max").value_or(sc.t_max);
    sc.rho_stop = r.optional("rho_stop").value_or(sc.rho_stop);
    if (auto seed = r.optional("seed")) {
      if (*seed < 0.0 || *seed != std::floor(*seed)) {
        throw ValidationError(fmt::format("sim.seed must be a nonnegative integer, got {}",
                                          *seed));
      }
      sc.seed = static_cast<std::uint64_t>(*seed);
    }
  }
  {
    SectionReader r(need("init"), source, {"x", "y", "theta", "v", "omega"});
    sc.init = {r.required("x"), r.required("y"), r.required("theta"),
               r.optional("v").value_or(0.0), r.optional("omega").value_or(0.0)};
  }
  sc.validate();
  return sc;
}

sim::Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(fmt::format("{}: cannot open scenario file", path.string()));
  }
  return parse_scenario(in, path.string());
}

void write_scenario(const sim::Scenario& s, std::ostream& out) {
  auto kv = [&out](std::string_view key, double value) {
    out << key << " = " << shortest(value) << '\n';
  };
  out << "[vehicle]\n";
  kv("mass", s.vehicle.mass);
  kv("inertia", s.vehicle.inertia);
  kv("wheel_radius", s.vehicle.wheel_radius);
  kv("axle", s.vehicle.axle);
  out << "\n[gains]\n";
  kv("lambda", s.gains.lambda);
  kv("k_rho", s.gains.k_rho);
  kv("k_alpha", s.gains.k_alpha);
  kv("k_z", s.gains.k_z);
  kv("k_omega", s.gains.k_omega);
  kv("mu", s.gains.mu);
  kv("epsilon", s.gains.epsilon);
  out << "\n[barrier]\n";
  kv("l_v", s.barrier.l_v);
  kv("l_omega", s.barrier.l_omega);
  kv("alpha_h_slope", s.barrier.alpha_h_slope);
  for (const auto& o : s.obstacles) {
    out << "\n[[obstacle]]\n";
    kv("cx", o.cx());
    kv("cy", o.cy());
    kv("radius", o.radius());
    kv("scale", o.scale());
  }
  out << "\n[qp]\n";
  kv("m_weight", s.qp.m_weight);
  kv("gamma", s.qp.gamma);
  out << "\n[sim]\n";
  kv("dt", s.dt);
  kv("control_dt", s.control_dt);
  kv("t_max", s.t_max);
  kv("rho_stop", s.rho_stop);
  out << "seed = " << s.seed << '\n';
  out << "\n[init]\n";
  kv("x", s.init.x);
  kv("y", s.init.y);
  kv("theta", s.init.theta);
  kv("v", s.init.v);
  kv("omega", s.init.omega);
}

}  // namespace safepark::cli
