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

#include "safepark/export.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "safepark/errors.hpp"
#include "safepark/numfmt.hpp"

namespace safepark::sim {

namespace {

constexpr std::size_t kColumns = 22;

void open_for_write(std::ofstream& file, const std::filesystem::path& path) {
  file.open(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw std::runtime_error(fmt::format("{}: cannot open for writing", path.string()));
  }
}

void finish_write(std::ofstream& file, const std::filesystem::path& path) {
  file.flush();
  if (!file) throw std::runtime_error(fmt::format("{}: write failed", path.string()));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// ---- SVG helpers -----------------------------------------------------------

constexpr std::array<std::string_view, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c",
                                                     "#9467bd", "#ff7f0e", "#8c564b"};
constexpr std::array<std::string_view, 3> kDashes = {"none", "8,4", "2,3"};

std::string fmt_num(double v) { return fmt::format("{:.6g}", v); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Box {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
};

// Indices of at most `limit` evenly spaced rows, always keeping the last one.
std::vector<std::size_t> decimate(std::size_t n, std::size_t limit) {
  std::vector<std::size_t> idx;
  if (n == 0) return idx;
  const std::size_t stride = std::max<std::size_t>(1, (n + limit - 1) / limit);
  for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

}  // namespace

void write_csv(const TrajectoryLog& log, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const LogRow& r : log.rows) {
    const std::array<double, 19> head = {r.t,     r.x,   r.y,     r.theta,   r.v,
                                         r.omega, r.rho, r.alpha, r.psi,     r.z,
                                         r.omega_err, r.V, r.W,   r.h,       r.h0,
                                         r.u_v,   r.u_omega, r.tau_l, r.tau_r};
    for (double v : head) out << shortest(v) << ',';
    out << (r.region ? qp::region_name(*r.region) : kNoRegion) << ','
        << shortest(r.f1_residual) << ',' << shortest(r.f2_residual) << '\n';
  }
}

void export_csv(const TrajectoryLog& log, const std::filesystem::path& path) {
  std::ofstream file;
  open_for_write(file, path);
  write_csv(log, file);
  finish_write(file, path);
}

TrajectoryLog read_csv(std::istream& in, const std::string& source) {
  TrajectoryLog log;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ParseError(fmt::format("{}:1: unexpected CSV header", source));
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != kColumns) {
      throw ParseError(fmt::format("{}:{}: expected {} columns, got {}", source, line_no,
                                   kColumns, cells.size()));
    }
    auto num = [&](std::size_t i) {
      const auto v = parse_double(cells[i]);
      if (!v) {
        throw ParseError(fmt::format("{}:{}: column {} is not a number: '{}'", source,
                                     line_no, i + 1, cells[i]));
      }
      return *v;
    };
    LogRow r;
    double* fields[] = {&r.t,     &r.x,   &r.y,     &r.theta, &r.v,        &r.omega,
                        &r.rho,   &r.alpha, &r.psi, &r.z,     &r.omega_err, &r.V,
                        &r.W,     &r.h,   &r.h0,    &r.u_v,   &r.u_omega,  &r.tau_l,
                        &r.tau_r};
    for (std::size_t i = 0; i < 19; ++i) *fields[i] = num(i);
    if (cells[19] != kNoRegion) {
      try {
        r.region = qp::parse_region(cells[19]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(fmt::format("{}:{}: {}", source, line_no, e.what()));
      }
    }
    r.f1_residual = num(20);
    r.f2_residual = num(21);
    log.rows.push_back(r);
  }
  return log;
}

TrajectoryLog import_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("{}: cannot open", path.string()));
  return read_csv(in, path.string());
}

void write_svg(std::span<const TrajectoryLog> logs, const Scenario& scenario,
               std::ostream& out) {
  if (logs.empty()) throw std::invalid_argument("write_svg needs at least one log");

  constexpr double kWidth = 1100.0;
  constexpr double kHeight = 520.0;
  constexpr double kMargin = 50.0;
  constexpr double kPanel = kHeight - 2.0 * kMargin;  // square XY panel side
  constexpr std::size_t kMaxPoints = 2000;

  Box box;
  box.add(0.0, 0.0);
  box.add(scenario.init.x, scenario.init.y);
  for (const auto& o : scenario.obstacles) {
    box.add(o.cx() - o.radius(), o.cy() - o.radius());
    box.add(o.cx() + o.radius(), o.cy() + o.radius());
  }
  for (const auto& log : logs) {
    for (const auto& r : log.rows) box.add(r.x, r.y);
  }
  const double span = std::max({box.x1 - box.x0, box.y1 - box.y0, 1e-3}) * 1.1;
  const double cx = 0.5 * (box.x0 + box.x1);
  const double cy = 0.5 * (box.y0 + box.y1);
  const double scale = kPanel / span;
  // World -> screen: sx = tx + scale * x, sy = ty - scale * y.
  const double tx = kMargin + 0.5 * kPanel - scale * cx;
  const double ty = kMargin + 0.5 * kPanel + scale * cy;

  out << R"(<?xml version="1.0" encoding="UTF-8"?>)" << '\n';
  out << fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)",
      kWidth, kHeight, kWidth, kHeight)
      << '\n';
  out << R"(<rect x="0" y="0" width="100%" height="100%" fill="white"/>)" << '\n';

  // Panel 1: XY plane.
  out << fmt::format(
      R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#888"/>)",
      kMargin, kMargin, kPanel, kPanel)
      << '\n';
  out << fmt::format(R"(<text x="{}" y="{}" font-size="14">XY path</text>)", kMargin,
                     kMargin - 10)
      << '\n';
  out << fmt::format(R"svg(<g id="xy" transform="matrix({} 0 0 {} {} {})">)svg", fmt_num(scale),
                     fmt_num(-scale), fmt_num(tx), fmt_num(ty))
      << '\n';
  for (const auto& o : scenario.obstacles) {
    out << fmt::format(
        R"(<circle class="obstacle" cx="{}" cy="{}" r="{}" fill="#bbb" fill-opacity="0.6" stroke="black" vector-effect="non-scaling-stroke"/>)",
        shortest(o.cx()), shortest(o.cy()), shortest(o.radius()))
        << '\n';
  }
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& rows = logs[i].rows;
    std::string points;
    for (std::size_t j : decimate(rows.size(), kMaxPoints)) {
      points += fmt::format("{},{} ", fmt_num(rows[j].x), fmt_num(rows[j].y));
    }
    out << fmt::format(
        R"(<polyline class="path" data-label="{}" points="{}" fill="none" stroke="{}" stroke-width="2" stroke-dasharray="{}" vector-effect="non-scaling-stroke"/>)",
        xml_escape(logs[i].label), points, kColors[i % kColors.size()],
        kDashes[i % kDashes.size()])
        << '\n';
  }
  const double marker = 6.0 / scale;
  out << fmt::format(
      R"(<circle class="start" cx="{}" cy="{}" r="{}" fill="black"/>)",
      shortest(scenario.init.x), shortest(scenario.init.y), fmt_num(marker))
      << '\n';
  out << fmt::format(
      R"(<path class="origin" d="M {} 0 L {} 0 M 0 {} L 0 {}" stroke="black" stroke-width="2" vector-effect="non-scaling-stroke"/>)",
      fmt_num(-marker), fmt_num(marker), fmt_num(-marker), fmt_num(marker))
      << '\n';
  out << "</g>\n";

  // Legend.
  double ly = kMargin + 20.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const double lx = kMargin + 10.0;
    out << fmt::format(
        R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2" stroke-dasharray="{}"/>)",
        lx, ly, lx + 30, ly, kColors[i % kColors.size()], kDashes[i % kDashes.size()])
        << '\n';
    out << fmt::format(R"(<text class="legend" x="{}" y="{}" font-size="12">{}</text>)",
                       lx + 36, ly + 4, xml_escape(logs[i].label))
        << '\n';
    ly += 18.0;
  }
  out << fmt::format(R"(<text x="{}" y="{}" font-size="12">start: filled dot, target: cross, obstacles: grey</text>)",
                     kMargin + 10.0, ly + 4)
      << '\n';

  // Panel 2: rho, alpha, psi against time.
  const double px0 = 2.0 * kMargin + kPanel + 20.0;
  const double pw = kWidth - px0 - kMargin;
  const double gap = 30.0;
  const double ph = (kHeight - 2.0 * kMargin - 2.0 * gap) / 3.0;
  double t_end = 0.0;
  for (const auto& log : logs) {
    if (!log.rows.empty()) t_end = std::max(t_end, log.rows.back().t);
  }
  if (t_end <= 0.0) t_end = 1.0;

  struct Series {
    std::string_view name;
    std::function<double(const LogRow&)> get;
  };
  const std::array<Series, 3> series = {
      Series{"rho [m]", [](const LogRow& r) { return r.rho; }},
      Series{"alpha [rad]", [](const LogRow& r) { return r.alpha; }},
      Series{"psi [rad]", [](const LogRow& r) { return r.psi; }}};

  for (std::size_t s = 0; s < series.size(); ++s) {
    const double top = kMargin + static_cast<double>(s) * (ph + gap);
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& log : logs) {
      for (const auto& r : log.rows) {
        lo = std::min(lo, series[s].get(r));
        hi = std::max(hi, series[s].get(r));
      }
    }
    if (hi - lo < 1e-9) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto sx = [&](double t) { return px0 + pw * t / t_end; };
    auto sy = [&](double v) { return top + ph * (hi - v) / (hi - lo); };

    out << fmt::format(
        R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#888"/>)",
        fmt_num(px0), fmt_num(top), fmt_num(pw), fmt_num(ph))
        << '\n';
    out << fmt::format(
        R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#ccc"/>)", fmt_num(px0),
        fmt_num(sy(0.0)), fmt_num(px0 + pw), fmt_num(sy(0.0)))
        << '\n';
    out << fmt::format(R"(<text x="{}" y="{}" font-size="12">{}  [{}, {}]</text>)",
                       fmt_num(px0), fmt_num(top - 4), series[s].name, fmt_num(lo),
                       fmt_num(hi))
        << '\n';
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const auto& rows = logs[i].rows;
      std::string points;
      for (std::size_t j : decimate(rows.size(), kMaxPoints)) {
        points +=
            fmt::format("{},{} ", fmt_num(sx(rows[j].t)), fmt_num(sy(series[s].get(rows[j]))));
      }
      out << fmt::format(
          R"(<polyline class="series" data-label="{}" points="{}" fill="none" stroke="{}" stroke-width="1.5" stroke-dasharray="{}"/>)",
          xml_escape(logs[i].label), points, kColors[i % kColors.size()],
          kDashes[i % kDashes.size()])
          << '\n';
    }
  }
  out << fmt::format(R"(<text x="{}" y="{}" font-size="12">t [s], 0 to {}</text>)",
                     fmt_num(px0), fmt_num(kHeight - kMargin + 25), fmt_num(t_end))
      << '\n';
  out << "</svg>\n";
}

void export_svg(std::span<const TrajectoryLog> logs, const Scenario& scenario,
                const std::filesystem::path& path) {
  std::ofstream file;
  open_for_write(file, path);
  write_svg(logs, scenario, file);
  finish_write(file, path);
}

}  // namespace safepark::sim
