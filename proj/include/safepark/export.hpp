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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>

#include "safepark/sim.hpp"

namespace safepark::sim {

// Column order of the trajectory CSV.
inline constexpr std::string_view kCsvHeader =
    "t,x,y,theta,v,omega,rho,alpha,psi,z,omega_err,V,W,h,h0,u_v,u_omega,tau_l,tau_r,"
    "region,f1_residual,f2_residual";

// Region column value for rows without a QP (nominal controller).
inline constexpr std::string_view kNoRegion = "none";

void write_csv(const TrajectoryLog& log, std::ostream& out);

// Throws std::runtime_error with the path on I/O failure.
void export_csv(const TrajectoryLog& log, const std::filesystem::path& path);

// Inverse of write_csv; throws ParseError on malformed content.
TrajectoryLog read_csv(std::istream& in, const std::string& source = "<csv>");
TrajectoryLog import_csv(const std::filesystem::path& path);

// XY paths with obstacles, start and target markers and a legend, plus a
// second panel of rho, alpha and psi against time. Requires at least one log.
void write_svg(std::span<const TrajectoryLog> logs, const Scenario& scenario,
               std::ostream& out);
void export_svg(std::span<const TrajectoryLog> logs, const Scenario& scenario,
                const std::filesystem::path& path);

}  // namespace safepark::sim
