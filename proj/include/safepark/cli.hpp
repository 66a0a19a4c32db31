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
#include <string>

namespace safepark::cli {

// Existing paths are returned unchanged; otherwise a bare name such as
// "paper_sim" is looked up among the shipped scenarios.
std::filesystem::path resolve_scenario(const std::string& name_or_path);

// Parses argv and runs simulate / compare / verify. Prints one summary line
// per task to `out` and one diagnostic line per failure to `err`. Returns the
// process exit status.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace safepark::cli
