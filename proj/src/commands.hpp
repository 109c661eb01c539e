// Copyright 2026 The soccer3d Authors
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

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace soccer3d {

// Subcommands shared by the C API and the command-line tool. Each takes a JSON
// object of options and returns a JSON summary; unknown option keys are
// rejected. A result with "ok": false reports fatal stage errors.
nlohmann::json run_command(std::string_view name, const nlohmann::json& options);

const std::vector<std::string>& command_names();

}  // namespace soccer3d
