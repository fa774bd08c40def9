// Copyright 2026 The cactusdet authors
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

#include <iosfwd>
#include <string>
#include <vector>

namespace cactusdet {

/// Runs one CLI invocation (args exclude the program name). Exit status:
/// 0 success, 1 data/validation failure, 2 usage or configuration error.
/// Diagnostics go to err, data to out or to files under the output
/// directory. Every output-writing subcommand stamps its effective config
/// (stamp.txt, deterministic) and wall-clock time (stamp.time.txt, sidecar).
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cactusdet
