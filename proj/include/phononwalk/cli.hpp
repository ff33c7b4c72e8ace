// Copyright 2026 The phononwalk Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phononwalk::cli {

enum ExitCode : int {
    success = 0,
    usage_error = 1,
    model_error = 2,
    degenerate_data = 3,
};

/// Entry point shared by the `phononwalk` binary and the tests. `args` excludes the
/// program name. Commands: positions | simulate | spectrum | fit | sweep.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace phononwalk::cli
