// Copyright 2026 The idrisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IDRISK_TOOLS_CLI_H_
#define IDRISK_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace idrisk::cli {

// Runs one command. argv[0] is the program name. Returns the process exit
// status: 0 on success, 1 on a data or validation error, 2 on a usage error.
int Run(const std::vector<std::string>& argv, std::ostream& out,
        std::ostream& err);

}  // namespace idrisk::cli

#endif  // IDRISK_TOOLS_CLI_H_
