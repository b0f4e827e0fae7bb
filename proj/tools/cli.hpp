// SPDX-License-Identifier: Apache-2.0
//
// kmsum - exact series evaluation for sums of squared kappa-mu variates
// Copyright (C) 2026 The kmsum Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef KMSUM_TOOLS_CLI_HPP
#define KMSUM_TOOLS_CLI_HPP

#include <iosfwd>

namespace kmsum::cli
{
    inline constexpr int exit_ok = 0;
    inline constexpr int exit_validation_failed = 1;
    inline constexpr int exit_no_convergence = 2;
    inline constexpr int exit_usage = 64;

    /// Runs one command line (argv[0] is the program name) and returns the process exit code.
    /// Tables go to `out` unless --out names a file; diagnostics go to `err`.
    int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
}

#endif
