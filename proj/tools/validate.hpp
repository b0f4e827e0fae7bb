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

#ifndef KMSUM_TOOLS_VALIDATE_HPP
#define KMSUM_TOOLS_VALIDATE_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kmsum::cli
{
    struct Check
    {
        std::string name;
        bool pass = false;
        double measured = 0.0;
        double bound = 0.0;
    };

    struct SuiteReport
    {
        std::string suite;
        std::vector<Check> checks;

        bool passed() const;
    };

    /// Suite names accepted by run_suite.
    const std::vector<std::string> &suite_names();

    /// Runs one oracle suite. `seed` and `trials` only affect the mc suite.
    SuiteReport run_suite(std::string_view suite, std::uint64_t seed, std::size_t trials, unsigned threads);
}

#endif
