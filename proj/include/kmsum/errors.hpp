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

#ifndef KMSUM_ERRORS_HPP
#define KMSUM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kmsum
{
    /// Base class of every error raised by the library.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Argument outside the mathematical domain of the operation.
    class DomainError : public Error
    {
    public:
        using Error::Error;
    };

    /// A series or iteration did not reach its tolerance within the allowed work.
    class NoConvergenceError : public Error
    {
    public:
        using Error::Error;
    };

    /// Magnitude exceeded a configured cap.
    class OverflowError : public Error
    {
    public:
        using Error::Error;
    };

    /// Hypergeometric series outside its disc of convergence.
    class DivergenceError : public Error
    {
    public:
        using Error::Error;
    };

    /// Lower hypergeometric parameter at a nonpositive integer.
    class PoleError : public Error
    {
    public:
        using Error::Error;
    };

    /// Series requested outside the region where it converges (BEP approach 1).
    class GateError : public Error
    {
    public:
        using Error::Error;
    };
}

#endif
