// Copyright 2026 The cqed-toolkit Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cqed {

enum class ErrorKind {
    domain,        // argument outside the mathematical domain of an operation
    degenerate,    // singular configuration (zero detuning, zero charge, ...)
    insufficient,  // not enough data points / peaks
    no_signal,
    inconsistent,  // inputs that contradict each other (sign mismatch, t2 > 2 t1)
    fit_failed,
    numeric,       // NaN / overflow during a computation
    parse,
    usage,
};

/// Every failure raised by the toolkit. The kind decides the CLI exit code:
/// fit_failed and numeric are runtime failures, everything else is an input error.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &message) : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Re-raise with a pipeline stage prefix, keeping the kind.
    Error with_stage(std::string_view stage) const {
        return Error(kind_, std::string(stage) + ": " + what());
    }

private:
    ErrorKind kind_;
};

inline bool is_runtime_failure(ErrorKind k) noexcept {
    return k == ErrorKind::fit_failed || k == ErrorKind::numeric;
}

}  // namespace cqed
