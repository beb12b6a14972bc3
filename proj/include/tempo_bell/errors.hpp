// Copyright 2026 The tempo-bell Authors

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

#include <stdexcept>
#include <string>

namespace tempobell {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A direction was requested from a (near) zero vector.
class ZeroVector : public Error {
  public:
    explicit ZeroVector(const std::string &what) : Error("ZeroVector: " + what) {}
};

/// Collapse onto a measurement branch whose Born probability is below threshold.
class ImpossibleOutcome : public Error {
  public:
    explicit ImpossibleOutcome(const std::string &what)
        : Error("ImpossibleOutcome: " + what) {}
};

class InvalidMixture : public Error {
  public:
    explicit InvalidMixture(const std::string &what)
        : Error("InvalidMixture: " + what) {}
};

class InvalidParameter : public Error {
  public:
    explicit InvalidParameter(const std::string &what)
        : Error("InvalidParameter: " + what) {}
};

/// Raised when some context pair received no trials.
class InsufficientTrials : public Error {
  public:
    explicit InsufficientTrials(const std::string &what)
        : Error("InsufficientTrials: " + what) {}
};

/// A density matrix failed Hermiticity, trace or positivity checks.
class InvalidState : public Error {
  public:
    explicit InvalidState(const std::string &what)
        : Error("InvalidState: " + what) {}
};

} // namespace tempobell
