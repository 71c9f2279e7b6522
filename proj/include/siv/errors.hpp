// Copyright 2026 The sivsim Authors
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

#include <stdexcept>
#include <string>

namespace siv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid physical input: negative temperature, non-Hermitian operator, ...
class DomainError : public Error {
public:
    using Error::Error;
};

// Eigenstates that cannot be assigned branch/spin/nuclear labels.
class ClassificationError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// A coupling or labeling problem that leaves some state with no partner.
class DegeneracyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class StepSizeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateSteadyStateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class DegenerateSignalError : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

class FitError : public Error {
public:
    using Error::Error;
};

class SeedingError : public FitError {
public:
    using FitError::FitError;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

}  // namespace siv
