// Copyright 2026 The mfrqe Authors.
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

#ifndef MFRQE_COMMON_H_
#define MFRQE_COMMON_H_

#include <stdexcept>
#include <string>

namespace mfrqe {

// Library version, embedded in every exported artifact.
inline constexpr const char* kVersion = "0.1.0";

// Tolerance accepted when a probability vector is handed to us from outside
// (construction, deserialization, config files).
inline constexpr double kProbConstructTol = 1e-9;

// Tolerance treated as floating-point drift and repaired by renormalization;
// anything larger coming out of a model evaluator is a broken kernel.
inline constexpr double kProbDriftTol = 1e-12;

// Floor applied to probabilities inside regularizer log terms only.
inline constexpr double kLogFloor = 1e-12;

// An API precondition was violated by the caller (bad dimensions, invalid
// probability vector, out-of-range parameter).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A user-supplied model produced invalid data (e.g. a transition row that
// does not sum to one, or a reward outside the declared bound).  Carries the
// (t, x, u) location that triggered the failure; -1 marks "not applicable".
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& what, int t, int x, int u)
      : std::runtime_error(what), t_(t), x_(x), u_(u) {}
  int t() const { return t_; }
  int x() const { return x_; }
  int u() const { return u_; }

 private:
  int t_;
  int x_;
  int u_;
};

// A configuration file or command-line flag failed validation.  The message
// always names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver exhausted its budget without meeting its tolerance.
// Carries the last residual and, when known, the (t, x) of the offending
// subproblem; -1 marks "not applicable".
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, int t, int x)
      : std::runtime_error(what), residual_(residual), t_(t), x_(x) {}
  double residual() const { return residual_; }
  int t() const { return t_; }
  int x() const { return x_; }

 private:
  double residual_;
  int t_;
  int x_;
};

// A value left the mathematical domain of an operation (e.g. a log-barrier
// regularizer evaluated on a boundary row).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace mfrqe

#endif  // MFRQE_COMMON_H_
