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

#include "mfrqe/prob.hpp"

#include <cmath>
#include <sstream>

#include "mfrqe/kernels.hpp"

namespace mfrqe {

void ValidateDistribution(std::span<const double> p, double sum_tol,
                          const std::string& what) {
  if (p.empty()) {
    throw ContractError(what + ": empty probability vector");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0) {
      std::ostringstream msg;
      msg << what << ": entry " << i << " is " << p[i]
          << "; entries must be finite and nonnegative";
      throw ContractError(msg.str());
    }
  }
  const double sum = kernels::Active().sum(p.data(), p.size());
  if (std::fabs(sum - 1.0) > sum_tol) {
    std::ostringstream msg;
    msg << what << ": entries sum to " << sum << " (|sum - 1| = "
        << std::fabs(sum - 1.0) << " exceeds tolerance " << sum_tol << ")";
    throw ContractError(msg.str());
  }
}

ProbVector::ProbVector(std::vector<double> p) : p_(std::move(p)) {
  ValidateDistribution({p_.data(), p_.size()}, kProbConstructTol,
                       "probability vector");
}

ProbVector ProbVector::Uniform(int n) {
  if (n <= 0) throw ContractError("ProbVector::Uniform: n must be positive");
  return ProbVector(std::vector<double>(static_cast<std::size_t>(n),
                                        1.0 / static_cast<double>(n)));
}

ProbVector ProbVector::Delta(int n, int i) {
  if (n <= 0) throw ContractError("ProbVector::Delta: n must be positive");
  if (i < 0 || i >= n) {
    throw ContractError("ProbVector::Delta: index out of range");
  }
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  p[static_cast<std::size_t>(i)] = 1.0;
  return ProbVector(std::move(p));
}

}  // namespace mfrqe
