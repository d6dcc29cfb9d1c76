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

#ifndef MFRQE_PROB_H_
#define MFRQE_PROB_H_

#include <span>
#include <vector>

#include "mfrqe/common.hpp"

namespace mfrqe {

// A probability vector over a finite set.  Construction validates that every
// entry is finite and nonnegative and that the entries sum to one within
// kProbConstructTol; entries are stored exactly as given (no silent
// renormalization), so serialization round-trips are lossless.
class ProbVector {
 public:
  ProbVector() = default;
  explicit ProbVector(std::vector<double> p);

  static ProbVector Uniform(int n);
  // Point mass at index i.
  static ProbVector Delta(int n, int i);

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[static_cast<std::size_t>(i)]; }
  std::span<const double> span() const { return {p_.data(), p_.size()}; }
  const std::vector<double>& values() const { return p_; }

  auto begin() const { return p_.begin(); }
  auto end() const { return p_.end(); }

 private:
  std::vector<double> p_;
};

// Validates that `p` is a probability vector under the given tolerance on
// |sum - 1|; throws ContractError naming the offending index/value.  `what`
// names the vector in error messages (e.g. "policy row (t=2, x=0)").
void ValidateDistribution(std::span<const double> p, double sum_tol,
                          const std::string& what);

}  // namespace mfrqe

#endif  // MFRQE_PROB_H_
