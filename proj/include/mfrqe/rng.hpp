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

#ifndef MFRQE_RNG_H_
#define MFRQE_RNG_H_

#include <cstdint>

namespace mfrqe {
namespace rng {

// Counter-based random stream.  Every draw is a pure function of
// (master seed, sub-stream ids, draw index), so simulations are bitwise
// reproducible regardless of evaluation order or thread count: the draw for
// (episode e, agent i, time t) never depends on how many draws any other
// agent consumed.

// SplitMix64 finalizer (Stafford variant 13): a cheap, well-mixed 64-bit
// permutation.
inline constexpr std::uint64_t Mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Folds one id into a key.  The pre-mix of the id keeps nearby ids (0, 1, 2,
// ...) far apart before they touch the key.
inline constexpr std::uint64_t Absorb(std::uint64_t key, std::uint64_t id) {
  return Mix64(key ^ Mix64(id + 0x9e3779b97f4a7c15ULL));
}

inline constexpr double ToUnit(std::uint64_t bits) {
  // Top 53 bits -> [0, 1).
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class Stream {
 public:
  explicit constexpr Stream(std::uint64_t seed)
      : key_(Mix64(seed ^ 0x6d656178d3a2c1b7ULL)) {}

  // Derives a child stream; `at(a).at(b)` and `at(b).at(a)` differ.
  constexpr Stream At(std::uint64_t id) const {
    return Stream(FromKey{}, Absorb(key_ ^ kChildSalt, id));
  }

  constexpr std::uint64_t Bits(std::uint64_t draw) const {
    return Absorb(key_ ^ kDrawSalt, draw);
  }

  // Uniform double in [0, 1).
  constexpr double Uniform(std::uint64_t draw) const {
    return ToUnit(Bits(draw));
  }

  constexpr std::uint64_t key() const { return key_; }

 private:
  struct FromKey {};
  constexpr Stream(FromKey, std::uint64_t key) : key_(key) {}

  // Distinct salts keep the child-derivation and draw domains disjoint.
  static constexpr std::uint64_t kChildSalt = 0xa5a5a5a5a5a5a5a5ULL;
  static constexpr std::uint64_t kDrawSalt = 0x5a5a5a5a5a5a5a5aULL;

  std::uint64_t key_;
};

}  // namespace rng
}  // namespace mfrqe

#endif  // MFRQE_RNG_H_
