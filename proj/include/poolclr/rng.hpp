// Copyright 2026 The Poolclr Authors
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

#ifndef POOLCLR_RNG_HPP_
#define POOLCLR_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace poolclr {

// splitmix64 finalizer; mixes a 64-bit value into a well-distributed one.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a tag path, so
// that concurrent consumers (replicates, strata, pooling rounds) never share
// a generator state. Tag order matters.
inline std::uint64_t stream_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(base);
  for (std::uint64_t t : tags) {
    s = splitmix64(s ^ splitmix64(t));
  }
  return s;
}

inline std::mt19937_64 make_engine(std::uint64_t base,
                                   std::initializer_list<std::uint64_t> tags) {
  return std::mt19937_64(stream_seed(base, tags));
}

}  // namespace poolclr

#endif  // POOLCLR_RNG_HPP_
