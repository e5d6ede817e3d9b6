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

#ifndef POOLCLR_CODEC_HPP_
#define POOLCLR_CODEC_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "poolclr/errors.hpp"

namespace poolclr {

// Fixed-point encoding into the ring of integers modulo 2^64. Sums of
// encodings are exact in the ring, so masked summation loses nothing beyond
// the initial quantization of each addend (at most 2^-21 per value).
//
// The 2^42 magnitude guard keeps sums of up to 2^20 addends away from
// wraparound: 2^42 * 2^20 * 2 = 2^63 <= modulus / 2.
class FixedPointCodec {
 public:
  static constexpr double kScale = 1048576.0;  // 2^20
  static constexpr double kMaxAbs = 4398046511104.0;  // 2^42

  static std::uint64_t encode(double value) {
    if (!(std::abs(value) < kMaxAbs)) {
      throw Error(Errc::kRangeExceeded,
                  "value " + std::to_string(value) +
                      " outside fixed-point range (|x| < 2^42)");
    }
    return static_cast<std::uint64_t>(
        static_cast<std::int64_t>(std::llround(value * kScale)));
  }

  static double decode(std::uint64_t residue) {
    return static_cast<double>(static_cast<std::int64_t>(residue)) / kScale;
  }

  static std::vector<std::uint64_t> encode_vector(
      const std::vector<double>& values) {
    std::vector<std::uint64_t> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(encode(v));
    return out;
  }

  static std::vector<double> decode_vector(
      const std::vector<std::uint64_t>& residues) {
    std::vector<double> out;
    out.reserve(residues.size());
    for (std::uint64_t r : residues) out.push_back(decode(r));
    return out;
  }
};

}  // namespace poolclr

#endif  // POOLCLR_CODEC_HPP_
