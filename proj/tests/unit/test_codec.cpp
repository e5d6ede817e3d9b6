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

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <doctest.h>

#include "poolclr/codec.hpp"
#include "poolclr/errors.hpp"

namespace poolclr {
namespace {

TEST_CASE("dyadic values on the 2^-20 grid round-trip exactly") {
  const double grid = 1.0 / FixedPointCodec::kScale;
  const double values[] = {0.0,     1.0,      -1.0,    0.5,
                           -0.25,   3.0 / 8,  42.0,    -1234.5,
                           grid,    -grid,    7 * grid, 1048575 * grid};
  for (double v : values) {
    CHECK(FixedPointCodec::decode(FixedPointCodec::encode(v)) == v);
  }
}

TEST_CASE("integer sums are exact in the ring") {
  const std::uint64_t total = FixedPointCodec::encode(3.0) +
                              FixedPointCodec::encode(5.0) +
                              FixedPointCodec::encode(7.0);
  CHECK(FixedPointCodec::decode(total) == 15.0);
}

TEST_CASE("negative addends wrap and still sum exactly") {
  std::uint64_t total = 0;
  for (double v : {0.5, -1.25, 2.0}) {
    total += FixedPointCodec::encode(v);
  }
  CHECK(FixedPointCodec::decode(total) == 1.25);
}

TEST_CASE("encoding negation is the ring complement") {
  for (double v : {0.75, 2.5, 1000.0, 1.0 / 3.0}) {
    const std::uint64_t pos = FixedPointCodec::encode(v);
    const std::uint64_t neg = FixedPointCodec::encode(-v);
    CHECK(pos + neg == 0);
  }
}

TEST_CASE("quantization error of a sum stays below the addend bound") {
  std::mt19937_64 engine(2024);
  std::uniform_real_distribution<double> value(-1e6, 1e6);
  std::uniform_int_distribution<int> length(1, 12);
  const double per_addend = 1.0 / (2.0 * FixedPointCodec::kScale);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = length(engine);
    std::uint64_t ring_sum = 0;
    long double exact = 0.0L;
    for (int i = 0; i < n; ++i) {
      const double v = value(engine);
      ring_sum += FixedPointCodec::encode(v);
      exact += static_cast<long double>(v);
    }
    const double decoded = FixedPointCodec::decode(ring_sum);
    CHECK(std::abs(decoded - static_cast<double>(exact)) <=
          per_addend * n + 1e-9);
  }
}

TEST_CASE("magnitudes at or beyond 2^42 are rejected") {
  CHECK_NOTHROW(FixedPointCodec::encode(FixedPointCodec::kMaxAbs * 0.999));
  CHECK_THROWS_AS(FixedPointCodec::encode(FixedPointCodec::kMaxAbs), Error);
  CHECK_THROWS_AS(FixedPointCodec::encode(-FixedPointCodec::kMaxAbs), Error);
  CHECK_THROWS_AS(
      FixedPointCodec::encode(std::numeric_limits<double>::infinity()), Error);
  CHECK_THROWS_AS(
      FixedPointCodec::encode(std::numeric_limits<double>::quiet_NaN()),
      Error);
  try {
    FixedPointCodec::encode(FixedPointCodec::kMaxAbs * 2);
    FAIL("expected RangeExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kRangeExceeded);
  }
}

TEST_CASE("vector helpers encode and decode element-wise") {
  const std::vector<double> values = {1.5, -2.25, 0.0};
  const std::vector<std::uint64_t> residues =
      FixedPointCodec::encode_vector(values);
  REQUIRE(residues.size() == 3);
  CHECK(FixedPointCodec::decode_vector(residues) == values);
}

}  // namespace
}  // namespace poolclr
