// Copyright 2026 The Versebias Authors.
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


// Portable seeded random draws. Values are built from raw 64-bit engine
// output so sequences are identical across standard library implementations.

#ifndef VERSEBIAS_RANDOM_H_
#define VERSEBIAS_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <random>

namespace versebias {

class UniformStream {
 public:
  explicit UniformStream(uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double Next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); n must be positive.
  uint64_t Below(uint64_t n) { return static_cast<uint64_t>(Next() * n); }

  // Standard normal draw (Box-Muller, one value per call).
  double Normal() {
    double u1 = 1.0 - Next();
    double u2 = Next();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Fisher-Yates shuffle driven by a UniformStream.
template <typename Container>
void SeededShuffle(Container& items, UniformStream& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.Below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace versebias

#endif  // VERSEBIAS_RANDOM_H_
