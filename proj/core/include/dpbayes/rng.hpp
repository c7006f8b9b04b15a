// Copyright 2026 The dpbayes Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPBAYES_RNG_HPP_
#define DPBAYES_RNG_HPP_

#include <cstdint>
#include <random>
#include <utility>

namespace dpbayes {

// Seedable deterministic generator with cheap splitting into independent
// streams.  The (seed, stream) pair fully determines the draw sequence, so
// identical seed + stream + call sequence reproduces identical draws, and
// work fanned out over streams is reproducible regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // A generator for an independent stream derived from the same seed.  The
  // child's sequence is determined by (seed, parent stream, index) only.
  [[nodiscard]] Rng stream(std::uint64_t index) const;

  std::uint64_t next_u64();

  // Uniform draw strictly inside (0, 1): safe to pass through log() or an
  // inverse CDF without hitting the endpoints.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller on two uniform draws.
  double normal();

  // Uniform index in [0, n) via the multiply-shift bounded method.  The
  // modulo bias is below n / 2^64 and irrelevant at the sizes used here.
  std::uint64_t uniform_index(std::uint64_t n);

  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[uniform_index(i)]);
    }
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace dpbayes

#endif  // DPBAYES_RNG_HPP_
