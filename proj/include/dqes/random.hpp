/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#ifndef DQES_RANDOM_HPP_
#define DQES_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace dqes {

/// SplitMix64 finalizer, used to derive independent stream seeds.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the stream identified by (seed, purpose tag, index).
/// The tag keeps e.g. dataset and sketch randomness from aliasing.
inline uint64_t derive_seed(uint64_t seed, std::string_view tag, uint64_t index = 0) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(seed ^ h) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/**
 * The single PRNG used across the library: the standard 64-bit Mersenne
 * Twister, whose output sequence is fixed by the C++ standard. Conversions to
 * reals and bounded integers are done here rather than through the standard
 * distributions, whose outputs are implementation-defined.
 */
class rng {
 public:
  explicit rng(uint64_t seed = 0) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  /// Uniform real in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// True with probability p. Draws nothing when p >= 1 or p <= 0.
  bool bernoulli(double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return uniform() < p;
  }

  /// True with probability 2^-levels; exact for levels up to 63.
  bool halving(int levels) {
    if (levels <= 0) return true;
    if (levels >= 64) return false;
    return (engine_() >> (64 - levels)) == 0;
  }

  /// Fair coin.
  bool coin() { return (engine_() >> 63) != 0; }

  /// Uniform integer in [0, bound) for bound >= 1 (multiply-shift reduction).
  uint64_t below(uint64_t bound) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(engine_()) * bound) >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dqes

#endif  // DQES_RANDOM_HPP_
