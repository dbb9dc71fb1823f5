/*
 * Copyright 2026 The Workbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WORKBENCH_RANDOM_H_
#define WORKBENCH_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace workbench {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
inline uint64_t MixBits(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent seed for one unit of work (e.g. a (feature, repeat)
// pair). The result depends only on the arguments, never on scheduling.
inline uint64_t DeriveSeed(uint64_t seed, std::initializer_list<uint64_t> keys) {
  uint64_t h = MixBits(seed);
  for (const uint64_t k : keys) h = MixBits(h ^ MixBits(k + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream tags for DeriveSeed, so that different consumers of the same master
// seed never share a stream.
enum class SeedStream : uint64_t {
  kPrepare = 1,
  kPfi = 2,
  kLime = 3,
  kShapBackground = 4,
  kShapCoalitions = 5,
  kReliability = 6,
  kRobustness = 7,
  kKMeans = 8,
  kValidation = 9,
  kGamValidation = 10,
};

inline uint64_t DeriveSeed(uint64_t seed, SeedStream stream,
                           std::initializer_list<uint64_t> keys = {}) {
  uint64_t h = DeriveSeed(seed, {static_cast<uint64_t>(stream)});
  for (const uint64_t k : keys) h = MixBits(h ^ MixBits(k + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace workbench

#endif  // WORKBENCH_RANDOM_H_
