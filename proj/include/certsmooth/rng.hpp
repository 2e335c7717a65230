/* Copyright 2026 The certsmooth Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CERTSMOOTH_RNG_HPP_
#define CERTSMOOTH_RNG_HPP_

#include <cstdint>
#include <random>

namespace certsmooth {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a parent seed and a counter
/// (input index, stream id, ...). Pure, so results do not depend on which
/// worker handles which input.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

/// Stream identifiers for the different draws taken for one input.
enum class Stream : std::uint64_t {
  kOptimize = 1,
  kPredict = 2,
  kCertify = 3,
  kTrain = 4,
};

inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream) {
  return std::mt19937_64(mix_seed(seed, static_cast<std::uint64_t>(stream)));
}

}  // namespace certsmooth

#endif  // CERTSMOOTH_RNG_HPP_
