/*
 * Copyright 2026 The attrikit Authors.
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

#ifndef ATTRIKIT_SEEDING_HPP_
#define ATTRIKIT_SEEDING_HPP_

#include <cstdint>

namespace attrikit {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent sub-seed for a named stream of a master seed.
enum class SeedStream : std::uint64_t {
  kData = 1,
  kNetworkInit = 2,
  kShuffle = 3,
  kEvalPoints = 4,
  kNoise = 5,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream stream) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(stream)));
}

}  // namespace attrikit

#endif  // ATTRIKIT_SEEDING_HPP_
