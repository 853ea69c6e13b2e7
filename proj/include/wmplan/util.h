// Copyright 2026 The WMPlan Authors
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

// Small shared helpers: hashing, portable seeded randomness, string trimming.

#ifndef WMPLAN_UTIL_H_
#define WMPLAN_UTIL_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace wmplan {

// 64-bit FNV-1a.
std::uint64_t Fnv1a64(std::string_view bytes);

// Lower-case 16-digit hex rendering of Fnv1a64.
std::string Fnv1a64Hex(std::string_view bytes);

// Mixes a seed with a stream index so independent draws can be derived
// without carrying generator state around (splitmix64 finalizer).
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream);

// std::uniform_int_distribution is implementation-defined; these helpers only
// consume raw mt19937_64 output so sequences are identical across toolchains.
using Rng = std::mt19937_64;

// Uniform integer in [0, n). n must be positive.
std::size_t UniformIndex(Rng& rng, std::size_t n);

// Uniform double in [0, 1).
double UniformUnit(Rng& rng);

// Fisher-Yates shuffle driven by UniformIndex.
template <typename T>
void SeededShuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = UniformIndex(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

std::string_view TrimView(std::string_view s);
std::string Trim(std::string_view s);

std::vector<std::string> SplitLines(std::string_view text);

// Reads a whole file; throws Error(kIo) when it cannot be opened.
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace wmplan

#endif  // WMPLAN_UTIL_H_
