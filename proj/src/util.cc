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

#include "wmplan/util.h"

#include <fmt/format.h>

#include <fstream>
#include <limits>
#include <sstream>

#include "wmplan/error.h"

namespace wmplan {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnbalancedTag: return "UnbalancedTag";
    case ErrorCode::kEmptyGoal: return "EmptyGoal";
    case ErrorCode::kStateWithoutAction: return "StateWithoutAction";
    case ErrorCode::kDuplicateBlock: return "DuplicateBlock";
    case ErrorCode::kPrefixOutOfRange: return "PrefixOutOfRange";
    case ErrorCode::kTooFewSteps: return "TooFewSteps";
    case ErrorCode::kInvalidTrajectory: return "InvalidTrajectory";
    case ErrorCode::kBadHeader: return "BadHeader";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kNonMonotonic: return "NonMonotonic";
    case ErrorCode::kBadRow: return "BadRow";
    case ErrorCode::kEmptyStream: return "EmptyStream";
    case ErrorCode::kBadTree: return "BadTree";
    case ErrorCode::kGenerationFailed: return "GenerationFailed";
    case ErrorCode::kUnparseableResponse: return "UnparseableResponse";
    case ErrorCode::kMissingKey: return "MissingKey";
    case ErrorCode::kInvalidExtraction: return "InvalidExtraction";
    case ErrorCode::kRemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::kNoDistractorSource: return "NoDistractorSource";
    case ErrorCode::kBadModel: return "BadModel";
    case ErrorCode::kWorldModelFailure: return "WorldModelFailure";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kPreconditionUnmet: return "PreconditionUnmet";
    case ErrorCode::kUnknownAction: return "UnknownAction";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kExhausted: return "Exhausted";
    case ErrorCode::kUnknownBattle: return "UnknownBattle";
    case ErrorCode::kInvalidWinner: return "InvalidWinner";
    case ErrorCode::kDuplicateSubmission: return "DuplicateSubmission";
    case ErrorCode::kDegenerateMarginals: return "DegenerateMarginals";
    case ErrorCode::kPreconditionViolated: return "PreconditionViolated";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Fnv1a64Hex(std::string_view bytes) {
  return fmt::format("{:016x}", Fnv1a64(bytes));
}

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t UniformIndex(Rng& rng, std::size_t n) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string_view TrimView(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string Trim(std::string_view s) { return std::string(TrimView(s)); }

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path);
}

}  // namespace wmplan
