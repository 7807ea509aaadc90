// Copyright 2026 The Unigen Authors.
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

#ifndef UNIGEN_COMMON_HPP_
#define UNIGEN_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace unigen {

using TokenId = std::uint32_t;
using Ngram = std::vector<TokenId>;

inline constexpr TokenId kSeparatorId = 0;
inline constexpr TokenId kUnknownId = 1;
inline constexpr TokenId kFirstWordId = 2;

enum class ErrorCode {
  kInvalidArgument,
  kOutOfRange,
  kNotFound,
  kFormat,
  kIo,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class Granularity : std::uint8_t {
  kDocument = 0,
  kPassage = 1,
  kSentence = 2,
  kEntity = 3,
};

enum class Task : std::uint8_t { kDR = 0, kPR = 1, kSR = 2, kER = 3 };

inline std::string_view granularity_name(Granularity g) {
  switch (g) {
    case Granularity::kDocument: return "document";
    case Granularity::kPassage: return "passage";
    case Granularity::kSentence: return "sentence";
    case Granularity::kEntity: return "entity";
  }
  return "unknown";
}

inline Granularity parse_granularity(std::string_view s) {
  if (s == "document") return Granularity::kDocument;
  if (s == "passage") return Granularity::kPassage;
  if (s == "sentence") return Granularity::kSentence;
  if (s == "entity") return Granularity::kEntity;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown granularity '" + std::string(s) + "'");
}

inline std::string_view task_name(Task t) {
  switch (t) {
    case Task::kDR: return "DR";
    case Task::kPR: return "PR";
    case Task::kSR: return "SR";
    case Task::kER: return "ER";
  }
  return "??";
}

inline Task parse_task(std::string_view s) {
  if (s == "DR") return Task::kDR;
  if (s == "PR") return Task::kPR;
  if (s == "SR") return Task::kSR;
  if (s == "ER") return Task::kER;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown task '" + std::string(s) + "'");
}

inline Granularity granularity_of(Task t) {
  return static_cast<Granularity>(static_cast<std::uint8_t>(t));
}

}  // namespace unigen

#endif  // UNIGEN_COMMON_HPP_
