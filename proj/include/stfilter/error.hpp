/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#ifndef STFILTER_ERROR_HPP
#define STFILTER_ERROR_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stfilter {

enum class ErrorCode {
  BadHeader,
  DuplicateId,
  MalformedRow,
  BadDuration,
  IoError,
  NotComputable,
  MalformedScoreRow,
  DuplicateScore,
  BadScore,
  UnknownScorer,
  NoValidScores,
  MissingColumn,
  SubsetMismatch,
  EmptySubset,
  MissingRecord,
  InvalidSpec,
  InvalidNoiseSpec,
  InsufficientRecords,
  MalformedLabel,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::BadDuration: return "BadDuration";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NotComputable: return "NotComputable";
    case ErrorCode::MalformedScoreRow: return "MalformedScoreRow";
    case ErrorCode::DuplicateScore: return "DuplicateScore";
    case ErrorCode::BadScore: return "BadScore";
    case ErrorCode::UnknownScorer: return "UnknownScorer";
    case ErrorCode::NoValidScores: return "NoValidScores";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::SubsetMismatch: return "SubsetMismatch";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::MissingRecord: return "MissingRecord";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidNoiseSpec: return "InvalidNoiseSpec";
    case ErrorCode::InsufficientRecords: return "InsufficientRecords";
    case ErrorCode::MalformedLabel: return "MalformedLabel";
  }
  return "Unknown";
}

// Every data error raised by the library. Carries the offending line (1-based,
// counting the header) and/or id when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail, std::optional<std::size_t> line = std::nullopt,
        std::optional<std::string> id = std::nullopt)
      : std::runtime_error(format(code, detail, line, id)),
        code_(code),
        line_(line),
        id_(std::move(id)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::optional<std::size_t>& line() const noexcept { return line_; }
  const std::optional<std::string>& id() const noexcept { return id_; }

 private:
  static std::string format(ErrorCode code, const std::string& detail,
                            const std::optional<std::size_t>& line,
                            const std::optional<std::string>& id) {
    std::string out(to_string(code));
    if (id) out += "(" + *id + ")";
    if (line) out += " at line " + std::to_string(*line);
    if (!detail.empty()) out += ": " + detail;
    return out;
  }

  ErrorCode code_;
  std::optional<std::size_t> line_;
  std::optional<std::string> id_;
};

}  // namespace stfilter

#endif  // STFILTER_ERROR_HPP
