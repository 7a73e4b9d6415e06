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

#ifndef STFILTER_MANIFEST_HPP
#define STFILTER_MANIFEST_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stfilter/error.hpp"

namespace stfilter {

inline constexpr std::string_view kManifestHeader =
    "id\tsrc_audio\tsrc_duration_s\tsrc_text\ttgt_audio\ttgt_duration_s\ttgt_text";
inline constexpr std::size_t kManifestColumns = 7;

// Audio length held as whole milliseconds, so a manifest round-trips exactly.
class Duration {
 public:
  constexpr Duration() = default;
  static constexpr Duration from_millis(std::int64_t ms) { return Duration(ms); }
  static Duration from_seconds(double s) {
    return Duration(static_cast<std::int64_t>(std::llround(s * 1000.0)));
  }

  constexpr std::int64_t millis() const { return ms_; }
  constexpr double seconds() const { return static_cast<double>(ms_) / 1000.0; }
  constexpr bool is_zero() const { return ms_ == 0; }

  // Always exactly three decimals.
  std::string to_string() const {
    std::string out = std::to_string(ms_ / 1000);
    std::int64_t frac = ms_ % 1000;
    out += '.';
    out += static_cast<char>('0' + frac / 100);
    out += static_cast<char>('0' + (frac / 10) % 10);
    out += static_cast<char>('0' + frac % 10);
    return out;
  }

  friend constexpr bool operator==(Duration, Duration) = default;
  friend constexpr auto operator<=>(Duration, Duration) = default;

 private:
  constexpr explicit Duration(std::int64_t ms) : ms_(ms) {}
  std::int64_t ms_ = 0;
};

struct PairRecord {
  std::string id;
  std::optional<std::string> src_audio_path;
  Duration src_duration;
  std::string src_text;
  std::optional<std::string> tgt_audio_path;
  Duration tgt_duration;
  std::string tgt_text;

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

struct Corpus {
  std::vector<PairRecord> records;
  std::string source_label;
  std::string target_label;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  // Records compare as a set keyed by id; labels are metadata.
  bool same_records(const Corpus& other) const {
    if (records.size() != other.records.size()) return false;
    auto a = sorted_view();
    auto b = other.sorted_view();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(*a[i] == *b[i])) return false;
    return true;
  }

  std::vector<const PairRecord*> sorted_view() const {
    std::vector<const PairRecord*> view;
    view.reserve(records.size());
    for (const auto& r : records) view.push_back(&r);
    std::sort(view.begin(), view.end(),
              [](const PairRecord* x, const PairRecord* y) { return x->id < y->id; });
    return view;
  }
};

struct RowError {
  ErrorCode code;
  std::size_t line;
  std::string message;
};

struct ParseResult {
  Corpus corpus;
  std::vector<RowError> errors;
};

struct ValidationReport {
  std::size_t records = 0;
  std::size_t empty_src_text = 0;
  std::size_t empty_tgt_text = 0;
  std::size_t zero_src_duration = 0;
  std::size_t zero_tgt_duration = 0;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// Finite decimal real; rejects trailing garbage, "inf" and "nan".
inline std::optional<double> parse_real(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::optional<std::string> optional_cell(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  return std::string(cell);
}

inline bool getline_lf(std::istream& in, std::string& line) {
  return static_cast<bool>(std::getline(in, line, '\n'));
}

}  // namespace detail

inline Duration parse_duration(std::string_view cell, std::size_t line) {
  auto value = detail::parse_real(cell);
  if (!value) throw Error(ErrorCode::BadDuration, "unparseable duration '" + std::string(cell) + "'", line);
  if (*value < 0.0) throw Error(ErrorCode::BadDuration, "negative duration '" + std::string(cell) + "'", line);
  if (*value > 1e12) throw Error(ErrorCode::BadDuration, "duration out of range", line);
  return Duration::from_seconds(*value);
}

struct ParseOptions {
  bool strict = true;
  std::string source_label = "src";
  std::string target_label = "tgt";
};

// Reads a manifest TSV. Strict mode throws on the first bad row; lenient mode
// skips bad rows and records them in ParseResult::errors.
inline ParseResult parse_manifest(std::istream& in, const ParseOptions& opts = {}) {
  ParseResult result;
  result.corpus.source_label = opts.source_label;
  result.corpus.target_label = opts.target_label;

  std::string line;
  if (!detail::getline_lf(in, line)) throw Error(ErrorCode::BadHeader, "empty manifest", 1);
  if (line != kManifestHeader) throw Error(ErrorCode::BadHeader, "unexpected manifest header", 1);

  std::unordered_set<std::string> seen;
  std::size_t lineno = 1;
  while (detail::getline_lf(in, line)) {
    ++lineno;
    try {
      auto cells = detail::split_tabs(line);
      if (cells.size() != kManifestColumns)
        throw Error(ErrorCode::MalformedRow,
                    "expected 7 columns, got " + std::to_string(cells.size()), lineno);
      if (cells[0].empty()) throw Error(ErrorCode::MalformedRow, "empty id", lineno);
      PairRecord rec;
      rec.id = std::string(cells[0]);
      rec.src_audio_path = detail::optional_cell(cells[1]);
      rec.src_duration = parse_duration(cells[2], lineno);
      rec.src_text = std::string(cells[3]);
      rec.tgt_audio_path = detail::optional_cell(cells[4]);
      rec.tgt_duration = parse_duration(cells[5], lineno);
      rec.tgt_text = std::string(cells[6]);
      if (!seen.insert(rec.id).second)
        throw Error(ErrorCode::DuplicateId, "", lineno, rec.id);
      result.corpus.records.push_back(std::move(rec));
    } catch (const Error& e) {
      if (opts.strict) throw;
      result.errors.push_back({e.code(), lineno, e.what()});
    }
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure");
  return result;
}

// Header plus one row per record, ascending by id. Returns the row count.
inline std::size_t write_manifest(const Corpus& corpus, std::ostream& out) {
  out << kManifestHeader << '\n';
  auto view = corpus.sorted_view();
  for (const PairRecord* r : view) {
    out << r->id << '\t' << r->src_audio_path.value_or("") << '\t' << r->src_duration.to_string()
        << '\t' << r->src_text << '\t' << r->tgt_audio_path.value_or("") << '\t'
        << r->tgt_duration.to_string() << '\t' << r->tgt_text << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failure");
  return view.size();
}

inline ValidationReport validate(const Corpus& corpus) {
  ValidationReport rep;
  rep.records = corpus.size();
  for (const auto& r : corpus.records) {
    rep.empty_src_text += r.src_text.empty();
    rep.empty_tgt_text += r.tgt_text.empty();
    rep.zero_src_duration += r.src_duration.is_zero();
    rep.zero_tgt_duration += r.tgt_duration.is_zero();
  }
  return rep;
}

// Id -> record lookup over a corpus that outlives the index.
class CorpusIndex {
 public:
  explicit CorpusIndex(const Corpus& corpus) {
    by_id_.reserve(corpus.size());
    for (const auto& r : corpus.records) by_id_.emplace(r.id, &r);
  }
  const PairRecord* find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : it->second;
  }

 private:
  std::unordered_map<std::string, const PairRecord*> by_id_;
};

}  // namespace stfilter

#endif  // STFILTER_MANIFEST_HPP
