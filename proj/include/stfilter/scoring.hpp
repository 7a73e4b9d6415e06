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

#ifndef STFILTER_SCORING_HPP
#define STFILTER_SCORING_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stfilter/error.hpp"
#include "stfilter/manifest.hpp"
#include "stfilter/parallel.hpp"
#include "stfilter/tokenizer.hpp"

namespace stfilter {

enum class ScorerKind { TextText, SpeechText, SpeechSpeech, TextSpeech, ExternalNll };

inline constexpr std::array<ScorerKind, 5> kAllScorers = {
    ScorerKind::TextText, ScorerKind::SpeechText, ScorerKind::SpeechSpeech,
    ScorerKind::TextSpeech, ScorerKind::ExternalNll};

inline constexpr std::array<ScorerKind, 4> kRatioScorers = {
    ScorerKind::TextText, ScorerKind::SpeechText, ScorerKind::SpeechSpeech,
    ScorerKind::TextSpeech};

inline constexpr std::string_view scorer_name(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::TextText: return "text_text";
    case ScorerKind::SpeechText: return "speech_text";
    case ScorerKind::SpeechSpeech: return "speech_speech";
    case ScorerKind::TextSpeech: return "text_speech";
    case ScorerKind::ExternalNll: return "nll";
  }
  return "";
}

inline std::optional<ScorerKind> scorer_from_name(std::string_view name) {
  for (ScorerKind k : kAllScorers)
    if (scorer_name(k) == name) return k;
  return std::nullopt;
}

inline ScorerKind parse_scorer(std::string_view name) {
  if (auto k = scorer_from_name(name)) return *k;
  throw Error(ErrorCode::UnknownScorer, "'" + std::string(name) + "'");
}

// nullopt is the INVALID marker.
using Score = std::optional<double>;

inline constexpr std::string_view kInvalidCell = "INVALID";

inline std::string format_score(const Score& s) {
  if (!s) return std::string(kInvalidCell);
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), *s);
  return std::string(buf.data(), ptr);
}

// Per-pair scores, one column per scorer. Rows are held ascending by id.
class ScoreTable {
 public:
  ScoreTable() = default;

  static ScoreTable from_ids(std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end());
    auto dup = std::adjacent_find(ids.begin(), ids.end());
    if (dup != ids.end()) throw Error(ErrorCode::DuplicateId, "", std::nullopt, *dup);
    ScoreTable t;
    t.ids_ = std::move(ids);
    return t;
  }

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  std::optional<std::size_t> index_of(std::string_view id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - ids_.begin());
  }

  bool has_column(ScorerKind kind) const { return columns_.contains(kind); }

  std::span<const Score> column(ScorerKind kind) const {
    auto it = columns_.find(kind);
    if (it == columns_.end())
      throw Error(ErrorCode::MissingColumn, "no '" + std::string(scorer_name(kind)) + "' column");
    return it->second;
  }

  std::vector<ScorerKind> kinds() const {
    std::vector<ScorerKind> out;
    for (const auto& [k, _] : columns_) out.push_back(k);
    return out;
  }

  // cells[i] belongs to ids()[i].
  void set_column(ScorerKind kind, std::vector<Score> cells, std::string provenance = {}) {
    if (cells.size() != ids_.size())
      throw std::invalid_argument("score column length does not match table");
    columns_[kind] = std::move(cells);
    if (provenance.empty())
      provenance_.erase(kind);
    else
      provenance_[kind] = std::move(provenance);
  }

  std::optional<std::string> provenance(ScorerKind kind) const {
    auto it = provenance_.find(kind);
    if (it == provenance_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const ScoreTable& a, const ScoreTable& b) {
    return a.ids_ == b.ids_ && a.columns_ == b.columns_;
  }

 private:
  std::vector<std::string> ids_;
  std::map<ScorerKind, std::vector<Score>> columns_;
  std::map<ScorerKind, std::string> provenance_;
};

// Source length over target length; a zero denominator yields INVALID.
inline Score ratio_score(const PairRecord& rec, ScorerKind kind, const TokenizerConfig& cfg = {}) {
  auto ratio = [](double num, double den) -> Score {
    if (den == 0.0) return std::nullopt;
    return num / den;
  };
  auto tokens = [&](const std::string& s) { return static_cast<double>(token_count(s, cfg)); };
  switch (kind) {
    case ScorerKind::TextText: return ratio(tokens(rec.src_text), tokens(rec.tgt_text));
    case ScorerKind::SpeechText: return ratio(rec.src_duration.seconds(), tokens(rec.tgt_text));
    case ScorerKind::SpeechSpeech:
      return ratio(rec.src_duration.seconds(), rec.tgt_duration.seconds());
    case ScorerKind::TextSpeech: return ratio(tokens(rec.src_text), rec.tgt_duration.seconds());
    case ScorerKind::ExternalNll: break;
  }
  throw Error(ErrorCode::NotComputable, "nll scores are ingested, not computed");
}

inline ScoreTable score_corpus(const Corpus& corpus, std::span<const ScorerKind> kinds,
                               const TokenizerConfig& cfg = {}, unsigned threads = 1) {
  for (ScorerKind k : kinds)
    if (k == ScorerKind::ExternalNll)
      throw Error(ErrorCode::NotComputable, "nll scores are ingested, not computed");

  auto view = corpus.sorted_view();
  std::vector<std::string> ids;
  ids.reserve(view.size());
  for (const PairRecord* r : view) ids.push_back(r->id);
  ScoreTable table = ScoreTable::from_ids(std::move(ids));

  std::vector<ScorerKind> unique_kinds(kinds.begin(), kinds.end());
  std::sort(unique_kinds.begin(), unique_kinds.end());
  unique_kinds.erase(std::unique(unique_kinds.begin(), unique_kinds.end()), unique_kinds.end());

  std::vector<std::vector<Score>> cols(unique_kinds.size(), std::vector<Score>(view.size()));
  parallel_for(view.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t k = 0; k < unique_kinds.size(); ++k)
        cols[k][i] = ratio_score(*view[i], unique_kinds[k], cfg);
  });
  for (std::size_t k = 0; k < unique_kinds.size(); ++k)
    table.set_column(unique_kinds[k], std::move(cols[k]));
  return table;
}

// ---------------------------------------------------------------------------
// Score TSV: header "id\t<scorer>...", cells are decimal reals or INVALID.
// Columns not named after a canonical scorer are ignored.

struct ScoreFile {
  std::vector<std::string> ids;  // file order
  std::vector<ScorerKind> kinds;
  std::vector<std::vector<Score>> columns;  // parallel to kinds
};

namespace detail {

inline Score parse_score_cell(std::string_view cell, std::size_t line) {
  if (cell == kInvalidCell) return std::nullopt;
  auto v = parse_real(cell);
  if (!v) throw Error(ErrorCode::BadScore, "bad score '" + std::string(cell) + "'", line);
  return v;
}

}  // namespace detail

inline ScoreFile parse_score_file(std::istream& in) {
  ScoreFile file;
  std::string line;
  if (!detail::getline_lf(in, line)) throw Error(ErrorCode::BadHeader, "empty score file", 1);
  auto header = detail::split_tabs(line);
  if (header.empty() || header[0] != "id")
    throw Error(ErrorCode::BadHeader, "score file must start with an 'id' column", 1);

  std::vector<std::pair<std::size_t, ScorerKind>> wanted;  // (cell index, kind)
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (auto k = scorer_from_name(header[c])) {
      for (const auto& w : wanted)
        if (w.second == *k) throw Error(ErrorCode::BadHeader, "repeated column", 1);
      wanted.emplace_back(c, *k);
      file.kinds.push_back(*k);
    }
  }
  if (wanted.empty()) throw Error(ErrorCode::BadHeader, "no scorer column in header", 1);
  file.columns.resize(wanted.size());

  std::unordered_map<std::string, std::size_t> seen;
  std::size_t lineno = 1;
  while (detail::getline_lf(in, line)) {
    ++lineno;
    auto cells = detail::split_tabs(line);
    if (cells.size() != header.size() || cells[0].empty())
      throw Error(ErrorCode::MalformedScoreRow,
                  "expected " + std::to_string(header.size()) + " columns", lineno);
    std::string id(cells[0]);
    if (!seen.emplace(id, lineno).second)
      throw Error(ErrorCode::DuplicateScore, "", lineno, id);
    for (std::size_t w = 0; w < wanted.size(); ++w)
      file.columns[w].push_back(detail::parse_score_cell(cells[wanted[w].first], lineno));
    file.ids.push_back(std::move(id));
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure");
  return file;
}

inline ScoreTable read_score_table(std::istream& in) {
  ScoreFile file = parse_score_file(in);
  std::vector<std::size_t> order(file.ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return file.ids[a] < file.ids[b]; });
  std::vector<std::string> ids;
  ids.reserve(order.size());
  for (std::size_t i : order) ids.push_back(file.ids[i]);
  ScoreTable table = ScoreTable::from_ids(std::move(ids));
  for (std::size_t w = 0; w < file.kinds.size(); ++w) {
    std::vector<Score> col;
    col.reserve(order.size());
    for (std::size_t i : order) col.push_back(file.columns[w][i]);
    table.set_column(file.kinds[w], std::move(col));
  }
  return table;
}

inline std::size_t write_score_table(const ScoreTable& table, std::ostream& out) {
  auto kinds = table.kinds();
  std::vector<std::span<const Score>> cols;
  out << "id";
  for (ScorerKind k : kinds) {
    out << '\t' << scorer_name(k);
    cols.push_back(table.column(k));
  }
  out << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.ids()[i];
    for (const auto& col : cols) out << '\t' << format_score(col[i]);
    out << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failure");
  return table.size();
}

struct IngestResult {
  ScoreTable table;
  std::vector<ScorerKind> ingested;
  std::vector<std::string> unknown_ids;  // in the file, not in the table; sorted
  std::size_t missing = 0;               // table rows the file did not cover
};

// Merges externally produced score columns (normally "nll") into a table by id.
inline IngestResult ingest_external_scores(const ScoreTable& table, std::istream& in,
                                           const std::string& source_name = "external") {
  ScoreFile file = parse_score_file(in);
  IngestResult result{table, file.kinds, {}, 0};

  std::vector<std::optional<std::size_t>> row_of(file.ids.size());
  for (std::size_t i = 0; i < file.ids.size(); ++i) {
    row_of[i] = table.index_of(file.ids[i]);
    if (!row_of[i]) result.unknown_ids.push_back(file.ids[i]);
  }
  std::sort(result.unknown_ids.begin(), result.unknown_ids.end());

  std::vector<bool> covered(table.size(), false);
  for (const auto& r : row_of)
    if (r) covered[*r] = true;
  result.missing = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), false));

  for (std::size_t w = 0; w < file.kinds.size(); ++w) {
    std::vector<Score> col(table.size(), std::nullopt);
    for (std::size_t i = 0; i < file.ids.size(); ++i)
      if (row_of[i]) col[*row_of[i]] = file.columns[w][i];
    result.table.set_column(file.kinds[w], std::move(col), "ingested from " + source_name);
  }
  return result;
}

}  // namespace stfilter

#endif  // STFILTER_SCORING_HPP
