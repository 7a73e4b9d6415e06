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

#ifndef STFILTER_REPORT_HPP
#define STFILTER_REPORT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stfilter/error.hpp"
#include "stfilter/filtering.hpp"
#include "stfilter/manifest.hpp"
#include "stfilter/scoring.hpp"

namespace stfilter {

inline constexpr std::string_view kReportHeader = "label\tspec\tn_pairs\toverlap_pct";
inline constexpr std::size_t kHistogramBins = 50;
inline constexpr double kHistogramCap = 5.0;

struct LabeledSubset {
  std::string label;
  Subset subset;
};

struct ReportRow {
  std::string label;
  std::string spec;
  std::size_t size = 0;
  std::optional<double> overlap;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

// Equal-width bins over [0, upper] with upper = min(max z, 5); larger z
// values land in the overflow bin.
struct ZHistogram {
  double upper = 0.0;
  std::array<std::size_t, kHistogramBins> bins{};
  std::size_t overflow = 0;

  std::size_t total() const {
    std::size_t t = overflow;
    for (auto b : bins) t += b;
    return t;
  }
};

struct ScorerSummary {
  ScorerKind scorer;
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
  std::optional<CorpusStats> stats;  // absent when no cell is valid
  ZHistogram histogram;
};

struct FilterReport {
  std::vector<ReportRow> rows;
  std::optional<std::string> reference_label;
  std::size_t corpus_size = 0;
  std::vector<ScorerSummary> scorers;
};

inline ZHistogram z_histogram(std::span<const Score> col, const CorpusStats& stats) {
  ZHistogram h;
  std::vector<double> zs;
  zs.reserve(stats.n_valid);
  for (const auto& s : col)
    if (s) zs.push_back(z_score(*s, stats));
  double max_z = zs.empty() ? 0.0 : *std::max_element(zs.begin(), zs.end());
  h.upper = std::min(max_z, kHistogramCap);
  const double width = h.upper / static_cast<double>(kHistogramBins);
  for (double z : zs) {
    if (z > h.upper) {
      ++h.overflow;
    } else if (width == 0.0) {
      ++h.bins[0];
    } else {
      auto idx = static_cast<std::size_t>(z / width);
      ++h.bins[std::min(idx, kHistogramBins - 1)];
    }
  }
  return h;
}

inline FilterReport build_report(const Corpus& corpus, const ScoreTable& table,
                                 const std::vector<LabeledSubset>& subsets,
                                 const std::optional<LabeledSubset>& reference = std::nullopt) {
  FilterReport rep;
  rep.corpus_size = corpus.size();
  if (reference) rep.reference_label = reference->label;

  CorpusIndex index(corpus);
  auto check_drawn = [&](const LabeledSubset& ls) {
    if (ls.subset.source_size && *ls.subset.source_size != corpus.size())
      throw Error(ErrorCode::SubsetMismatch, "subset '" + ls.label + "' comes from another corpus");
    for (const auto& id : ls.subset.ids)
      if (!index.find(id)) throw Error(ErrorCode::MissingRecord, "in subset '" + ls.label + "'", std::nullopt, id);
  };
  if (reference) check_drawn(*reference);

  for (const auto& ls : subsets) {
    check_drawn(ls);
    ReportRow row{ls.label, ls.subset.describe(), ls.subset.size(), std::nullopt};
    if (reference) row.overlap = overlap_pct(ls.subset, reference->subset);
    rep.rows.push_back(std::move(row));
  }

  for (ScorerKind k : table.kinds()) {
    ScorerSummary sum;
    sum.scorer = k;
    auto col = table.column(k);
    sum.n_valid = static_cast<std::size_t>(
        std::count_if(col.begin(), col.end(), [](const Score& s) { return s.has_value(); }));
    sum.n_invalid = col.size() - sum.n_valid;
    if (sum.n_valid > 0) {
      sum.stats = compute_stats(table, k);
      sum.histogram = z_histogram(col, *sum.stats);
    }
    rep.scorers.push_back(sum);
  }
  return rep;
}

enum class ReportFormat { Tsv, Markdown };

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string general6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string overlap_cell(const std::optional<double>& v) { return v ? fixed2(*v) : "N/A"; }

}  // namespace detail

inline void render_report(const FilterReport& rep, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::Tsv) {
    out << kReportHeader << '\n';
    for (const auto& r : rep.rows)
      out << r.label << '\t' << r.spec << '\t' << r.size << '\t' << detail::overlap_cell(r.overlap) << '\n';
  } else {
    out << "| label | spec | n_pairs | overlap_pct |\n";
    out << "|---|---|---:|---:|\n";
    for (const auto& r : rep.rows)
      out << "| " << r.label << " | `" << r.spec << "` | " << r.size << " | "
          << detail::overlap_cell(r.overlap) << " |\n";
    if (!rep.scorers.empty()) {
      out << "\nCorpus size: " << rep.corpus_size;
      if (rep.reference_label) out << ", overlap reference: " << *rep.reference_label;
      out << "\n\n| scorer | n_valid | n_invalid | mean | std | z histogram (0.." << kHistogramCap
          << ", overflow) |\n";
      out << "|---|---:|---:|---:|---:|---|\n";
      for (const auto& s : rep.scorers) {
        out << "| " << scorer_name(s.scorer) << " | " << s.n_valid << " | " << s.n_invalid << " | ";
        if (s.stats) {
          out << detail::general6(s.stats->mean) << " | " << detail::general6(s.stats->stddev) << " | ";
          for (std::size_t b = 0; b < kHistogramBins; ++b) out << s.histogram.bins[b] << ' ';
          out << "+" << s.histogram.overflow;
        } else {
          out << "N/A | N/A | ";
        }
        out << " |\n";
      }
    }
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failure");
}

inline std::vector<ReportRow> parse_report_tsv(std::istream& in) {
  std::string line;
  if (!detail::getline_lf(in, line) || line != kReportHeader)
    throw Error(ErrorCode::BadHeader, "unexpected report header", 1);
  std::vector<ReportRow> rows;
  std::size_t lineno = 1;
  while (detail::getline_lf(in, line)) {
    ++lineno;
    auto cells = detail::split_tabs(line);
    if (cells.size() != 4) throw Error(ErrorCode::MalformedRow, "expected 4 columns", lineno);
    ReportRow r{std::string(cells[0]), std::string(cells[1]), 0, std::nullopt};
    auto n = detail::parse_real(cells[2]);
    if (!n || *n < 0 || std::floor(*n) != *n) throw Error(ErrorCode::MalformedRow, "bad n_pairs", lineno);
    r.size = static_cast<std::size_t>(*n);
    if (cells[3] != "N/A") {
      auto v = detail::parse_real(cells[3]);
      if (!v) throw Error(ErrorCode::MalformedRow, "bad overlap", lineno);
      r.overlap = v;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace stfilter

#endif  // STFILTER_REPORT_HPP
