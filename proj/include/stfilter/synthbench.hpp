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

#ifndef STFILTER_SYNTHBENCH_HPP
#define STFILTER_SYNTHBENCH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stfilter/error.hpp"
#include "stfilter/filtering.hpp"
#include "stfilter/manifest.hpp"

namespace stfilter {

enum class NoiseLabel { Clean, Swap, Truncate, Jitter, Empty };

inline constexpr std::string_view label_name(NoiseLabel l) {
  switch (l) {
    case NoiseLabel::Clean: return "clean";
    case NoiseLabel::Swap: return "swap";
    case NoiseLabel::Truncate: return "truncate";
    case NoiseLabel::Jitter: return "jitter";
    case NoiseLabel::Empty: return "empty";
  }
  return "";
}

inline std::optional<NoiseLabel> label_from_name(std::string_view name) {
  for (auto l : {NoiseLabel::Clean, NoiseLabel::Swap, NoiseLabel::Truncate, NoiseLabel::Jitter,
                 NoiseLabel::Empty})
    if (label_name(l) == name) return l;
  return std::nullopt;
}

using LabelMap = std::map<std::string, NoiseLabel>;

struct NoiseSpec {
  double swap_fraction = 0.0;
  double truncate_fraction = 0.0;
  double duration_jitter_fraction = 0.0;
  double empty_fraction = 0.0;
  std::uint64_t seed = 0;
};

struct LabeledCorpus {
  Corpus corpus;
  LabelMap labels;
};

// Clean generator parameters. Source length is uniform on [3, 15] tokens; the
// target/source token factor is log-triangular on [0.8, 1.25] with mode 1; one
// speaking rate in [0.3, 0.5] s/token per record drives both durations.
struct CleanGeneratorParams {
  int min_src_tokens = 3;
  int max_src_tokens = 15;
  double min_factor = 0.8;
  double max_factor = 1.25;
  double min_rate = 0.3;
  double max_rate = 0.5;
  int min_word_chars = 2;
  int max_word_chars = 8;
};

namespace detail {

inline std::string synth_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth%09zu", i);
  return buf;
}

inline std::string random_sentence(std::mt19937_64& rng, int tokens, const CleanGeneratorParams& p) {
  std::uniform_int_distribution<int> len(p.min_word_chars, p.max_word_chars);
  std::uniform_int_distribution<int> letter(0, 25);
  std::string out;
  for (int t = 0; t < tokens; ++t) {
    if (t) out += ' ';
    int n = len(rng);
    for (int c = 0; c < n; ++c) out += static_cast<char>('a' + letter(rng));
  }
  return out;
}

inline std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

}  // namespace detail

inline Corpus generate_clean(std::size_t n, std::uint64_t seed, const CleanGeneratorParams& p = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> src_len(p.min_src_tokens, p.max_src_tokens);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> rate(p.min_rate, p.max_rate);
  const double log_lo = std::log(p.min_factor);
  const double log_hi = std::log(p.max_factor);

  Corpus c;
  c.source_label = "src";
  c.target_label = "tgt";
  c.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    int src_tokens = src_len(rng);
    // Sum of two uniforms: triangular on [log_lo, log_hi].
    double t = 0.5 * (unit(rng) + unit(rng));
    double factor = std::exp(log_lo + t * (log_hi - log_lo));
    int tgt_tokens = std::max(1, static_cast<int>(std::lround(src_tokens * factor)));
    double r = rate(rng);

    PairRecord rec;
    rec.id = detail::synth_id(i);
    rec.src_audio_path = "audio/src/" + rec.id + ".wav";
    rec.tgt_audio_path = "audio/tgt/" + rec.id + ".wav";
    rec.src_duration = Duration::from_seconds(src_tokens * r);
    rec.tgt_duration = Duration::from_seconds(tgt_tokens * r);
    rec.src_text = detail::random_sentence(rng, src_tokens, p);
    rec.tgt_text = detail::random_sentence(rng, tgt_tokens, p);
    c.records.push_back(std::move(rec));
  }
  return c;
}

inline void validate_noise_spec(const NoiseSpec& s) {
  for (double f : {s.swap_fraction, s.truncate_fraction, s.duration_jitter_fraction, s.empty_fraction})
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorCode::InvalidNoiseSpec, "fractions must lie in [0, 1]");
  double total = s.swap_fraction + s.truncate_fraction + s.duration_jitter_fraction + s.empty_fraction;
  if (total > 1.0 + 1e-12) throw Error(ErrorCode::InvalidNoiseSpec, "fractions sum above 1");
}

// Each record receives at most one corruption. Records are visited in id order
// and assigned from a seeded shuffle, so the result depends only on the corpus
// contents and the spec.
inline LabeledCorpus inject_noise(const Corpus& corpus, const NoiseSpec& spec) {
  validate_noise_spec(spec);
  const std::size_t n = corpus.size();
  if (spec.swap_fraction > 0.0 && n < 2)
    throw Error(ErrorCode::InsufficientRecords, "swap noise needs at least two records");

  LabeledCorpus out;
  out.corpus.source_label = corpus.source_label;
  out.corpus.target_label = corpus.target_label;
  for (const PairRecord* r : corpus.sorted_view()) out.corpus.records.push_back(*r);
  if (out.corpus.records.size() > 1) {
    auto dup = std::adjacent_find(out.corpus.records.begin(), out.corpus.records.end(),
                                  [](const PairRecord& a, const PairRecord& b) { return a.id == b.id; });
    if (dup != out.corpus.records.end()) throw Error(ErrorCode::DuplicateId, "", std::nullopt, dup->id);
  }
  auto& recs = out.corpus.records;

  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);

  std::size_t remaining = n;
  auto take = [&](double fraction) {
    auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    k = std::min(k, remaining);
    remaining -= k;
    return k;
  };
  std::size_t n_swap = take(spec.swap_fraction);
  if (n_swap % 2) {
    --n_swap;
    ++remaining;
  }
  std::size_t n_trunc = take(spec.truncate_fraction);
  std::size_t n_jitter = take(spec.duration_jitter_fraction);
  std::size_t n_empty = take(spec.empty_fraction);

  std::vector<NoiseLabel> labels(n, NoiseLabel::Clean);
  std::size_t pos = 0;
  for (; pos + 1 < n_swap; pos += 2) {
    auto& a = recs[perm[pos]];
    auto& b = recs[perm[pos + 1]];
    std::swap(a.tgt_text, b.tgt_text);
    std::swap(a.tgt_duration, b.tgt_duration);
    std::swap(a.tgt_audio_path, b.tgt_audio_path);
    labels[perm[pos]] = labels[perm[pos + 1]] = NoiseLabel::Swap;
  }
  for (std::size_t end = pos + n_trunc; pos < end; ++pos) {
    auto& r = recs[perm[pos]];
    auto words = detail::split_words(r.tgt_text);
    std::size_t keep = 0;
    if (words.size() >= 2) keep = std::uniform_int_distribution<std::size_t>(1, words.size() - 1)(rng);
    std::string prefix;
    for (std::size_t w = 0; w < keep; ++w) {
      if (w) prefix += ' ';
      prefix += words[w];
    }
    r.tgt_text = std::move(prefix);
    labels[perm[pos]] = NoiseLabel::Truncate;
  }
  std::uniform_real_distribution<double> stretch(2.0, 4.0);
  for (std::size_t end = pos + n_jitter; pos < end; ++pos) {
    auto& r = recs[perm[pos]];
    r.tgt_duration = Duration::from_seconds(r.tgt_duration.seconds() * stretch(rng));
    labels[perm[pos]] = NoiseLabel::Jitter;
  }
  for (std::size_t end = pos + n_empty; pos < end; ++pos) {
    recs[perm[pos]].tgt_text.clear();
    labels[perm[pos]] = NoiseLabel::Empty;
  }

  for (std::size_t i = 0; i < n; ++i) out.labels.emplace(recs[i].id, labels[i]);
  return out;
}

struct KindCounts {
  std::size_t total = 0;
  std::size_t rejected = 0;
};

// Scores the "reject noisy" decision, where rejected means absent from the
// subset. Ratios with a zero denominator are left empty.
struct FilterEval {
  std::string label;
  std::size_t true_pos = 0;   // noisy, rejected
  std::size_t false_pos = 0;  // clean, rejected
  std::size_t false_neg = 0;  // noisy, kept
  std::size_t true_neg = 0;   // clean, kept
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  double prevalence = 0.0;
  std::map<NoiseLabel, KindCounts> by_kind;

  std::optional<double> recall_for(NoiseLabel kind) const {
    auto it = by_kind.find(kind);
    if (it == by_kind.end() || it->second.total == 0) return std::nullopt;
    return static_cast<double>(it->second.rejected) / static_cast<double>(it->second.total);
  }
};

inline FilterEval evaluate_filter(const Subset& subset, const LabelMap& labels, std::string label = {}) {
  for (const auto& id : subset.ids)
    if (!labels.contains(id))
      throw Error(ErrorCode::SubsetMismatch, "subset id not in labeled corpus", std::nullopt, id);

  FilterEval ev;
  ev.label = label.empty() ? subset.describe() : std::move(label);
  std::size_t noisy = 0;
  for (const auto& [id, l] : labels) {
    bool rejected = !subset.contains(id);
    bool is_noisy = l != NoiseLabel::Clean;
    noisy += is_noisy;
    auto& kc = ev.by_kind[l];
    ++kc.total;
    kc.rejected += rejected;
    if (is_noisy && rejected) ++ev.true_pos;
    else if (!is_noisy && rejected) ++ev.false_pos;
    else if (is_noisy) ++ev.false_neg;
    else ++ev.true_neg;
  }
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  ev.precision = ratio(ev.true_pos, ev.true_pos + ev.false_pos);
  ev.recall = ratio(ev.true_pos, ev.true_pos + ev.false_neg);
  if (ev.precision && ev.recall && (*ev.precision + *ev.recall) > 0.0)
    ev.f1 = 2.0 * *ev.precision * *ev.recall / (*ev.precision + *ev.recall);
  ev.prevalence = labels.empty() ? 0.0 : static_cast<double>(noisy) / static_cast<double>(labels.size());
  return ev;
}

inline FilterEval evaluate_filter(const Subset& subset, const LabeledCorpus& labeled, std::string label = {}) {
  return evaluate_filter(subset, labeled.labels, std::move(label));
}

// Labels file: "id\tlabel" header, rows ascending by id.
inline void write_labels(const LabelMap& labels, std::ostream& out) {
  out << "id\tlabel\n";
  for (const auto& [id, l] : labels) out << id << '\t' << label_name(l) << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failure");
}

inline LabelMap read_labels(std::istream& in) {
  std::string line;
  if (!detail::getline_lf(in, line) || line != "id\tlabel")
    throw Error(ErrorCode::BadHeader, "unexpected labels header", 1);
  LabelMap labels;
  std::size_t lineno = 1;
  while (detail::getline_lf(in, line)) {
    ++lineno;
    auto cells = detail::split_tabs(line);
    if (cells.size() != 2 || cells[0].empty()) throw Error(ErrorCode::MalformedLabel, "expected 2 columns", lineno);
    auto l = label_from_name(cells[1]);
    if (!l) throw Error(ErrorCode::MalformedLabel, "unknown label '" + std::string(cells[1]) + "'", lineno);
    if (!labels.emplace(std::string(cells[0]), *l).second)
      throw Error(ErrorCode::DuplicateId, "", lineno, std::string(cells[0]));
  }
  return labels;
}

inline std::string format_optional(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

inline void write_eval(const std::vector<FilterEval>& evals, std::ostream& out) {
  out << "label\ttp\tfp\tfn\ttn\tprecision\trecall\tf1\tprevalence\n";
  for (const auto& e : evals)
    out << e.label << '\t' << e.true_pos << '\t' << e.false_pos << '\t' << e.false_neg << '\t'
        << e.true_neg << '\t' << format_optional(e.precision) << '\t' << format_optional(e.recall) << '\t'
        << format_optional(e.f1) << '\t' << format_optional(e.prevalence) << '\n';
}

}  // namespace stfilter

#endif  // STFILTER_SYNTHBENCH_HPP
