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

#ifndef STFILTER_FILTERING_HPP
#define STFILTER_FILTERING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <iterator>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "stfilter/error.hpp"
#include "stfilter/manifest.hpp"
#include "stfilter/parallel.hpp"
#include "stfilter/scoring.hpp"
#include "stfilter/subset_spec.hpp"

namespace stfilter {

// Population mean and standard deviation over the valid cells of one column.
struct CorpusStats {
  ScorerKind scorer = ScorerKind::TextText;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
};

namespace detail {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Reductions run over fixed-size blocks combined in block order, so the
// result does not depend on the worker count.
inline constexpr std::size_t kReduceBlock = 1 << 16;

template <typename Term>
double blocked_sum(std::size_t n, unsigned threads, Term term) {
  std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
  parallel_for(blocks, threads, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      CompensatedSum s;
      std::size_t end = std::min(n, (b + 1) * kReduceBlock);
      for (std::size_t i = b * kReduceBlock; i < end; ++i)
        if (auto v = term(i)) s.add(*v);
      partial[b] = s.value();
    }
  });
  CompensatedSum total;
  for (double p : partial) total.add(p);
  return total.value();
}

}  // namespace detail

inline CorpusStats compute_stats(const ScoreTable& table, ScorerKind scorer, unsigned threads = 1) {
  auto col = table.column(scorer);
  CorpusStats st;
  st.scorer = scorer;
  auto first = std::find_if(col.begin(), col.end(), [](const Score& s) { return s.has_value(); });
  if (first == col.end())
    throw Error(ErrorCode::NoValidScores, "column '" + std::string(scorer_name(scorer)) + "'");
  st.n_valid = static_cast<std::size_t>(
      std::count_if(col.begin(), col.end(), [](const Score& s) { return s.has_value(); }));
  st.n_invalid = col.size() - st.n_valid;
  const double n = static_cast<double>(st.n_valid);

  // Shifting by the first valid value keeps a constant column exact.
  const double shift = **first;
  double shifted = detail::blocked_sum(col.size(), threads, [&](std::size_t i) -> std::optional<double> {
    if (!col[i]) return std::nullopt;
    return *col[i] - shift;
  });
  st.mean = shift + shifted / n;
  const double mean = st.mean;
  double sq = detail::blocked_sum(col.size(), threads, [&](std::size_t i) -> std::optional<double> {
    if (!col[i]) return std::nullopt;
    double d = *col[i] - mean;
    return d * d;
  });
  st.stddev = std::sqrt(sq / n);
  return st;
}

// |x - mean| / std. A zero std gives 0 at the mean and +inf elsewhere.
inline double z_score(double x, const CorpusStats& stats) {
  if (stats.stddev == 0.0)
    return x == stats.mean ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs((x - stats.mean) / stats.stddev);
}

// Number of rows a percentile cut keeps: floor(p * n). The product is nudged
// by 1e-15 relative so decimal p such as 0.6 (stored just below 0.6) counts
// as the decimal value.
inline std::size_t percentile_count(double p, std::size_t n) {
  long double prod = static_cast<long double>(p) * static_cast<long double>(n);
  prod += prod * 1e-15L;
  auto k = static_cast<std::size_t>(std::floor(prod));
  return std::min(k, n);
}

// Sorted set of pair ids drawn from one corpus.
struct Subset {
  std::vector<std::string> ids;
  SubsetSpec::Ptr spec;                    // null for subsets loaded from a file
  std::string origin;                      // description used when spec is null
  std::optional<std::size_t> source_size;  // unknown for subsets loaded from a file

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
  bool contains(const std::string& id) const {
    return std::binary_search(ids.begin(), ids.end(), id);
  }
  std::string describe() const { return spec ? spec->to_string() : origin; }
};

inline Subset filter_by_z(const ScoreTable& table, ScorerKind scorer, double tau, unsigned threads = 1) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidSpec, "z threshold must be positive");
  CorpusStats stats = compute_stats(table, scorer, threads);
  auto col = table.column(scorer);
  std::vector<char> keep(col.size(), 0);
  parallel_for(col.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      keep[i] = col[i].has_value() && z_score(*col[i], stats) <= tau;
  });
  Subset out;
  out.spec = SubsetSpec::z(scorer, tau);
  out.source_size = table.size();
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i]) out.ids.push_back(table.ids()[i]);
  return out;
}

// First floor(p * n_valid) valid rows in ascending (score, id) order.
inline Subset filter_by_percentile(const ScoreTable& table, ScorerKind scorer, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidSpec, "percentile must lie in (0, 1]");
  auto col = table.column(scorer);
  std::vector<std::size_t> valid;
  valid.reserve(col.size());
  for (std::size_t i = 0; i < col.size(); ++i)
    if (col[i]) valid.push_back(i);
  if (valid.empty())
    throw Error(ErrorCode::NoValidScores, "column '" + std::string(scorer_name(scorer)) + "'");

  std::size_t k = percentile_count(p, valid.size());
  // Row index order equals id order, so (score, index) is the (score, id) order.
  auto less = [&](std::size_t a, std::size_t b) {
    if (*col[a] != *col[b]) return *col[a] < *col[b];
    return a < b;
  };
  if (k < valid.size())
    std::nth_element(valid.begin(), valid.begin() + static_cast<std::ptrdiff_t>(k), valid.end(), less);
  valid.resize(k);
  std::sort(valid.begin(), valid.end());

  Subset out;
  out.spec = SubsetSpec::pct(scorer, p);
  out.source_size = table.size();
  out.ids.reserve(k);
  for (std::size_t i : valid) out.ids.push_back(table.ids()[i]);
  return out;
}

namespace detail {

inline std::optional<std::size_t> common_source(const Subset& a, const Subset& b) {
  if (a.source_size && b.source_size && *a.source_size != *b.source_size)
    throw Error(ErrorCode::SubsetMismatch,
                "subsets drawn from corpora of size " + std::to_string(*a.source_size) + " and " +
                    std::to_string(*b.source_size));
  return a.source_size ? a.source_size : b.source_size;
}

template <typename Combine>
Subset combine(const Subset& a, const Subset& b, Combine op, bool is_union) {
  Subset out;
  out.source_size = common_source(a, b);
  op(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(), std::back_inserter(out.ids));
  if (a.spec && b.spec) {
    out.spec = is_union ? SubsetSpec::unite(a.spec, b.spec) : SubsetSpec::intersect(a.spec, b.spec);
  } else {
    out.origin = std::string(is_union ? "union(" : "intersect(") + a.describe() + "," + b.describe() + ")";
  }
  return out;
}

}  // namespace detail

inline Subset unite(const Subset& a, const Subset& b) {
  return detail::combine(
      a, b, [](auto... args) { std::set_union(args...); }, true);
}

inline Subset intersect(const Subset& a, const Subset& b) {
  return detail::combine(
      a, b, [](auto... args) { std::set_intersection(args...); }, false);
}

// Percentage of a's ids that are also in b.
inline double overlap_pct(const Subset& a, const Subset& b) {
  if (a.empty()) throw Error(ErrorCode::EmptySubset, "overlap of an empty subset");
  std::size_t shared = 0;
  auto ia = a.ids.begin();
  auto ib = b.ids.begin();
  while (ia != a.ids.end() && ib != b.ids.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return 100.0 * static_cast<double>(shared) / static_cast<double>(a.size());
}

inline Subset evaluate(const SubsetSpec& spec, const ScoreTable& table, unsigned threads = 1) {
  return std::visit(
      [&](const auto& n) -> Subset {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, SubsetSpec::ZThreshold>)
          return filter_by_z(table, n.scorer, n.tau, threads);
        else if constexpr (std::is_same_v<T, SubsetSpec::PercentileCut>)
          return filter_by_percentile(table, n.scorer, n.p);
        else if constexpr (std::is_same_v<T, SubsetSpec::Union>)
          return unite(evaluate(*n.left, table, threads), evaluate(*n.right, table, threads));
        else
          return intersect(evaluate(*n.left, table, threads), evaluate(*n.right, table, threads));
      },
      spec.node());
}

inline Corpus materialize(const Subset& subset, const Corpus& corpus) {
  CorpusIndex index(corpus);
  Corpus out;
  out.source_label = corpus.source_label;
  out.target_label = corpus.target_label;
  out.records.reserve(subset.size());
  for (const auto& id : subset.ids) {
    const PairRecord* rec = index.find(id);
    if (!rec) throw Error(ErrorCode::MissingRecord, "", std::nullopt, id);
    out.records.push_back(*rec);
  }
  return out;
}

// Subset file: one id per line, ascending, each line newline-terminated.
inline std::size_t write_subset(const Subset& subset, std::ostream& out) {
  for (const auto& id : subset.ids) out << id << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failure");
  return subset.size();
}

inline Subset read_subset(std::istream& in, std::string origin = "file") {
  Subset out;
  out.origin = std::move(origin);
  std::string line;
  std::size_t lineno = 0;
  while (detail::getline_lf(in, line)) {
    ++lineno;
    if (line.empty() || line.find('\t') != std::string::npos)
      throw Error(ErrorCode::MalformedRow, "bad subset id", lineno);
    out.ids.push_back(line);
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure");
  std::sort(out.ids.begin(), out.ids.end());
  auto dup = std::adjacent_find(out.ids.begin(), out.ids.end());
  if (dup != out.ids.end()) throw Error(ErrorCode::DuplicateId, "in subset file", std::nullopt, *dup);
  return out;
}

}  // namespace stfilter

#endif  // STFILTER_FILTERING_HPP
