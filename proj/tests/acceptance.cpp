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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <functional>
#include <sstream>

#include "stfilter/cli.hpp"
#include "stfilter/stfilter.hpp"
#include "test_util.hpp"

namespace {

using namespace stfilter;
using testing::is_subset_of;
using testing::naive_stats;
using testing::naive_z_members;
using testing::random_corpus;
using testing::random_table;
using testing::slurp;
using testing::TempDir;

constexpr double kPercentileSeconds = 30.0;
constexpr double kSynthSeconds = 60.0;
constexpr double kStatsRelTol = 1e-9;
constexpr double kJitterPrecisionFactor = 2.0;

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void check(const char* name, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    report(name, ok, detail);
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cli(std::vector<std::string> args) {
  std::istringstream in;
  std::ostringstream out, err;
  int code = cli::run(std::move(args), in, out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

std::pair<bool, std::string> percentile_counts() {
  constexpr std::size_t kValid = 1403985;
  constexpr std::size_t kInvalid = 1015;
  const double ps[] = {0.2, 0.4, 0.6, 0.8};
  const std::size_t expected[] = {280797, 561594, 842391, 1123188};

  std::mt19937_64 rng(20261014);
  std::vector<std::string> ids(kValid + kInvalid);
  char buf[32];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::snprintf(buf, sizeof buf, "u%08zu", i);
    ids[i] = buf;
  }
  ScoreTable table = ScoreTable::from_ids(ids);
  std::vector<Score> col(ids.size());
  std::normal_distribution<double> nll(3.0, 0.8);
  for (auto& c : col) c = nll(rng);
  for (std::size_t i = 0; i < kInvalid; ++i) col[(i * 1381) % col.size()] = std::nullopt;
  // Ties in the tail exercise the deterministic tie-break.
  for (std::size_t i = 0; i < 5000; ++i)
    if (col[i * 7]) col[i * 7] = 2.5;
  table.set_column(ScorerKind::ExternalNll, col, "synthetic");
  std::size_t valid = 0;
  for (const auto& c : table.column(ScorerKind::ExternalNll)) valid += c.has_value();
  if (valid != kValid) return {false, "fixture has " + std::to_string(valid) + " valid rows"};

  std::ostringstream detail;
  bool ok = true;
  auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < 4; ++k) {
    std::size_t got = filter_by_percentile(table, ScorerKind::ExternalNll, ps[k]).size();
    ok = ok && got == expected[k];
    detail << "p=" << ps[k] << "->" << got << " ";
  }
  double lib_s = seconds_since(t0);

  // Same cut through the command line, including score-file IO.
  TempDir dir("accept_pct");
  {
    std::ofstream f(dir / "s.tsv", std::ios::binary);
    write_score_table(table, f);
  }
  t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < 4; ++k) {
    auto out = (dir / ("p" + std::to_string(k) + ".txt")).string();
    std::ostringstream spec;
    spec << "pct:nll:" << ps[k];
    if (cli({"filter", (dir / "s.tsv").string(), "--spec", spec.str(), "-o", out}) != 0) return {false, "cli failed"};
    std::ifstream f(out);
    std::size_t lines = 0;
    for (std::string l; std::getline(f, l);) ++lines;
    ok = ok && lines == expected[k];
  }
  double cli_s = seconds_since(t0);
  ok = ok && lib_s < kPercentileSeconds && cli_s < kPercentileSeconds;
  char tbuf[96];
  std::snprintf(tbuf, sizeof tbuf, "library %.2fs, cli %.2fs (limit %.0fs)", lib_s, cli_s, kPercentileSeconds);
  detail << tbuf;
  return {ok, detail.str()};
}

std::pair<bool, std::string> z_nesting() {
  std::mt19937_64 rng(101);
  const double taus[] = {0.25, 0.5, 0.75, 1.0};
  std::size_t violations = 0;
  for (int t = 0; t < 100; ++t) {
    ScoreTable table = random_table(rng, 1000, ScorerKind::TextText, 0.05);
    std::vector<Subset> s;
    for (double tau : taus) s.push_back(filter_by_z(table, ScorerKind::TextText, tau));
    for (std::size_t k = 0; k + 1 < s.size(); ++k)
      for (const auto& id : s[k].ids) violations += !s[k + 1].contains(id);
  }
  return {violations == 0, std::to_string(violations) + " violations over 100 tables"};
}

std::pair<bool, std::string> oracle_equivalence() {
  std::mt19937_64 rng(202);
  double worst = 0;
  std::size_t mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    ScoreTable table = random_table(rng, 1000, ScorerKind::SpeechText, 0.03);
    CorpusStats st = compute_stats(table, ScorerKind::SpeechText, 4);
    auto ref = naive_stats(testing::valid_values(table.column(ScorerKind::SpeechText)));
    worst = std::max({worst, std::fabs(st.mean - ref.mean) / std::fabs(ref.mean),
                      std::fabs(st.stddev - ref.stddev) / ref.stddev});
    for (double tau : {0.3, 0.8, 1.5}) {
      auto want = naive_z_members(table, ScorerKind::SpeechText, tau);
      if (filter_by_z(table, ScorerKind::SpeechText, tau, 4).ids != want) ++mismatches;
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "max rel err %.3g (tol %.0e), %zu membership mismatches", worst, kStatsRelTol,
                mismatches);
  return {worst <= kStatsRelTol && mismatches == 0, buf};
}

std::pair<bool, std::string> shift_scale() {
  std::mt19937_64 rng(303);
  std::size_t changed = 0;
  for (int t = 0; t < 50; ++t) {
    ScoreTable table = random_table(rng, 1000, ScorerKind::TextSpeech, 0.02);
    const auto& col = table.column(ScorerKind::TextSpeech);
    std::vector<Score> moved(col.size());
    for (std::size_t i = 0; i < col.size(); ++i)
      if (col[i]) moved[i] = 3.0 * *col[i] + 7.0;
    ScoreTable other = table;
    other.set_column(ScorerKind::TextSpeech, moved, "affine");
    for (double tau : {0.25, 0.5, 1.0, 2.0})
      changed += filter_by_z(table, ScorerKind::TextSpeech, tau).ids !=
                 filter_by_z(other, ScorerKind::TextSpeech, tau).ids;
  }
  return {changed == 0, std::to_string(changed) + " of 200 filters changed membership"};
}

std::pair<bool, std::string> set_algebra() {
  std::mt19937_64 rng(404);
  std::size_t bad = 0;
  for (int t = 0; t < 200; ++t) {
    ScoreTable table = random_table(rng, 500, ScorerKind::TextText, 0.0);
    std::vector<Score> b(table.size());
    std::normal_distribution<double> nd(0, 1);
    for (auto& c : b) c = nd(rng);
    table.set_column(ScorerKind::ExternalNll, b, "random");
    std::uniform_real_distribution<double> tau(0.1, 2.0), p(0.05, 1.0);
    Subset A = filter_by_z(table, ScorerKind::TextText, tau(rng));
    Subset B = filter_by_percentile(table, ScorerKind::ExternalNll, p(rng));
    Subset U = unite(A, B), I = intersect(A, B);
    bad += U.size() != A.size() + B.size() - I.size();
    bad += unite(A, A).ids != A.ids || intersect(A, A).ids != A.ids;
    bad += unite(B, A).ids != U.ids || intersect(B, A).ids != I.ids;
    bad += !is_subset_of(I.ids, A.ids) || !is_subset_of(A.ids, U.ids);
    if (!A.empty()) bad += overlap_pct(A, A) != 100.0;
  }
  return {bad == 0, std::to_string(bad) + " identity violations over 200 pairs"};
}

std::pair<bool, std::string> determinism() {
  TempDir dir("accept_det");
  {
    std::ofstream m(dir / "m.tsv", std::ios::binary);
    std::mt19937_64 rng(505);
    write_manifest(random_corpus(rng, 100000), m);
  }
  const auto cwd = std::filesystem::current_path();
  // Each run works in its own directory with identical relative names, since
  // subset file paths appear in the report.
  auto pipeline = [&](const std::string& run, unsigned threads) {
    std::filesystem::create_directory(dir / run);
    std::filesystem::current_path(dir / run);
    std::string th = std::to_string(threads);
    bool ok = cli({"score", "../m.tsv", "-o", "s.tsv", "--threads", th}) == 0 &&
              cli({"filter", "s.tsv", "--spec", "intersect(z:text_text:1,z:speech_speech:1.5)", "-o", "z.txt",
                   "--threads", th}) == 0 &&
              cli({"filter", "s.tsv", "--spec", "pct:speech_text:0.4", "-o", "q.txt", "--threads", th}) == 0 &&
              cli({"report", "../m.tsv", "s.tsv", "--subset", "z=z.txt", "--subset", "q=q.txt", "--reference", "q",
                   "--format", "md", "-o", "r.md", "--threads", th}) == 0;
    std::filesystem::current_path(cwd);
    return ok;
  };
  if (!pipeline("a", 1) || !pipeline("b", 1) || !pipeline("c", 8)) return {false, "pipeline failed"};
  std::size_t diffs = 0;
  for (const char* name : {"s.tsv", "z.txt", "q.txt", "r.md"}) {
    std::string ra = slurp(dir / "a" / name);
    diffs += ra != slurp(dir / "b" / name);
    diffs += ra != slurp(dir / "c" / name);
  }
  return {diffs == 0, std::to_string(diffs) + " differing files of 8 comparisons (100000 records, threads 1/1/8)"};
}

std::pair<bool, std::string> manifest_round_trip() {
  std::mt19937_64 rng(606);
  std::size_t bad = 0;
  for (int t = 0; t < 1000; ++t) {
    Corpus c = random_corpus(rng, 1 + rng() % 40);
    std::ostringstream out;
    write_manifest(c, out);
    std::istringstream in(out.str());
    Corpus back = parse_manifest(in).corpus;
    bad += !back.same_records(c);
    std::ostringstream again;
    write_manifest(back, again);
    bad += again.str() != out.str();
  }

  Corpus good = random_corpus(rng, 2000);
  std::ostringstream text;
  text << kManifestHeader << '\n';
  std::size_t malformed = 0;
  std::ostringstream dummy;
  for (std::size_t i = 0; i < good.records.size(); ++i) {
    if (i % 20 == 7) {
      switch (malformed++ % 4) {
        case 0: text << "bad" << i << "\tonly\tthree\n"; break;
        case 1: text << "bad" << i << "\ta.wav\t-2\tx\tb.wav\t1\ty\n"; break;
        case 2: text << "bad" << i << "\ta.wav\tabc\tx\tb.wav\t1\ty\n"; break;
        default: text << "\ta.wav\t1\tx\tb.wav\t1\ty\n"; break;
      }
    }
    Corpus one;
    one.records.push_back(good.records[i]);
    std::ostringstream row;
    write_manifest(one, row);
    std::string s = row.str();
    text << s.substr(s.find('\n') + 1);
  }
  std::istringstream in(text.str());
  ParseOptions lenient;
  lenient.strict = false;
  ParseResult res = parse_manifest(in, lenient);
  bool recovered = res.corpus.same_records(good) && res.errors.size() == malformed;
  std::ostringstream d;
  d << bad << " round-trip failures over 1000 corpora; lenient parse kept " << res.corpus.size() << "/"
    << good.size() << " rows, flagged " << res.errors.size() << "/" << malformed << " malformed";
  return {bad == 0 && recovered, d.str()};
}

std::pair<bool, std::string> synthetic_benchmark() {
  auto t0 = std::chrono::steady_clock::now();
  Corpus clean = generate_clean(5000, 42);

  NoiseSpec empty_spec;
  empty_spec.empty_fraction = 0.2;
  empty_spec.seed = 43;
  LabeledCorpus e = inject_noise(clean, empty_spec);
  ScoreTable te = score_corpus(e.corpus, std::array{ScorerKind::TextText});
  FilterEval ee = evaluate_filter(filter_by_z(te, ScorerKind::TextText, 1.0), e, "tt_z1");

  NoiseSpec jitter_spec;
  jitter_spec.duration_jitter_fraction = 0.2;
  jitter_spec.seed = 44;
  LabeledCorpus j = inject_noise(clean, jitter_spec);
  ScoreTable tj = score_corpus(j.corpus, std::array{ScorerKind::SpeechSpeech});
  FilterEval je = evaluate_filter(filter_by_z(tj, ScorerKind::SpeechSpeech, 0.5), j, "ss_z05");
  double seconds = seconds_since(t0);

  double precision = je.precision.value_or(0.0);
  double floor = kJitterPrecisionFactor * je.prevalence;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "empty: %zu/%zu rejected; jitter: precision %.4f vs required %.4f (prevalence %.4f); %.2fs "
                "(limit %.0fs)",
                ee.true_pos, ee.true_pos + ee.false_neg, precision, floor, je.prevalence, seconds,
                kSynthSeconds);
  bool ok = ee.true_pos == 1000 && ee.false_neg == 0 && precision >= floor && seconds < kSynthSeconds;
  return {ok, buf};
}

}  // namespace

int main() {
  check("percentile-counts", percentile_counts);
  check("z-nesting", z_nesting);
  check("oracle-equivalence", oracle_equivalence);
  check("shift-scale-invariance", shift_scale);
  check("set-algebra", set_algebra);
  check("determinism", determinism);
  check("manifest-round-trip", manifest_round_trip);
  check("synthetic-benchmark", synthetic_benchmark);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
