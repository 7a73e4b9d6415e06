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

#ifndef STFILTER_CLI_HPP
#define STFILTER_CLI_HPP

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stfilter/error.hpp"
#include "stfilter/filtering.hpp"
#include "stfilter/manifest.hpp"
#include "stfilter/report.hpp"
#include "stfilter/scoring.hpp"
#include "stfilter/synthbench.hpp"
#include "stfilter/version.hpp"

namespace stfilter::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

namespace detail {

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

// "-" means stdin.
class InputFile {
 public:
  InputFile(const std::string& path, std::istream& stdin_stream) {
    if (path == "-") {
      stream_ = &stdin_stream;
      return;
    }
    file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*file_) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    stream_ = file_.get();
  }
  std::istream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

// Empty path or "-" means stdout.
class OutputFile {
 public:
  OutputFile(const std::string& path, std::ostream& stdout_stream) {
    if (path.empty() || path == "-") {
      stream_ = &stdout_stream;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    stream_ = file_.get();
  }
  std::ostream& stream() { return *stream_; }
  void close() {
    stream_->flush();
    if (!*stream_) throw Error(ErrorCode::IoError, "write failure");
    if (file_) file_->close();
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

inline Corpus load_manifest(const std::string& path, bool strict, Streams& io) {
  InputFile f(path, io.in);
  ParseOptions opts;
  opts.strict = strict;
  ParseResult res = parse_manifest(f.stream(), opts);
  constexpr std::size_t kMaxShown = 20;
  for (std::size_t i = 0; i < res.errors.size() && i < kMaxShown; ++i)
    io.err << "warning: " << path << ": " << res.errors[i].message << '\n';
  if (res.errors.size() > kMaxShown)
    io.err << "warning: " << path << ": " << res.errors.size() - kMaxShown << " more malformed rows\n";
  if (!res.errors.empty()) io.err << "warning: skipped " << res.errors.size() << " malformed rows\n";
  return std::move(res.corpus);
}

inline ScoreTable load_scores(const std::string& path, Streams& io) {
  InputFile f(path, io.in);
  return read_score_table(f.stream());
}

inline Subset load_subset(const std::string& path, Streams& io) {
  InputFile f(path, io.in);
  return read_subset(f.stream(), "file:" + path);
}

inline std::vector<ScorerKind> parse_scorer_list(const std::string& list) {
  std::vector<ScorerKind> kinds;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t comma = list.find(',', start);
    if (comma == std::string::npos) comma = list.size();
    std::string name = list.substr(start, comma - start);
    if (!name.empty()) kinds.push_back(parse_scorer(name));
    start = comma + 1;
  }
  if (kinds.empty()) throw Error(ErrorCode::UnknownScorer, "empty scorer list");
  return kinds;
}

// label=path
inline std::pair<std::string, std::string> split_labeled(const std::string& arg) {
  auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
    throw CLI::ValidationError("--subset", "expected <label>=<file>, got '" + arg + "'");
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

inline std::string fmt_real(double v) { return format_score(v); }

}  // namespace detail

// Runs one invocation. Exit codes: 0 success, 1 usage error, 2 data error.
inline int run(std::vector<std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
  detail::Streams io{in, out, err};
  CLI::App app{"Score, filter and subset noisy speech-translation corpora", "stfilter"};
  app.set_version_flag("--version", std::string("stfilter ") + std::string(kVersion));
  app.require_subcommand(1);

  std::function<void()> action;
  bool strict = false;
  unsigned threads = 1;

  // validate
  std::string manifest_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a manifest and summarize suspicious rows");
  validate_cmd->add_option("manifest", manifest_path, "Manifest TSV")->required();
  validate_cmd->add_flag("--strict", strict, "Abort on the first malformed row");
  validate_cmd->callback([&] {
    action = [&] {
      detail::InputFile f(manifest_path, io.in);
      ParseOptions opts;
      opts.strict = strict;
      ParseResult res = parse_manifest(f.stream(), opts);
      for (const auto& e : res.errors) io.err << "error: " << e.message << '\n';
      ValidationReport rep = validate(res.corpus);
      io.out << "records\t" << rep.records << '\n'
             << "malformed_rows\t" << res.errors.size() << '\n'
             << "empty_src_text\t" << rep.empty_src_text << '\n'
             << "empty_tgt_text\t" << rep.empty_tgt_text << '\n'
             << "zero_src_duration\t" << rep.zero_src_duration << '\n'
             << "zero_tgt_duration\t" << rep.zero_tgt_duration << '\n';
      if (!res.errors.empty()) throw Error(ErrorCode::MalformedRow, std::to_string(res.errors.size()) + " malformed rows");
    };
  });

  // score
  std::string scorers = "text_text,speech_text,speech_speech,text_speech";
  std::string tokenizer = "ws";
  std::string out_path;
  auto* score_cmd = app.add_subcommand("score", "Compute ratio scores for every pair");
  score_cmd->add_option("manifest", manifest_path, "Manifest TSV")->required();
  score_cmd->add_option("--scorers", scorers, "Comma-separated ratio scorers")->capture_default_str();
  score_cmd->add_option("--tokenizer", tokenizer, "Token counting mode")
      ->check(CLI::IsMember({"ws", "char"}))
      ->capture_default_str();
  score_cmd->add_option("-o,--output", out_path, "Score TSV (default stdout)");
  score_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  score_cmd->add_flag("--strict", strict, "Abort on the first malformed manifest row");
  score_cmd->callback([&] {
    action = [&] {
      auto kinds = detail::parse_scorer_list(scorers);
      TokenizerConfig cfg{tokenizer == "char" ? TokenizerMode::Char : TokenizerMode::Whitespace};
      Corpus corpus = detail::load_manifest(manifest_path, strict, io);
      ScoreTable table = score_corpus(corpus, kinds, cfg, threads);
      detail::OutputFile o(out_path, io.out);
      write_score_table(table, o.stream());
      o.close();
    };
  });

  // ingest
  std::string scores_path, external_path;
  auto* ingest_cmd = app.add_subcommand("ingest", "Merge an external score file (e.g. nll) into a score table");
  ingest_cmd->add_option("scores", scores_path, "Score TSV")->required();
  ingest_cmd->add_option("external", external_path, "External score TSV with an id column")->required();
  ingest_cmd->add_option("-o,--output", out_path, "Merged score TSV (default stdout)");
  ingest_cmd->callback([&] {
    action = [&] {
      ScoreTable table = detail::load_scores(scores_path, io);
      detail::InputFile ext(external_path, io.in);
      IngestResult res = ingest_external_scores(table, ext.stream(), external_path);
      if (!res.unknown_ids.empty())
        io.err << "warning: " << res.unknown_ids.size() << " ids in " << external_path
               << " are not in the score table (first: " << res.unknown_ids.front() << ")\n";
      if (res.missing > 0)
        io.err << "warning: " << res.missing << " table rows have no external score; marked INVALID\n";
      detail::OutputFile o(out_path, io.out);
      write_score_table(res.table, o.stream());
      o.close();
    };
  });

  // stats
  std::string scorer_name_arg;
  auto* stats_cmd = app.add_subcommand("stats", "Mean and population std of one score column");
  stats_cmd->add_option("scores", scores_path, "Score TSV")->required();
  stats_cmd->add_option("--scorer", scorer_name_arg, "Scorer column")->required();
  stats_cmd->callback([&] {
    action = [&] {
      ScorerKind kind = parse_scorer(scorer_name_arg);
      ScoreTable table = detail::load_scores(scores_path, io);
      CorpusStats st = compute_stats(table, kind);
      io.out << "scorer\tmean\tstd\tn_valid\tn_invalid\n"
             << scorer_name(kind) << '\t' << detail::fmt_real(st.mean) << '\t' << detail::fmt_real(st.stddev)
             << '\t' << st.n_valid << '\t' << st.n_invalid << '\n';
    };
  });

  // filter
  std::string spec_text;
  auto* filter_cmd = app.add_subcommand("filter", "Select a subset with a filter spec");
  filter_cmd->add_option("scores", scores_path, "Score TSV")->required();
  filter_cmd->add_option("--spec", spec_text, "z:<scorer>:<tau> | pct:<scorer>:<p> | union(a,b) | intersect(a,b)")
      ->required();
  filter_cmd->add_option("-o,--output", out_path, "Subset file (default stdout)");
  filter_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  filter_cmd->callback([&] {
    action = [&] {
      auto spec = parse_subset_spec(spec_text);
      ScoreTable table = detail::load_scores(scores_path, io);
      Subset s = evaluate(*spec, table, threads);
      detail::OutputFile o(out_path, io.out);
      write_subset(s, o.stream());
      o.close();
      io.err << spec->to_string() << ": " << s.size() << " of " << table.size() << " pairs\n";
    };
  });

  // combine
  std::string op = "union";
  std::vector<std::string> operands;
  auto* combine_cmd = app.add_subcommand("combine", "Union or intersection of two subset files");
  combine_cmd->add_option("--op", op, "union | intersect")->check(CLI::IsMember({"union", "intersect"}))->required();
  combine_cmd->add_option("subsets", operands, "Two subset files")->expected(2)->required();
  combine_cmd->add_option("-o,--output", out_path, "Subset file (default stdout)");
  combine_cmd->callback([&] {
    action = [&] {
      Subset a = detail::load_subset(operands[0], io);
      Subset b = detail::load_subset(operands[1], io);
      Subset c = op == "union" ? unite(a, b) : intersect(a, b);
      detail::OutputFile o(out_path, io.out);
      write_subset(c, o.stream());
      o.close();
    };
  });

  // materialize
  std::string subset_path;
  auto* mat_cmd = app.add_subcommand("materialize", "Write the manifest rows of a subset");
  mat_cmd->add_option("manifest", manifest_path, "Manifest TSV")->required();
  mat_cmd->add_option("subset", subset_path, "Subset file")->required();
  mat_cmd->add_option("-o,--output", out_path, "Manifest TSV (default stdout)");
  mat_cmd->add_flag("--strict", strict, "Abort on the first malformed manifest row");
  mat_cmd->callback([&] {
    action = [&] {
      Corpus corpus = detail::load_manifest(manifest_path, strict, io);
      Subset s = detail::load_subset(subset_path, io);
      Corpus sub = materialize(s, corpus);
      detail::OutputFile o(out_path, io.out);
      write_manifest(sub, o.stream());
      o.close();
    };
  });

  // report
  std::vector<std::string> subset_args;
  std::string reference_label, format = "tsv";
  auto* report_cmd = app.add_subcommand("report", "Subset sizes, overlaps and score summaries");
  report_cmd->add_option("manifest", manifest_path, "Manifest TSV")->required();
  report_cmd->add_option("scores", scores_path, "Score TSV")->required();
  report_cmd->add_option("--subset", subset_args, "<label>=<subset file>, repeatable");
  report_cmd->add_option("--reference", reference_label, "Label of the overlap reference subset");
  report_cmd->add_option("--format", format, "tsv | md")->check(CLI::IsMember({"tsv", "md"}))->capture_default_str();
  report_cmd->add_option("-o,--output", out_path, "Report file (default stdout)");
  report_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  report_cmd->add_flag("--strict", strict, "Abort on the first malformed manifest row");
  report_cmd->callback([&] {
    std::vector<std::pair<std::string, std::string>> labeled;
    for (const auto& a : subset_args) labeled.push_back(detail::split_labeled(a));
    if (!reference_label.empty() &&
        std::none_of(labeled.begin(), labeled.end(), [&](const auto& p) { return p.first == reference_label; }))
      throw CLI::ValidationError("--reference", "no --subset labeled '" + reference_label + "'");
    action = [&, labeled] {
      Corpus corpus = detail::load_manifest(manifest_path, strict, io);
      ScoreTable table = detail::load_scores(scores_path, io);
      std::vector<LabeledSubset> subsets;
      std::optional<LabeledSubset> reference;
      for (const auto& [label, path] : labeled) {
        subsets.push_back({label, detail::load_subset(path, io)});
        if (label == reference_label) reference = subsets.back();
      }
      FilterReport rep = build_report(corpus, table, subsets, reference);
      detail::OutputFile o(out_path, io.out);
      render_report(rep, format == "md" ? ReportFormat::Markdown : ReportFormat::Tsv, o.stream());
      o.close();
    };
  });

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic corpora with planted noise");
  synth_cmd->require_subcommand(1);
  std::size_t n_records = 1000;
  std::uint64_t seed = 0;
  auto* gen_cmd = synth_cmd->add_subcommand("gen", "Generate a clean synthetic manifest");
  gen_cmd->add_option("--n", n_records, "Number of pairs")->capture_default_str();
  gen_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("-o,--output", out_path, "Manifest TSV (default stdout)");
  gen_cmd->callback([&] {
    action = [&] {
      Corpus c = generate_clean(n_records, seed);
      detail::OutputFile o(out_path, io.out);
      write_manifest(c, o.stream());
      o.close();
    };
  });

  NoiseSpec noise;
  std::string labels_path;
  auto* corrupt_cmd = synth_cmd->add_subcommand("corrupt", "Inject labeled noise into a manifest");
  corrupt_cmd->add_option("manifest", manifest_path, "Manifest TSV")->required();
  corrupt_cmd->add_option("--swap", noise.swap_fraction, "Fraction of cross-pair target swaps");
  corrupt_cmd->add_option("--truncate", noise.truncate_fraction, "Fraction of truncated target transcripts");
  corrupt_cmd->add_option("--jitter", noise.duration_jitter_fraction, "Fraction of target durations stretched 2-4x");
  corrupt_cmd->add_option("--empty", noise.empty_fraction, "Fraction of emptied target transcripts");
  corrupt_cmd->add_option("--seed", noise.seed, "Random seed")->capture_default_str();
  corrupt_cmd->add_option("-o,--output", out_path, "Corrupted manifest TSV (default stdout)");
  corrupt_cmd->add_option("--labels", labels_path, "Labels TSV")->required();
  corrupt_cmd->callback([&] {
    action = [&] {
      Corpus c = detail::load_manifest(manifest_path, strict, io);
      LabeledCorpus lc = inject_noise(c, noise);
      detail::OutputFile o(out_path, io.out);
      write_manifest(lc.corpus, o.stream());
      o.close();
      detail::OutputFile l(labels_path, io.out);
      write_labels(lc.labels, l.stream());
      l.close();
    };
  });

  auto* eval_cmd = synth_cmd->add_subcommand("eval", "Precision/recall of subsets against noise labels");
  eval_cmd->add_option("labels", labels_path, "Labels TSV")->required();
  eval_cmd->add_option("--subset", subset_args, "<label>=<subset file>, repeatable")->required();
  eval_cmd->add_option("-o,--output", out_path, "Evaluation TSV (default stdout)");
  eval_cmd->callback([&] {
    std::vector<std::pair<std::string, std::string>> labeled;
    for (const auto& a : subset_args) labeled.push_back(detail::split_labeled(a));
    action = [&, labeled] {
      detail::InputFile lf(labels_path, io.in);
      LabelMap labels = read_labels(lf.stream());
      std::vector<FilterEval> evals;
      for (const auto& [label, path] : labeled)
        evals.push_back(evaluate_filter(detail::load_subset(path, io), labels, label));
      detail::OutputFile o(out_path, io.out);
      write_eval(evals, o.stream());
      o.close();
    };
  });

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    io.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    io.out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    io.err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  if (!action) {
    io.err << app.help();
    return kExitUsage;
  }
  try {
    action();
  } catch (const Error& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

inline int run(int argc, char** argv, std::istream& in = std::cin, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), in, out, err);
}

}  // namespace stfilter::cli

#endif  // STFILTER_CLI_HPP
