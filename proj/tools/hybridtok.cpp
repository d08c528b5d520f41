// hybridtok: genome tokenization pipeline driver.
//
//   train-bpe      learn BPE merges from a FASTA/plain corpus
//   build-vocab    merge the k-mer and BPE token sets into one vocabulary
//   tokenize       hybrid-encode fixed-length segments
//   emit-mlm       masked-LM examples as JSONL
//   emit-nextkmer  next-k-mer classification dataset (train/test JSONL + manifest)
//   stats          token distribution report per tokenizer scheme
//   manifest       training manifest with artifact digests and hyperparameters
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal invariant violation.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hybridtok/bpe.hpp"
#include "hybridtok/digest.hpp"
#include "hybridtok/errors.hpp"
#include "hybridtok/io.hpp"
#include "hybridtok/kmer.hpp"
#include "hybridtok/manifest.hpp"
#include "hybridtok/masking.hpp"
#include "hybridtok/nextkmer.hpp"
#include "hybridtok/sequence_io.hpp"
#include "hybridtok/token_stats.hpp"
#include "hybridtok/vocab.hpp"

namespace fs = std::filesystem;
using namespace hybridtok;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  bool json_errors = false;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;

  std::string input;
  std::string format = "auto";
  std::size_t segment_length = kDefaultSegmentLength;
  std::string out;

  // train-bpe
  std::size_t cycles = 600;
  std::int64_t min_pair_count = 1;

  // build-vocab / tokenize / emit-*
  std::string merges;
  std::string vocab;
  int k = 6;
  bool bare = false;
  bool lenient = false;

  // emit-mlm
  double mask_prob = 0.15;
  std::string span_offsets = "-2,-1,0,1,2,3";

  // emit-nextkmer
  std::size_t window = 510;
  std::size_t keep = 56;
  std::size_t stride = 1;
  std::size_t count = 500000;
  int next_k = 3;
  double train_fraction = 0.8;
  std::string out_dir;

  // stats
  std::string schemes = "kmer6,bpe,hybrid";
  std::string markdown;
};

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw UsageError("--seed is required for randomized commands");
  return *o.seed;
}

std::vector<NucleotideSequence> read_input(const Options& o) {
  SequenceFormat fmt;
  if (o.format == "auto") {
    fmt = detect_format(o.input);
  } else if (o.format == "fasta") {
    fmt = SequenceFormat::fasta;
  } else if (o.format == "plain") {
    fmt = SequenceFormat::plain;
  } else {
    throw UsageError("--format must be auto, fasta or plain");
  }
  return load_sequences(o.input, fmt);
}

// --segment-length 0 keeps each ACGT run whole.
std::vector<Segment> read_segments(const Options& o) {
  auto seqs = read_input(o);
  if (o.segment_length == 0) {
    std::vector<Segment> out;
    out.reserve(seqs.size());
    for (auto& s : seqs) out.push_back(Segment{std::move(s)});
    return out;
  }
  auto segs = segment(seqs, o.segment_length);
  if (segs.empty()) {
    fail(ErrorKind::EmptyCorpus, "no sequence reaches the segment length " + std::to_string(o.segment_length));
  }
  return segs;
}

MergeTable read_merges(const std::string& path) { return MergeTable::parse(read_file(path)); }
Vocabulary read_vocab(const std::string& path) { return Vocabulary::parse(read_file(path)); }

std::vector<int> parse_offsets(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw UsageError("--span-offsets must be a comma-separated list of integers");
    }
  }
  return out;
}

fs::path text_companion(const std::string& out) {
  fs::path p(out);
  p.replace_extension(".txt");
  return p;
}

int cmd_train_bpe(const Options& o) {
  const auto segs = read_segments(o);
  const MergeTable table = bpe_train(segs, o.cycles, o.min_pair_count);
  write_file_atomic(o.out, table.serialize());
  nlohmann::json summary = {{"rules", table.rules.size()},
                            {"distinct_tokens", table.distinct_strings().size()},
                            {"early_stop", table.early_stop},
                            {"segments", segs.size()},
                            {"corpus_digest", table.corpus_digest}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_build_vocab(const Options& o) {
  const MergeTable table = read_merges(o.merges);
  const auto kmers = kmer_vocabulary(o.k);
  const Vocabulary vocab = build_vocabulary(kmers, table);
  write_file_atomic(o.out, vocab.serialize());
  write_file_atomic(text_companion(o.out), vocab.to_text());
  const auto& c = vocab.metadata().counts;
  std::cout << nlohmann::json{{"total", c.total}, {"kmer", c.kmer}, {"bpe", c.bpe},
                              {"shared", c.shared}, {"special", c.special}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_tokenize(const Options& o) {
  const Vocabulary vocab = read_vocab(o.vocab);
  const MergeTable table = read_merges(o.merges);
  const HybridEncoder encoder(vocab, table, vocab.metadata().k,
                              o.lenient ? UnknownPolicy::lenient : UnknownPolicy::strict);
  const auto segs = read_segments(o);
  AtomicFile out(o.out);
  ordered_emit(
      segs.size(), o.threads,
      [&](std::size_t i) {
        thread_local HybridEncoding enc;
        encoder.encode(segs[i].bases(), !o.bare, enc);
        std::string line = "{";
        json_text::append_key(line, "source_id", true);
        json_text::append_string(line, segs[i].seq.source_id);
        json_text::append_key(line, "offset");
        json_text::append_int(line, segs[i].seq.offset);
        json_text::append_key(line, "ids");
        json_text::append_array<TokenId>(line, enc.ids);
        json_text::append_key(line, "kmer_region");
        const std::size_t kr[2] = {enc.kmer_region.begin, enc.kmer_region.end};
        json_text::append_array<std::size_t>(line, kr);
        json_text::append_key(line, "bpe_region");
        const std::size_t br[2] = {enc.bpe_region.begin, enc.bpe_region.end};
        json_text::append_array<std::size_t>(line, br);
        line += "}\n";
        return line;
      },
      [&](const std::string& line) { out.write(line); });
  out.commit();
  return 0;
}

int cmd_emit_mlm(const Options& o) {
  MaskingConfig cfg;
  cfg.seed = require_seed(o);
  cfg.mask_probability = o.mask_prob;
  cfg.span_offsets = parse_offsets(o.span_offsets);
  const Vocabulary vocab = read_vocab(o.vocab);
  const MergeTable table = read_merges(o.merges);
  const HybridEncoder encoder(vocab, table, vocab.metadata().k,
                              o.lenient ? UnknownPolicy::lenient : UnknownPolicy::strict);
  const auto segs = read_segments(o);
  AtomicFile out(o.out);
  emit_mlm_corpus(segs, encoder, cfg, !o.bare, o.threads, [&](const std::string& l) { out.write(l); });
  out.commit();
  std::cout << nlohmann::json{{"examples", segs.size()}}.dump() << "\n";
  return 0;
}

int cmd_emit_nextkmer(const Options& o) {
  const std::uint64_t seed = require_seed(o);
  const Vocabulary vocab = read_vocab(o.vocab);
  const MergeTable table = read_merges(o.merges);
  const HybridEncoder encoder(vocab, table, vocab.metadata().k);
  const auto seqs = read_input(o);
  // The window draw and the split use separate streams of the same seed.
  auto sample = extract_windows(seqs, o.window, o.keep, o.stride, o.count, derive_seed(seed, 0));
  if (sample.shortfall) {
    std::cerr << nlohmann::json{{"level", "warning"},
                                {"message", "fewer windows than requested"},
                                {"requested", o.count},
                                {"available", sample.candidates}}
                     .dump()
              << "\n";
  }
  const std::size_t n_windows = sample.windows.size();
  NextKmerOptions opt;
  opt.next_k = o.next_k;
  opt.train_fraction = o.train_fraction;
  opt.seed = derive_seed(seed, 1);
  opt.strict = !o.lenient;
  opt.threads = o.threads;
  const auto data = emit_nextkmer_dataset(std::move(sample.windows), encoder, opt);

  fs::create_directories(o.out_dir);
  auto write_split = [&](const std::vector<NextKmerExample>& exs, const fs::path& path) {
    AtomicFile f(path);
    for (const auto& ex : exs) f.write(to_jsonl(ex));
    f.commit();
  };
  write_split(data.train, fs::path(o.out_dir) / "train.jsonl");
  write_split(data.test, fs::path(o.out_dir) / "test.jsonl");

  nlohmann::json manifest = {
      {"k", o.next_k},
      {"vocab_digest", file_digest(o.vocab)},
      {"merges_digest", file_digest(o.merges)},
      {"corpus_digest", corpus_digest(seqs)},
      {"counts",
       {{"candidates", sample.candidates},
        {"windows", n_windows},
        {"train", data.train.size()},
        {"test", data.test.size()},
        {"errors", data.errors.size()}}},
      {"split_seed", seed},
      {"train_fraction", o.train_fraction},
      {"window", o.window},
      {"keep", o.keep},
      {"stride", o.stride},
      {"token_budget", kNextKmerTokenBudget},
      {"input_bases", kNextKmerInputBases},
  };
  write_file_atomic(fs::path(o.out_dir) / "manifest.json", manifest.dump(2) + "\n");
  std::cout << manifest["counts"].dump() << "\n";
  return 0;
}

int cmd_stats(const Options& o) {
  std::optional<MergeTable> table;
  if (!o.merges.empty()) table = read_merges(o.merges);
  std::vector<TokenizerScheme> schemes;
  std::stringstream ss(o.schemes);
  std::string item;
  while (std::getline(ss, item, ',')) {
    TokenizerScheme s;
    if (item.rfind("kmer", 0) == 0) {
      s.kind = TokenizerScheme::Kind::kmer;
      s.k = item.size() > 4 ? std::stoi(item.substr(4)) : o.k;
    } else if (item == "bpe" || item == "hybrid") {
      s.kind = item == "bpe" ? TokenizerScheme::Kind::bpe : TokenizerScheme::Kind::hybrid;
      s.k = o.k;
      if (!table) throw UsageError("scheme '" + item + "' needs --merges");
      s.table = &*table;
    } else {
      throw UsageError("unknown scheme '" + item + "'");
    }
    schemes.push_back(s);
  }
  const auto segs = read_segments(o);
  const auto rows = compare_tokenizers(segs, std::span<const TokenizerScheme>(schemes), o.threads);
  const std::string csv = render_csv(rows);
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_file_atomic(o.out, csv);
  }
  if (!o.markdown.empty()) write_file_atomic(o.markdown, render_markdown(rows));
  return 0;
}

int cmd_manifest(const Options& o, const nlohmann::json& echo) {
  PipelineManifest m;
  if (!o.vocab.empty()) m.vocab_digest = file_digest(o.vocab);
  if (!o.merges.empty()) m.merge_digest = file_digest(o.merges);
  if (!o.input.empty()) m.corpus_digest = corpus_digest(read_input(o));
  m.parameters = echo;
  const std::string text = m.serialize();
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(o.out, text);
  }
  return 0;
}

void report_error(const Options& o, std::string_view kind, const std::string& message) {
  if (o.json_errors) {
    std::cerr << nlohmann::json{{"level", "error"}, {"kind", kind}, {"message", message}}.dump() << "\n";
  } else {
    std::cerr << "error: " << message << "\n";
  }
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return kExitUsage;
    case ErrorKind::InvariantViolation: return kExitInternal;
    default: return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybridtok: k-mer + BPE hybrid tokenization for genome language models"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd) {
    cmd->add_flag("--json-errors", o.json_errors, "Emit diagnostics as JSON lines on stderr");
    cmd->add_option("--threads", o.threads, "Worker threads (outputs do not depend on this)")
        ->check(CLI::Range(1u, 1024u));
    cmd->add_option("--seed", o.seed, "Seed for every randomized step");
  };
  auto corpus = [&](CLI::App* cmd, bool segmented) {
    cmd->add_option("--input", o.input, "FASTA or plain-text corpus (gzip accepted)")->required();
    cmd->add_option("--format", o.format, "auto, fasta or plain")->capture_default_str();
    if (segmented) {
      cmd->add_option("--segment-length", o.segment_length, "Segment length in nt (0 = whole runs)")
          ->capture_default_str();
    }
  };

  auto* train = app.add_subcommand("train-bpe", "Train BPE merges");
  common(train);
  corpus(train, true);
  train->add_option("--cycles", o.cycles, "Merge cycles")->capture_default_str();
  train->add_option("--min-pair-count", o.min_pair_count, "Stop when the best pair is rarer than this")
      ->capture_default_str();
  train->add_option("--out", o.out, "Output merges.json")->required();

  auto* build = app.add_subcommand("build-vocab", "Build the hybrid vocabulary");
  common(build);
  build->add_option("--merges", o.merges)->required();
  build->add_option("--k", o.k, "k-mer length")->capture_default_str()->check(CLI::Range(1, 12));
  build->add_option("--out", o.out, "Output vocab.json (vocab.txt written alongside)")->required();

  auto* tokenize = app.add_subcommand("tokenize", "Hybrid-encode segments to JSONL");
  common(tokenize);
  corpus(tokenize, true);
  tokenize->add_option("--vocab", o.vocab)->required();
  tokenize->add_option("--merges", o.merges)->required();
  tokenize->add_flag("--bare", o.bare, "Omit [CLS]/[SEP]");
  tokenize->add_flag("--lenient", o.lenient, "Map unknown tokens to [UNK] instead of failing");
  tokenize->add_option("--out", o.out)->required();

  auto* mlm = app.add_subcommand("emit-mlm", "Emit masked-LM examples");
  common(mlm);
  corpus(mlm, true);
  mlm->add_option("--vocab", o.vocab)->required();
  mlm->add_option("--merges", o.merges)->required();
  mlm->add_option("--mask-prob", o.mask_prob)->capture_default_str();
  mlm->add_option("--span-offsets", o.span_offsets)->capture_default_str();
  mlm->add_flag("--bare", o.bare, "Omit [CLS]/[SEP]");
  mlm->add_flag("--lenient", o.lenient);
  mlm->add_option("--out", o.out)->required();

  auto* nk = app.add_subcommand("emit-nextkmer", "Emit the next-k-mer dataset");
  common(nk);
  corpus(nk, false);
  nk->add_option("--vocab", o.vocab)->required();
  nk->add_option("--merges", o.merges)->required();
  nk->add_option("--window", o.window)->capture_default_str();
  nk->add_option("--keep", o.keep)->capture_default_str();
  nk->add_option("--stride", o.stride)->capture_default_str();
  nk->add_option("--count", o.count)->capture_default_str();
  nk->add_option("--k", o.next_k, "Label k-mer length")->capture_default_str()->check(CLI::Range(2, 6));
  nk->add_option("--train-fraction", o.train_fraction)->capture_default_str();
  nk->add_flag("--lenient", o.lenient, "Skip failing windows instead of aborting");
  nk->add_option("--out-dir", o.out_dir)->required();

  auto* stats = app.add_subcommand("stats", "Token distribution report");
  common(stats);
  corpus(stats, true);
  stats->add_option("--merges", o.merges);
  stats->add_option("--k", o.k)->capture_default_str()->check(CLI::Range(1, 12));
  stats->add_option("--schemes", o.schemes)->capture_default_str();
  stats->add_option("--out", o.out, "CSV output (stdout when omitted)");
  stats->add_option("--markdown", o.markdown, "Markdown table output");

  auto* manifest = app.add_subcommand("manifest", "Write the training manifest");
  common(manifest);
  manifest->add_option("--vocab", o.vocab);
  manifest->add_option("--merges", o.merges);
  manifest->add_option("--input", o.input);
  manifest->add_option("--format", o.format)->capture_default_str();
  manifest->add_option("--out", o.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return cmd_train_bpe(o);
    if (*build) return cmd_build_vocab(o);
    if (*tokenize) return cmd_tokenize(o);
    if (*mlm) return cmd_emit_mlm(o);
    if (*nk) return cmd_emit_nextkmer(o);
    if (*stats) return cmd_stats(o);
    if (*manifest) {
      nlohmann::json echo = nlohmann::json::object();
      for (const CLI::Option* opt : manifest->get_options()) {
        if (opt->get_name() == "--help" || opt->count() == 0) continue;
        echo[opt->get_name()] = opt->as<std::string>();
      }
      return cmd_manifest(o, echo);
    }
  } catch (const UsageError& e) {
    report_error(o, "UsageError", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    report_error(o, to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report_error(o, "InternalError", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}
