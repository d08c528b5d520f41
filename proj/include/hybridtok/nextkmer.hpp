#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hybridtok/errors.hpp"
#include "hybridtok/io.hpp"
#include "hybridtok/kmer.hpp"
#include "hybridtok/parallel.hpp"
#include "hybridtok/sequence_io.hpp"
#include "hybridtok/vocab.hpp"

namespace hybridtok {

inline constexpr std::size_t kNextKmerInputBases = 50;
inline constexpr std::size_t kNextKmerTokenBudget = 80;
inline constexpr int kMinNextK = 2;
inline constexpr int kMaxNextK = 6;

// Class index of a k-mer: base-4 digits A=0 C=1 G=2 T=3, most significant first.
inline std::uint64_t label_of(std::string_view kmer) {
  if (kmer.empty() || kmer.size() > static_cast<std::size_t>(KmerConfig::kMaxK)) {
    fail(ErrorKind::InvalidArgument, "label k-mer length must lie in [1, 12]");
  }
  return kmer_code(kmer);
}

inline std::string kmer_of(std::uint64_t label, int k) {
  KmerConfig::validate(k);
  if (label >= kmer_space(k)) {
    fail(ErrorKind::InvalidArgument, "label " + std::to_string(label) + " out of range for k=" +
                                         std::to_string(k));
  }
  return kmer_string(label, k);
}

struct NextKmerExample {
  std::vector<TokenId> input_ids;  // exactly kNextKmerTokenBudget ids, [PAD] at the tail
  std::uint64_t label = 0;
  int k = 0;
  std::string source_id;
  std::size_t offset = 0;

  bool operator==(const NextKmerExample&) const = default;
};

// Input = hybrid encoding (with specials) of bases 1..50; label = the k bases at
// 1-based positions 51..50+k. Over-long encodings are rejected, never truncated.
inline NextKmerExample make_example(const NucleotideSequence& window, int next_k,
                                    const HybridEncoder& encoder) {
  if (next_k < kMinNextK || next_k > kMaxNextK) {
    fail(ErrorKind::InvalidArgument, "next k-mer length must lie in [2, 6]");
  }
  const std::size_t need = kNextKmerInputBases + static_cast<std::size_t>(next_k);
  if (window.size() < need) {
    fail(ErrorKind::WindowTooShort, "window of " + std::to_string(window.size()) +
                                        " bases; need " + std::to_string(need));
  }
  const std::string_view bases = window.bases;
  thread_local HybridEncoding enc;
  encoder.encode(bases.substr(0, kNextKmerInputBases), true, enc);
  if (enc.ids.size() > kNextKmerTokenBudget) {
    fail(ErrorKind::TokenBudgetExceeded, std::to_string(enc.ids.size()) + " tokens exceed the " +
                                             std::to_string(kNextKmerTokenBudget) + "-token budget");
  }
  NextKmerExample ex;
  ex.input_ids.reserve(kNextKmerTokenBudget);
  ex.input_ids.assign(enc.ids.begin(), enc.ids.end());
  ex.input_ids.resize(kNextKmerTokenBudget, special::kPad);
  ex.label = label_of(bases.substr(kNextKmerInputBases, static_cast<std::size_t>(next_k)));
  ex.k = next_k;
  ex.source_id = window.source_id;
  ex.offset = window.offset;
  return ex;
}

inline std::string to_jsonl(const NextKmerExample& ex) {
  std::string line;
  line.reserve(ex.input_ids.size() * 6 + 64);
  line.push_back('{');
  json_text::append_key(line, "input_ids", true);
  json_text::append_array<TokenId>(line, ex.input_ids);
  json_text::append_key(line, "label");
  json_text::append_int(line, ex.label);
  json_text::append_key(line, "k");
  json_text::append_int(line, ex.k);
  json_text::append_key(line, "source_id");
  json_text::append_string(line, ex.source_id);
  json_text::append_key(line, "offset");
  json_text::append_int(line, ex.offset);
  line += "}\n";
  return line;
}

inline NextKmerExample next_kmer_example_from_json(const nlohmann::json& j) {
  NextKmerExample ex;
  ex.input_ids = j.at("input_ids").get<std::vector<TokenId>>();
  ex.label = j.at("label").get<std::uint64_t>();
  ex.k = j.at("k").get<int>();
  ex.source_id = j.at("source_id").get<std::string>();
  ex.offset = j.at("offset").get<std::size_t>();
  return ex;
}

struct WindowError {
  std::string source_id;
  std::size_t offset = 0;
  ErrorKind kind = ErrorKind::InvariantViolation;
  std::string message;
};

struct NextKmerDataset {
  std::vector<NextKmerExample> train;
  std::vector<NextKmerExample> test;
  std::vector<WindowError> errors;  // only populated in lenient mode
  std::uint64_t seed = 0;
};

struct NextKmerOptions {
  int next_k = 3;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool strict = true;
  unsigned threads = 1;
};

// Splits the windows (seeded shuffle, round(fraction * N) train) and builds one
// example per window. In strict mode the first failing window aborts the run;
// otherwise failures are collected and the window is skipped.
inline NextKmerDataset emit_nextkmer_dataset(std::vector<NucleotideSequence> windows,
                                             const HybridEncoder& encoder,
                                             const NextKmerOptions& opt) {
  auto parts = split(std::move(windows), opt.train_fraction, opt.seed);
  NextKmerDataset out;
  out.seed = opt.seed;

  auto build = [&](const std::vector<NucleotideSequence>& src, std::vector<NextKmerExample>& dst) {
    std::vector<std::optional<NextKmerExample>> built(src.size());
    std::vector<std::optional<WindowError>> errs(src.size());
    parallel_for(src.size(), opt.threads, [&](std::size_t i) {
      try {
        built[i] = make_example(src[i], opt.next_k, encoder);
      } catch (const Error& e) {
        errs[i] = WindowError{src[i].source_id, src[i].offset, e.kind(), e.what()};
      }
    });
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (errs[i]) {
        if (opt.strict) {
          throw Error(errs[i]->kind, "window " + errs[i]->source_id + ":" +
                                         std::to_string(errs[i]->offset) + ": " + errs[i]->message);
        }
        out.errors.push_back(std::move(*errs[i]));
      } else {
        dst.push_back(std::move(*built[i]));
      }
    }
  };
  build(parts.train, out.train);
  build(parts.test, out.test);
  return out;
}

}  // namespace hybridtok
