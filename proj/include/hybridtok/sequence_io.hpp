#pragma once

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hybridtok/errors.hpp"
#include "hybridtok/io.hpp"
#include "hybridtok/rng.hpp"
#include "hybridtok/sequence.hpp"

namespace hybridtok {

enum class SequenceFormat { fasta, plain };

inline constexpr std::size_t kDefaultSegmentLength = 305;

namespace detail {

// Incremental parser; accepts arbitrary chunk boundaries.
//
// Letters outside ACGT (N, IUPAC codes) and the gap symbols '-', '*', '.'
// terminate the current run but still advance the record position, so offsets
// stay relative to the original record. Spaces, tabs and CR are layout only.
class SequenceParser {
 public:
  explicit SequenceParser(SequenceFormat format) : format_(format) {}

  void feed(std::string_view chunk) {
    for (char c : chunk) consume(c);
  }

  std::vector<NucleotideSequence> finish() {
    if (in_header_) finish_header();
    close_run();
    if (out_.empty()) fail(ErrorKind::EmptyCorpus, "no A/C/G/T bases found");
    return std::move(out_);
  }

 private:
  void consume(char c) {
    if (c == '\n') {
      ++line_;
      if (in_header_) {
        finish_header();
      } else if (format_ == SequenceFormat::plain) {
        close_run();
        have_record_ = false;
      }
      line_start_ = true;
      return;
    }
    if (in_header_) {
      header_.push_back(c);
      return;
    }
    if (line_start_ && c == '>' && format_ == SequenceFormat::fasta) {
      close_run();
      in_header_ = true;
      header_.clear();
      line_start_ = false;
      return;
    }
    line_start_ = false;
    if (c == ' ' || c == '\t' || c == '\r') return;

    if (!have_record_) {
      if (format_ == SequenceFormat::fasta) {
        fail(ErrorKind::MalformedFile,
             "sequence data before first '>' header at line " + std::to_string(line_ + 1));
      }
      start_record("line" + std::to_string(line_ + 1));
    }

    const char upper = (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
    if (base_code(upper) >= 0) {
      if (run_.empty()) run_offset_ = position_;
      run_.push_back(upper);
    } else if ((upper >= 'A' && upper <= 'Z') || upper == '-' || upper == '*' || upper == '.') {
      close_run();
    } else {
      fail(ErrorKind::MalformedFile, "unexpected character '" + std::string(1, c) +
                                         "' at line " + std::to_string(line_ + 1));
    }
    ++position_;
  }

  void finish_header() {
    in_header_ = false;
    std::string_view h = header_;
    while (!h.empty() && (h.back() == '\r' || h.back() == ' ')) h.remove_suffix(1);
    const auto end = h.find_first_of(" \t");
    std::string id(h.substr(0, end));
    if (id.empty()) id = "record" + std::to_string(records_ + 1);
    start_record(std::move(id));
  }

  void start_record(std::string id) {
    ++records_;
    source_id_ = std::move(id);
    position_ = 0;
    have_record_ = true;
  }

  void close_run() {
    if (run_.empty()) return;
    out_.push_back(NucleotideSequence{std::move(run_), source_id_, run_offset_});
    run_.clear();
  }

  SequenceFormat format_;
  std::vector<NucleotideSequence> out_;
  std::string header_;
  std::string source_id_;
  std::string run_;
  std::size_t run_offset_ = 0;
  std::size_t position_ = 0;
  std::size_t line_ = 0;
  std::size_t records_ = 0;
  bool in_header_ = false;
  bool line_start_ = true;
  bool have_record_ = false;
};

}  // namespace detail

inline std::vector<NucleotideSequence> parse_sequences(std::string_view content,
                                                       SequenceFormat format) {
  detail::SequenceParser parser(format);
  parser.feed(content);
  return parser.finish();
}

// Reads FASTA or plain text; gzip input is decompressed transparently.
inline std::vector<NucleotideSequence> load_sequences(const std::string& path,
                                                      SequenceFormat format) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) fail(ErrorKind::MalformedFile, "not found: " + path);
  gzbuffer(file, 1 << 18);
  detail::SequenceParser parser(format);
  std::string buf(1 << 18, '\0');
  for (;;) {
    const int n = gzread(file, buf.data(), static_cast<unsigned>(buf.size()));
    if (n < 0) {
      gzclose(file);
      fail(ErrorKind::MalformedFile, "read error: " + path);
    }
    if (n == 0) break;
    try {
      parser.feed(std::string_view(buf.data(), static_cast<std::size_t>(n)));
    } catch (...) {
      gzclose(file);
      throw;
    }
  }
  gzclose(file);
  return parser.finish();
}

// Picks fasta when the first non-blank byte is '>'.
inline SequenceFormat detect_format(const std::string& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) fail(ErrorKind::MalformedFile, "not found: " + path);
  int c;
  while ((c = gzgetc(file)) != -1) {
    if (c != ' ' && c != '\n' && c != '\r' && c != '\t') break;
  }
  gzclose(file);
  return c == '>' ? SequenceFormat::fasta : SequenceFormat::plain;
}

// Non-overlapping windows of exactly `length` bases; trailing remainders are dropped.
inline std::vector<Segment> segment(const std::vector<NucleotideSequence>& seqs,
                                    std::size_t length = kDefaultSegmentLength) {
  if (length == 0) fail(ErrorKind::InvalidArgument, "segment length must be >= 1");
  std::vector<Segment> out;
  std::size_t total = 0;
  for (const auto& s : seqs) total += s.size() / length;
  out.reserve(total);
  for (const auto& s : seqs) {
    for (std::size_t off = 0; off + length <= s.size(); off += length) {
      out.push_back(Segment{NucleotideSequence{s.bases.substr(off, length), s.source_id,
                                               s.offset + off}});
    }
  }
  return out;
}

struct WindowSample {
  std::vector<NucleotideSequence> windows;
  std::size_t candidates = 0;
  // True when fewer than the requested count existed.
  bool shortfall = false;
};

inline std::size_t window_count(std::size_t length, std::size_t window, std::size_t stride) {
  return length < window ? 0 : (length - window) / stride + 1;
}

// Slides a `window`-long frame with `stride`, keeps the first `keep` bases of
// each frame, then draws `count` frames uniformly without replacement. The
// sample is returned in corpus order.
inline WindowSample extract_windows(const std::vector<NucleotideSequence>& seqs,
                                    std::size_t window, std::size_t keep, std::size_t stride,
                                    std::size_t count, std::uint64_t seed) {
  if (keep > window) fail(ErrorKind::InvalidArgument, "keep must not exceed window");
  if (stride == 0) fail(ErrorKind::InvalidArgument, "stride must be >= 1");
  if (count == 0) fail(ErrorKind::InvalidArgument, "count must be >= 1");

  std::vector<std::size_t> first_index;  // prefix sums of per-sequence window counts
  first_index.reserve(seqs.size() + 1);
  std::size_t total = 0;
  for (const auto& s : seqs) {
    first_index.push_back(total);
    total += window_count(s.size(), window, stride);
  }
  first_index.push_back(total);

  WindowSample result;
  result.candidates = total;
  std::vector<std::size_t> chosen;
  if (count >= total) {
    result.shortfall = count > total;
    chosen.resize(total);
    for (std::size_t i = 0; i < total; ++i) chosen[i] = i;
  } else {
    // Floyd's sampling: exactly `count` distinct draws.
    Rng rng(seed);
    std::unordered_set<std::size_t> picked;
    picked.reserve(count * 2);
    for (std::size_t j = total - count; j < total; ++j) {
      const std::size_t t = rng.below(j + 1);
      if (!picked.insert(t).second) picked.insert(j);
    }
    chosen.assign(picked.begin(), picked.end());
    std::sort(chosen.begin(), chosen.end());
  }

  result.windows.reserve(chosen.size());
  std::size_t seq_idx = 0;
  for (std::size_t g : chosen) {
    while (first_index[seq_idx + 1] <= g) ++seq_idx;
    const auto& s = seqs[seq_idx];
    const std::size_t pos = (g - first_index[seq_idx]) * stride;
    result.windows.push_back(NucleotideSequence{s.bases.substr(pos, keep), s.source_id,
                                                s.offset + pos});
  }
  return result;
}

template <typename T>
struct CorpusSplit {
  std::vector<T> train;
  std::vector<T> test;
  std::uint64_t seed = 0;
};

inline std::size_t train_size(std::size_t n, double train_fraction) {
  return static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
}

// Seeded Fisher-Yates shuffle, then a prefix/suffix cut at round(fraction * N).
template <typename T>
CorpusSplit<T> split(std::vector<T> items, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  rng.shuffle(items);
  const std::size_t cut = train_size(items.size(), train_fraction);
  CorpusSplit<T> out;
  out.seed = seed;
  out.train.assign(std::make_move_iterator(items.begin()),
                   std::make_move_iterator(items.begin() + static_cast<std::ptrdiff_t>(cut)));
  out.test.assign(std::make_move_iterator(items.begin() + static_cast<std::ptrdiff_t>(cut)),
                  std::make_move_iterator(items.end()));
  return out;
}

// {"source_id": ..., "offset": ..., "bases": ...}
inline std::string to_jsonl(const Segment& s) {
  std::string line;
  line.reserve(s.length() + s.seq.source_id.size() + 48);
  line.push_back('{');
  json_text::append_key(line, "source_id", true);
  json_text::append_string(line, s.seq.source_id);
  json_text::append_key(line, "offset");
  json_text::append_int(line, s.seq.offset);
  json_text::append_key(line, "bases");
  json_text::append_string(line, s.bases());
  line += "}\n";
  return line;
}

}  // namespace hybridtok
