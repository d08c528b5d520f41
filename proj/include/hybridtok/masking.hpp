#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "hybridtok/errors.hpp"
#include "hybridtok/io.hpp"
#include "hybridtok/parallel.hpp"
#include "hybridtok/rng.hpp"
#include "hybridtok/vocab.hpp"

namespace hybridtok {

// Target value at positions that carry no loss.
inline constexpr TokenId kIgnoreTarget = -100;

struct MaskingConfig {
  double mask_probability = 0.15;
  // Positions masked around a selected k-mer anchor (anchor = 0).
  std::vector<int> span_offsets{-2, -1, 0, 1, 2, 3};
  std::uint64_t seed = 0;

  void validate() const {
    if (!(mask_probability > 0.0 && mask_probability < 1.0)) {
      fail(ErrorKind::InvalidArgument, "mask probability must lie in (0, 1)");
    }
    if (span_offsets.empty()) fail(ErrorKind::InvalidArgument, "span offsets must not be empty");
    for (std::size_t i = 1; i < span_offsets.size(); ++i) {
      if (span_offsets[i] != span_offsets[i - 1] + 1) {
        fail(ErrorKind::InvalidArgument, "span offsets must be contiguous and ascending");
      }
    }
    if (span_offsets.front() > 0 || span_offsets.back() < 0) {
      fail(ErrorKind::InvalidArgument, "span offsets must contain 0");
    }
  }

  std::size_t span_length() const noexcept { return span_offsets.size(); }
};

struct MaskedExample {
  std::vector<TokenId> input_ids;
  std::vector<TokenId> target_ids;
  std::vector<std::size_t> mask_positions;

  bool operator==(const MaskedExample&) const = default;
};

// Span masking over the k-mer region, independent token masking over the BPE
// region. The k-mer pass scans anchors left to right; an anchor is eligible
// only if its (boundary-clipped) span would start at least one position past
// the previous span, so spans never overlap or touch. Each eligible anchor is
// selected with the mask probability. Special-token positions lie outside both
// regions and are never touched.
inline MaskedExample mask_hybrid(const HybridEncoding& enc, const MaskingConfig& cfg) {
  cfg.validate();
  const IndexRange kr = enc.kmer_region;
  const IndexRange br = enc.bpe_region;
  if (kr.size() < cfg.span_length()) {
    fail(ErrorKind::RegionTooSmall, "k-mer region of " + std::to_string(kr.size()) +
                                        " tokens is shorter than the mask span");
  }

  MaskedExample ex;
  ex.input_ids = enc.ids;
  ex.target_ids.assign(enc.ids.size(), kIgnoreTarget);
  auto mask = [&](std::size_t i) {
    ex.input_ids[i] = special::kMask;
    ex.target_ids[i] = enc.ids[i];
    ex.mask_positions.push_back(i);
  };

  Rng rng(cfg.seed);
  const auto lo = static_cast<std::int64_t>(cfg.span_offsets.front());
  const auto hi = static_cast<std::int64_t>(cfg.span_offsets.back());
  const auto begin = static_cast<std::int64_t>(kr.begin);
  const auto end = static_cast<std::int64_t>(kr.end);
  std::int64_t last_end = begin - 2;  // last masked index; begin - 2 leaves the first anchor eligible
  for (std::int64_t anchor = begin; anchor < end; ++anchor) {
    const std::int64_t first = std::max(begin, anchor + lo);
    if (first <= last_end + 1) continue;
    if (!rng.bernoulli(cfg.mask_probability)) continue;
    const std::int64_t last = std::min(end - 1, anchor + hi);
    for (std::int64_t i = first; i <= last; ++i) mask(static_cast<std::size_t>(i));
    last_end = last;
  }

  for (std::size_t i = br.begin; i < br.end; ++i) {
    if (rng.bernoulli(cfg.mask_probability)) mask(i);
  }
  return ex;
}

inline std::string to_jsonl(const MaskedExample& ex, const NucleotideSequence& source) {
  std::string line;
  line.reserve(ex.input_ids.size() * 10 + 64);
  line.push_back('{');
  json_text::append_key(line, "input_ids", true);
  json_text::append_array<TokenId>(line, ex.input_ids);
  json_text::append_key(line, "target_ids");
  json_text::append_array<TokenId>(line, ex.target_ids);
  json_text::append_key(line, "mask_positions");
  json_text::append_array<std::size_t>(line, ex.mask_positions);
  json_text::append_key(line, "source_id");
  json_text::append_string(line, source.source_id);
  json_text::append_key(line, "offset");
  json_text::append_int(line, source.offset);
  line += "}\n";
  return line;
}

// One masked example per segment, in input order. Per-segment seeds derive from
// (cfg.seed, index), so output does not depend on the thread count.
template <typename Sink>
void emit_mlm_corpus(const std::vector<Segment>& segments, const HybridEncoder& encoder,
                     const MaskingConfig& cfg, bool with_specials, unsigned threads, Sink&& sink) {
  cfg.validate();
  ordered_emit(
      segments.size(), threads,
      [&](std::size_t i) {
        const Segment& s = segments[i];
        try {
          MaskingConfig local = cfg;
          local.seed = derive_seed(cfg.seed, i);
          const auto enc = encoder.encode(s.bases(), with_specials);
          return to_jsonl(mask_hybrid(enc, local), s.seq);
        } catch (const Error& e) {
          throw Error(e.kind(), "segment " + std::to_string(i) + " (" + s.seq.source_id + ":" +
                                    std::to_string(s.seq.offset) + "): " + e.what());
        }
      },
      sink);
}

}  // namespace hybridtok
