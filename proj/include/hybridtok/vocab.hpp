#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hybridtok/bpe.hpp"
#include "hybridtok/errors.hpp"
#include "hybridtok/kmer.hpp"
#include "hybridtok/sequence.hpp"

namespace hybridtok {

using TokenId = std::int32_t;

namespace special {
inline constexpr TokenId kCls = 0;
inline constexpr TokenId kSep = 1;
inline constexpr TokenId kMask = 2;
inline constexpr TokenId kPad = 3;
inline constexpr TokenId kUnk = 4;
inline constexpr std::size_t kCount = 5;
inline constexpr std::array<std::string_view, kCount> kStrings = {"[CLS]", "[SEP]", "[MASK]",
                                                                  "[PAD]", "[UNK]"};

constexpr bool is_special(TokenId id) noexcept { return id >= 0 && id < static_cast<TokenId>(kCount); }
}  // namespace special

struct VocabCounts {
  std::size_t kmer = 0;
  std::size_t bpe = 0;
  std::size_t shared = 0;
  std::size_t special = special::kCount;
  std::size_t total = 0;

  bool operator==(const VocabCounts&) const = default;
};

struct VocabMetadata {
  int k = 0;
  std::size_t bpe_cycles = 0;
  std::string corpus_digest;
  VocabCounts counts;

  bool operator==(const VocabMetadata&) const = default;
};

// Orders non-special tokens: shorter first, then lexicographic.
struct LengthThenLex {
  bool operator()(const std::string& a, const std::string& b) const {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  }
};

// Bidirectional token <-> id map. Ids 0..4 are the special tokens in the order
// [CLS] [SEP] [MASK] [PAD] [UNK]; the rest follow LengthThenLex.
class Vocabulary {
 public:
  Vocabulary() = default;

  Vocabulary(std::vector<std::string> non_special, VocabMetadata meta) : meta_(std::move(meta)) {
    tokens_.reserve(special::kCount + non_special.size());
    for (auto s : special::kStrings) tokens_.emplace_back(s);
    for (auto& t : non_special) tokens_.push_back(std::move(t));
    index();
    meta_.counts.total = tokens_.size();
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  const VocabMetadata& metadata() const noexcept { return meta_; }
  std::span<const std::string> tokens() const noexcept { return tokens_; }
  std::span<const std::string> regular_tokens() const noexcept {
    return std::span<const std::string>(tokens_).subspan(special::kCount);
  }

  std::optional<TokenId> id_of(std::string_view token) const {
    const auto it = ids_.find(std::string(token));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& token_of(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
      fail(ErrorKind::UnknownToken, "token id out of range: " + std::to_string(id));
    }
    return tokens_[static_cast<std::size_t>(id)];
  }

  nlohmann::json to_json() const {
    nlohmann::json specials = nlohmann::json::array();
    for (auto s : special::kStrings) specials.push_back(std::string(s));
    const auto& c = meta_.counts;
    return {{"specials", specials},
            {"tokens", tokens_},
            {"metadata",
             {{"k", meta_.k},
              {"bpe_cycles", meta_.bpe_cycles},
              {"corpus_digest", meta_.corpus_digest},
              {"counts",
               {{"kmer", c.kmer},
                {"bpe", c.bpe},
                {"shared", c.shared},
                {"special", c.special},
                {"total", c.total}}}}}};
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }

  // One token per line; line number (0-based) is the id.
  std::string to_text() const {
    std::string out;
    for (const auto& t : tokens_) out.append(t).push_back('\n');
    return out;
  }

  static Vocabulary from_json(const nlohmann::json& j) {
    Vocabulary v;
    try {
      v.tokens_ = j.at("tokens").get<std::vector<std::string>>();
      const auto& m = j.at("metadata");
      v.meta_.k = m.at("k").get<int>();
      v.meta_.bpe_cycles = m.at("bpe_cycles").get<std::size_t>();
      v.meta_.corpus_digest = m.value("corpus_digest", "");
      const auto& c = m.at("counts");
      v.meta_.counts = {c.at("kmer").get<std::size_t>(), c.at("bpe").get<std::size_t>(),
                        c.at("shared").get<std::size_t>(), c.at("special").get<std::size_t>(),
                        c.at("total").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::MalformedFile, std::string("vocabulary: ") + e.what());
    }
    if (v.tokens_.size() < special::kCount) fail(ErrorKind::MalformedFile, "vocabulary lacks special tokens");
    for (std::size_t i = 0; i < special::kCount; ++i) {
      if (v.tokens_[i] != special::kStrings[i]) {
        fail(ErrorKind::MalformedFile, "special token out of place at id " + std::to_string(i));
      }
    }
    v.index();
    if (v.meta_.counts.total != v.tokens_.size()) {
      fail(ErrorKind::MalformedFile, "vocabulary counts.total does not match token list");
    }
    return v;
  }

  static Vocabulary parse(std::string_view text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::MalformedFile, std::string("vocabulary: ") + e.what());
    }
    return from_json(j);
  }

 private:
  void index() {
    ids_.clear();
    ids_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!ids_.try_emplace(tokens_[i], static_cast<TokenId>(i)).second) {
        fail(ErrorKind::MalformedFile, "duplicate token in vocabulary: " + tokens_[i]);
      }
    }
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  VocabMetadata meta_;
};

// Specials plus the distinct union of both token sets.
inline Vocabulary build_vocabulary(std::span<const std::string> kmer_tokens,
                                   std::span<const std::string> bpe_strings, int k,
                                   std::size_t bpe_cycles, std::string corpus_digest = {}) {
  const std::set<std::string, LengthThenLex> kmers(kmer_tokens.begin(), kmer_tokens.end());
  const std::set<std::string, LengthThenLex> bpe(bpe_strings.begin(), bpe_strings.end());
  std::set<std::string, LengthThenLex> all = kmers;
  all.insert(bpe.begin(), bpe.end());

  VocabMetadata meta;
  meta.k = k;
  meta.bpe_cycles = bpe_cycles;
  meta.corpus_digest = std::move(corpus_digest);
  meta.counts.kmer = kmers.size();
  meta.counts.bpe = bpe.size();
  meta.counts.shared = kmers.size() + bpe.size() - all.size();
  return Vocabulary(std::vector<std::string>(all.begin(), all.end()), std::move(meta));
}

inline Vocabulary build_vocabulary(std::span<const std::string> kmer_tokens, const MergeTable& table) {
  table.validate();
  const int k = kmer_tokens.empty() ? 0 : static_cast<int>(kmer_tokens.front().size());
  const auto bpe = table.distinct_strings();
  return build_vocabulary(kmer_tokens, bpe, k, table.cycles, table.corpus_digest);
}

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const IndexRange&) const = default;
};

// [CLS] kmer... [SEP] bpe... [SEP] with specials, kmer... bpe... without.
struct HybridEncoding {
  std::vector<TokenId> ids;
  IndexRange kmer_region;
  IndexRange bpe_region;
  bool with_specials = false;

  bool operator==(const HybridEncoding&) const = default;
};

enum class UnknownPolicy { strict, lenient };
enum class Region { kmer, bpe };

// Hybrid k-mer + BPE encoder bound to one vocabulary and merge table.
// Immutable after construction; encode() may be called concurrently.
class HybridEncoder {
 public:
  HybridEncoder(const Vocabulary& vocab, const MergeTable& table, int k,
                UnknownPolicy policy = UnknownPolicy::strict)
      : vocab_(&vocab), bpe_(table), k_(k), policy_(policy) {
    KmerConfig::validate(k);
    const std::uint64_t space = kmer_space(k);
    kmer_ids_.assign(space, -1);
    for (std::uint64_t code = 0; code < space; ++code) {
      if (auto id = vocab.id_of(kmer_string(code, k))) kmer_ids_[code] = *id;
    }
    bpe_ids_.assign(bpe_.token_count(), -1);
    for (std::size_t i = 0; i < bpe_.token_count(); ++i) {
      if (auto id = vocab.id_of(bpe_.token(static_cast<BpeEncoder::TokenId>(i)))) bpe_ids_[i] = *id;
    }
  }

  int k() const noexcept { return k_; }
  const Vocabulary& vocabulary() const noexcept { return *vocab_; }
  const BpeEncoder& bpe() const noexcept { return bpe_; }

  void encode(std::string_view bases, bool with_specials, HybridEncoding& out) const {
    const auto uk = static_cast<std::size_t>(k_);
    if (bases.size() < uk) {
      fail(ErrorKind::SequenceTooShort, "segment of length " + std::to_string(bases.size()) +
                                            " is shorter than k=" + std::to_string(k_));
    }
    if (!is_canonical(bases)) fail(ErrorKind::InvalidBase, "segment contains non-ACGT bases");
    thread_local std::vector<BpeEncoder::TokenId> bpe_tokens;
    bpe_.encode_ids(bases, bpe_tokens);

    const std::size_t n_kmer = bases.size() - uk + 1;
    out.with_specials = with_specials;
    out.ids.clear();
    out.ids.reserve(n_kmer + bpe_tokens.size() + 3);
    if (with_specials) out.ids.push_back(special::kCls);
    out.kmer_region.begin = out.ids.size();
    for_each_kmer_code(bases, k_, [&](std::uint64_t code) { out.ids.push_back(resolve(kmer_ids_[code])); });
    out.kmer_region.end = out.ids.size();
    if (with_specials) out.ids.push_back(special::kSep);
    out.bpe_region.begin = out.ids.size();
    for (auto t : bpe_tokens) out.ids.push_back(resolve(bpe_ids_[t]));
    out.bpe_region.end = out.ids.size();
    if (with_specials) out.ids.push_back(special::kSep);
  }

  HybridEncoding encode(std::string_view bases, bool with_specials) const {
    HybridEncoding enc;
    encode(bases, with_specials, enc);
    return enc;
  }

 private:
  TokenId resolve(TokenId id) const {
    if (id >= 0) return id;
    if (policy_ == UnknownPolicy::strict) fail(ErrorKind::UnknownToken, "token missing from vocabulary");
    return special::kUnk;
  }

  const Vocabulary* vocab_;
  BpeEncoder bpe_;
  int k_;
  UnknownPolicy policy_;
  std::vector<TokenId> kmer_ids_;
  std::vector<TokenId> bpe_ids_;
};

inline HybridEncoding hybrid_encode(const Segment& segment, const Vocabulary& vocab,
                                    const MergeTable& table, int k, bool with_specials,
                                    UnknownPolicy policy = UnknownPolicy::strict) {
  return HybridEncoder(vocab, table, k, policy).encode(segment.bases(), with_specials);
}

// Rebuilds the segment bases from one region of an encoding.
inline std::string decode_region(const HybridEncoding& enc, Region region, const Vocabulary& vocab) {
  const IndexRange r = region == Region::kmer ? enc.kmer_region : enc.bpe_region;
  if (r.end > enc.ids.size() || r.begin > r.end) {
    fail(ErrorKind::InvariantViolation, "region outside encoding");
  }
  std::string out;
  const std::string* prev = nullptr;
  for (std::size_t i = r.begin; i < r.end; ++i) {
    const TokenId id = enc.ids[i];
    if (special::is_special(id)) {
      fail(ErrorKind::LossyEncoding, "special token " + vocab.token_of(id) + " inside region");
    }
    const std::string& tok = vocab.token_of(id);
    if (region == Region::bpe || prev == nullptr) {
      out += tok;
    } else {
      if (tok.size() != prev->size() ||
          std::string_view(tok).substr(0, tok.size() - 1) != std::string_view(*prev).substr(1)) {
        fail(ErrorKind::LossyEncoding, "adjacent k-mers do not overlap");
      }
      out.push_back(tok.back());
    }
    prev = &tok;
  }
  return out;
}

}  // namespace hybridtok
