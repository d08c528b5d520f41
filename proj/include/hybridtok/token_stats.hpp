#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hybridtok/bpe.hpp"
#include "hybridtok/errors.hpp"
#include "hybridtok/kmer.hpp"
#include "hybridtok/parallel.hpp"
#include "hybridtok/sequence.hpp"
#include "hybridtok/vocab.hpp"

namespace hybridtok {

// Gini coefficient of a count vector, zeros included:
//   G = sum_i sum_j |x_i - x_j| / (2 n^2 mean)
// evaluated in O(n log n) through the sorted-rank identity.
inline double gini(std::vector<std::uint64_t> counts) {
  const std::size_t n = counts.size();
  if (n == 0) return 0.0;
  std::sort(counts.begin(), counts.end());
  long double total = 0;
  long double weighted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += counts[i];
    weighted += static_cast<long double>(i + 1) * counts[i];
  }
  if (total == 0) return 0.0;
  const long double nn = static_cast<long double>(n);
  const long double g = (2 * weighted) / (nn * total) - (nn + 1) / nn;
  return static_cast<double>(std::clamp<long double>(g, 0, 1));
}

struct TokenStatsReport {
  std::map<std::string, std::uint64_t, std::less<>> frequency;
  double gini = 0.0;
  double vocab_utilization = 0.0;
  double tokens_per_nt = 0.0;
  std::map<std::size_t, std::uint64_t> length_histogram;
  std::uint64_t total_tokens = 0;
  std::uint64_t nucleotides = 0;
  std::uint64_t out_of_vocabulary = 0;  // tokens not in the universe; excluded from gini
};

// Accumulates token counts; shards merge by summation, so the result does not
// depend on how the stream was partitioned.
class TokenCounter {
 public:
  void add(std::string_view token, std::uint64_t times = 1) {
    auto it = counts_.find(token);
    if (it == counts_.end()) it = counts_.emplace(std::string(token), 0).first;
    it->second += times;
    total_ += times;
  }

  void merge(const TokenCounter& other) {
    for (const auto& [t, c] : other.counts_) add(t, c);
  }

  std::uint64_t total() const noexcept { return total_; }

  // Statistics against `universe`, the token set whose usage is being judged.
  TokenStatsReport report(std::span<const std::string> universe, std::uint64_t nucleotides) const {
    if (total_ == 0) fail(ErrorKind::EmptyStream, "no tokens to summarise");
    TokenStatsReport r;
    r.frequency = counts_;
    r.total_tokens = total_;
    r.nucleotides = nucleotides;
    r.tokens_per_nt = nucleotides ? static_cast<double>(total_) / static_cast<double>(nucleotides) : 0.0;
    for (const auto& [t, c] : counts_) r.length_histogram[t.size()] += c;

    const std::set<std::string_view> members(universe.begin(), universe.end());
    std::vector<std::uint64_t> vec;
    vec.reserve(members.size());
    std::uint64_t used = 0;
    std::uint64_t in_universe = 0;
    for (std::string_view t : members) {
      const auto it = counts_.find(t);
      const std::uint64_t c = it == counts_.end() ? 0 : it->second;
      vec.push_back(c);
      used += c > 0;
      in_universe += c;
    }
    r.out_of_vocabulary = total_ - in_universe;
    r.gini = gini(std::move(vec));
    r.vocab_utilization = members.empty() ? 0.0 : static_cast<double>(used) / static_cast<double>(members.size());
    return r;
  }

 private:
  std::map<std::string, std::uint64_t, std::less<>> counts_;
  std::uint64_t total_ = 0;
};

template <typename Range>
TokenStatsReport compute_stats(const Range& token_stream, std::span<const std::string> universe,
                               std::uint64_t nucleotides = 0) {
  TokenCounter counter;
  for (const auto& t : token_stream) counter.add(t);
  return counter.report(universe, nucleotides);
}

// Universe = the vocabulary's non-special tokens.
template <typename Range>
TokenStatsReport compute_stats(const Range& token_stream, const Vocabulary& vocab,
                               std::uint64_t nucleotides = 0) {
  return compute_stats(token_stream, vocab.regular_tokens(), nucleotides);
}

struct TokenizerScheme {
  enum class Kind { kmer, bpe, hybrid };
  Kind kind = Kind::kmer;
  int k = 6;
  const MergeTable* table = nullptr;

  std::string name() const {
    switch (kind) {
      case Kind::kmer: return "kmer" + std::to_string(k);
      case Kind::bpe: return "bpe" + std::to_string(table ? table->cycles : 0);
      case Kind::hybrid: return "hybrid";
    }
    return "?";
  }
};

struct SchemeRow {
  std::string scheme;
  TokenStatsReport report;
  double nt_per_sec = 0.0;
};

namespace detail {

inline std::vector<std::string> union_of(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace detail

// Tokenizes the corpus under each scheme (bare encodings) and reports usage
// statistics plus wall-clock throughput. Counting is sharded per thread and
// merged by summation; only nt_per_sec depends on `threads`.
template <typename Range>
std::vector<SchemeRow> compare_tokenizers(const Range& corpus, std::span<const TokenizerScheme> schemes,
                                          unsigned threads = 1) {
  if (schemes.empty()) fail(ErrorKind::InvalidArgument, "no tokenizer schemes given");
  std::vector<std::string_view> seqs;
  std::uint64_t nt = 0;
  for (const auto& s : corpus) {
    seqs.push_back(bases_view(s));
    nt += seqs.back().size();
  }
  threads = std::max(1u, threads);

  std::vector<SchemeRow> rows;
  for (const auto& scheme : schemes) {
    const bool use_kmer = scheme.kind != TokenizerScheme::Kind::bpe;
    const bool use_bpe = scheme.kind != TokenizerScheme::Kind::kmer;
    if (use_kmer) KmerConfig::validate(scheme.k);
    if (use_bpe && scheme.table == nullptr) {
      fail(ErrorKind::InvalidArgument, scheme.name() + " scheme needs a merge table");
    }
    std::optional<BpeEncoder> bpe;
    if (use_bpe) bpe.emplace(*scheme.table);

    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t kspace = use_kmer ? kmer_space(scheme.k) : 0;
    std::vector<std::vector<std::uint64_t>> kmer_counts(threads, std::vector<std::uint64_t>(kspace));
    std::vector<std::vector<std::uint64_t>> bpe_counts(threads);
    parallel_for(threads, threads, [&](std::size_t w) {
      std::vector<BpeEncoder::TokenId> ids;
      auto& kc = kmer_counts[w];
      auto& bc = bpe_counts[w];
      for (std::size_t i = seqs.size() * w / threads; i < seqs.size() * (w + 1) / threads; ++i) {
        if (use_kmer) for_each_kmer_code(seqs[i], scheme.k, [&](std::uint64_t code) { ++kc[code]; });
        if (use_bpe) {
          bpe->encode_ids(seqs[i], ids);
          for (auto id : ids) {
            if (id >= bc.size()) bc.resize(id + 1);
            ++bc[id];
          }
        }
      }
    });
    TokenCounter counter;
    for (std::size_t w = 0; w < threads; ++w) {
      for (std::size_t code = 0; code < kspace; ++code) {
        if (kmer_counts[w][code]) counter.add(kmer_string(code, scheme.k), kmer_counts[w][code]);
      }
      for (std::size_t id = 0; id < bpe_counts[w].size(); ++id) {
        if (bpe_counts[w][id]) counter.add(bpe->token(static_cast<BpeEncoder::TokenId>(id)), bpe_counts[w][id]);
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<std::string> universe;
    if (use_kmer) universe = kmer_vocabulary(scheme.k);
    if (use_bpe) universe = detail::union_of(std::move(universe), scheme.table->distinct_strings());

    SchemeRow row;
    row.scheme = scheme.name();
    row.report = counter.report(universe, nt);
    row.nt_per_sec = secs > 0 ? static_cast<double>(nt) / secs : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string render_csv(std::span<const SchemeRow> rows) {
  std::string out = "scheme,total_tokens,tokens_per_nt,gini,vocab_utilization,nt_per_sec\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%.6f,%.6f,%.6f,%.0f\n", r.scheme.c_str(),
                  static_cast<unsigned long long>(r.report.total_tokens), r.report.tokens_per_nt,
                  r.report.gini, r.report.vocab_utilization, r.nt_per_sec);
    out += buf;
  }
  return out;
}

inline std::string render_markdown(std::span<const SchemeRow> rows) {
  std::string out =
      "| scheme | total_tokens | tokens_per_nt | gini | vocab_utilization | nt_per_sec |\n"
      "|---|---:|---:|---:|---:|---:|\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "| %s | %llu | %.6f | %.6f | %.6f | %.0f |\n", r.scheme.c_str(),
                  static_cast<unsigned long long>(r.report.total_tokens), r.report.tokens_per_nt,
                  r.report.gini, r.report.vocab_utilization, r.nt_per_sec);
    out += buf;
  }
  return out;
}

}  // namespace hybridtok
