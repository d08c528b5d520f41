#pragma once

// Deliberately naive BPE trainer used only as a test oracle: full rescans,
// string tokens, an ordered map of pair counts. Shares no code with the
// production trainer beyond the MergeTable value type.

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hybridtok/bpe.hpp"

namespace hybridtok::testing {

inline constexpr std::size_t kOracleMaxBases = 10'000;

template <typename R>
MergeTable bpe_oracle_train(const R& corpus, std::size_t cycles, long min_pair_count = 1) {
  std::vector<std::vector<std::string>> work;
  std::size_t total = 0;
  for (const auto& s : corpus) {
    const std::string_view b = bases_view(s);
    total += b.size();
    auto& seq = work.emplace_back();
    for (char c : b) seq.emplace_back(1, c);
  }
  if (total == 0) fail(ErrorKind::EmptyCorpus, "oracle corpus is empty");
  if (total > kOracleMaxBases) fail(ErrorKind::CorpusTooLarge, "oracle corpus exceeds 10,000 nt");

  MergeTable table;
  table.requested_cycles = cycles;
  for (std::size_t cycle = 0; cycle < cycles; ++cycle) {
    std::map<std::pair<std::string, std::string>, long> counts;
    for (const auto& seq : work) {
      for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++counts[{seq[i], seq[i + 1]}];
    }
    // std::map iterates in lexicographic (left, right) order, so the first
    // maximum found is the tie-break winner.
    const std::pair<std::string, std::string>* best = nullptr;
    long best_count = 0;
    for (const auto& [pair, c] : counts) {
      if (c > best_count) {
        best = &pair;
        best_count = c;
      }
    }
    if (best == nullptr || best_count < std::max(1L, min_pair_count)) {
      table.early_stop = true;
      break;
    }
    const auto [left, right] = *best;
    const std::string merged = left + right;
    for (auto& seq : work) {
      std::vector<std::string> next;
      for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(seq[i]);
        }
      }
      seq = std::move(next);
    }
    table.rules.push_back({left, right, merged, table.rules.size()});
  }
  table.cycles = table.rules.size();
  table.corpus_digest = corpus_digest(corpus);
  return table;
}

// Rank-order application of every rule, one full pass per rule.
inline std::vector<std::string> bpe_oracle_encode(std::string_view seq, const MergeTable& table) {
  std::vector<std::string> toks;
  for (char c : seq) toks.emplace_back(1, c);
  for (const auto& r : table.rules) {
    std::vector<std::string> next;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (i + 1 < toks.size() && toks[i] == r.left && toks[i + 1] == r.right) {
        next.push_back(r.result);
        ++i;
      } else {
        next.push_back(toks[i]);
      }
    }
    toks = std::move(next);
  }
  return toks;
}

}  // namespace hybridtok::testing
