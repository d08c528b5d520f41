#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hybridtok/errors.hpp"
#include "hybridtok/sequence.hpp"

namespace hybridtok {

struct KmerConfig {
  static constexpr int kMinK = 1;
  static constexpr int kMaxK = 12;  // keeps 4^k enumerable
  int k = 6;

  static void validate(int k) {
    if (k < kMinK || k > kMaxK) {
      fail(ErrorKind::InvalidArgument, "k must lie in [1, 12], got " + std::to_string(k));
    }
  }
};

constexpr std::uint64_t kmer_space(int k) noexcept { return std::uint64_t{1} << (2 * k); }

// Overlapping k-mers: |s| - k + 1 tokens, token i = s[i, i+k).
inline std::vector<std::string> kmer_tokenize(std::string_view seq, int k) {
  KmerConfig::validate(k);
  const auto uk = static_cast<std::size_t>(k);
  if (seq.size() < uk) {
    fail(ErrorKind::SequenceTooShort, "sequence of length " + std::to_string(seq.size()) +
                                          " is shorter than k=" + std::to_string(k));
  }
  std::vector<std::string> out;
  out.reserve(seq.size() - uk + 1);
  for (std::size_t i = 0; i + uk <= seq.size(); ++i) out.emplace_back(seq.substr(i, uk));
  return out;
}

// Base-4 value, most significant base first. Requires canonical bases.
constexpr std::uint64_t kmer_code(std::string_view kmer) {
  std::uint64_t code = 0;
  for (char c : kmer) {
    const int b = base_code(c);
    if (b < 0) fail(ErrorKind::InvalidBase, "invalid base '" + std::string(1, c) + "'");
    code = (code << 2) | static_cast<std::uint64_t>(b);
  }
  return code;
}

inline std::string kmer_string(std::uint64_t code, int k) {
  std::string s(static_cast<std::size_t>(k), 'A');
  for (int i = k - 1; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kBases[code & 3];
    code >>= 2;
  }
  return s;
}

// Rolling codes of every overlapping k-mer in `seq` (canonical bases assumed).
template <typename Fn>
void for_each_kmer_code(std::string_view seq, int k, Fn&& fn) {
  const auto uk = static_cast<std::size_t>(k);
  if (seq.size() < uk) return;
  const std::uint64_t mask = kmer_space(k) - 1;
  std::uint64_t code = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    code = ((code << 2) | static_cast<std::uint64_t>(base_code(seq[i]))) & mask;
    if (i + 1 >= uk) fn(code);
  }
}

// All 4^k k-mers in lexicographic order under A < C < G < T.
inline std::vector<std::string> kmer_vocabulary(int k) {
  KmerConfig::validate(k);
  const std::uint64_t n = kmer_space(k);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::uint64_t code = 0; code < n; ++code) out.push_back(kmer_string(code, k));
  return out;
}

}  // namespace hybridtok
