#pragma once

#include <concepts>
#include <cstddef>
#include <string>
#include <string_view>

namespace hybridtok {

// A run of canonical bases (A/C/G/T only) cut from a named source record.
struct NucleotideSequence {
  std::string bases;
  std::string source_id;
  std::size_t offset = 0;

  std::size_t size() const noexcept { return bases.size(); }
  bool operator==(const NucleotideSequence&) const = default;
};

// Fixed-length window of a NucleotideSequence; the unit of tokenization.
struct Segment {
  NucleotideSequence seq;

  std::string_view bases() const noexcept { return seq.bases; }
  std::size_t length() const noexcept { return seq.bases.size(); }
  bool operator==(const Segment&) const = default;
};

inline std::string_view bases_view(std::string_view s) noexcept { return s; }
inline std::string_view bases_view(const std::string& s) noexcept { return s; }
inline std::string_view bases_view(const char* s) noexcept { return s; }
inline std::string_view bases_view(const NucleotideSequence& s) noexcept { return s.bases; }
inline std::string_view bases_view(const Segment& s) noexcept { return s.seq.bases; }

template <typename T>
concept BasesLike = requires(const T& t) {
  { bases_view(t) } -> std::convertible_to<std::string_view>;
};

// A=0 C=1 G=2 T=3, anything else -1.
constexpr int base_code(char c) noexcept {
  switch (c) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return -1;
  }
}

constexpr char kBases[4] = {'A', 'C', 'G', 'T'};

constexpr bool is_canonical(std::string_view s) noexcept {
  for (char c : s) {
    if (base_code(c) < 0) return false;
  }
  return true;
}

}  // namespace hybridtok
