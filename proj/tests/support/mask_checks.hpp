#pragma once

// Output-only checks of a MaskedExample against the encoding it came from.

#include <string>
#include <vector>

#include "hybridtok/masking.hpp"

namespace hybridtok::testing {

// Empty string when every invariant holds, else a description of the first violation.
inline std::string check_masked(const HybridEncoding& enc, const MaskedExample& ex, std::size_t span) {
  const std::size_t n = enc.ids.size();
  if (ex.input_ids.size() != n || ex.target_ids.size() != n) return "length mismatch";
  std::vector<bool> masked(n, false);
  for (std::size_t i = 0; i < ex.mask_positions.size(); ++i) {
    const std::size_t p = ex.mask_positions[i];
    if (p >= n) return "mask position out of range";
    if (i && ex.mask_positions[i - 1] >= p) return "mask positions not strictly increasing";
    masked[p] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (special::is_special(enc.ids[i]) && masked[i]) return "special token masked";
    if ((ex.input_ids[i] == special::kMask) != masked[i]) return "[MASK] placement mismatch";
    if (masked[i] && ex.target_ids[i] != enc.ids[i]) return "target is not the original id";
    if (!masked[i] && ex.target_ids[i] != kIgnoreTarget) return "target set at unmasked position";
    if (!masked[i] && ex.input_ids[i] != enc.ids[i]) return "unmasked position altered";
    const bool in_region = (i >= enc.kmer_region.begin && i < enc.kmer_region.end) ||
                           (i >= enc.bpe_region.begin && i < enc.bpe_region.end);
    if (masked[i] && !in_region) return "mask outside both regions";
  }
  // Runs inside the k-mer region: exactly `span` long unless touching a region edge.
  const std::size_t b = enc.kmer_region.begin;
  const std::size_t e = enc.kmer_region.end;
  for (std::size_t i = b; i < e;) {
    if (!masked[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < e && masked[j]) ++j;
    const std::size_t len = j - i;
    const bool clipped = i == b || j == e;
    if (len > span || (len < span && !clipped)) {
      return "k-mer mask run of length " + std::to_string(len) + " at " + std::to_string(i);
    }
    i = j;
  }
  return {};
}

}  // namespace hybridtok::testing
