#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <ranges>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hybridtok/digest.hpp"
#include "hybridtok/errors.hpp"
#include "hybridtok/sequence.hpp"

namespace hybridtok {

struct MergeRule {
  std::string left;
  std::string right;
  std::string result;  // left + right
  std::size_t rank = 0;

  bool operator==(const MergeRule&) const = default;
};

// Ordered merge rules learned by BPE training. `cycles` counts completed
// cycles and always equals rules.size(); `requested_cycles` is what the caller
// asked for, and early_stop records that training ran out of eligible pairs.
struct MergeTable {
  std::vector<std::string> alphabet{"A", "C", "G", "T"};
  std::vector<MergeRule> rules;
  std::size_t cycles = 0;
  std::size_t requested_cycles = 0;
  std::string corpus_digest;
  bool early_stop = false;

  bool operator==(const MergeTable&) const = default;

  // Alphabet plus every rule result, deduplicated and sorted.
  std::vector<std::string> distinct_strings() const {
    std::set<std::string> s(alphabet.begin(), alphabet.end());
    for (const auto& r : rules) s.insert(r.result);
    return {s.begin(), s.end()};
  }

  // Table holding only the first n rules of this one.
  MergeTable prefix(std::size_t n) const {
    MergeTable t = *this;
    t.rules.resize(std::min(n, rules.size()));
    t.cycles = t.rules.size();
    t.requested_cycles = t.rules.size();
    t.early_stop = false;
    return t;
  }

  void validate() const {
    if (alphabet != std::vector<std::string>{"A", "C", "G", "T"}) {
      fail(ErrorKind::InvalidMergeTable, "alphabet must be [A, C, G, T]");
    }
    if (cycles != rules.size()) {
      fail(ErrorKind::InvalidMergeTable, "cycles does not match the number of rules");
    }
    std::set<std::string, std::less<>> known(alphabet.begin(), alphabet.end());
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const auto& r = rules[i];
      if (r.rank != i) fail(ErrorKind::InvalidMergeTable, "rule ranks must be contiguous");
      if (!known.contains(r.left) || !known.contains(r.right)) {
        fail(ErrorKind::InvalidMergeTable,
             "rule " + std::to_string(i) + " uses an operand not produced by earlier rules");
      }
      if (r.result != r.left + r.right) {
        fail(ErrorKind::InvalidMergeTable, "rule " + std::to_string(i) + " result mismatch");
      }
      known.insert(r.result);
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rules) rs.push_back({r.left, r.right});
    return {{"alphabet", alphabet},
            {"rules", rs},
            {"cycles", cycles},
            {"requested_cycles", requested_cycles},
            {"corpus_digest", corpus_digest},
            {"early_stop", early_stop}};
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }

  static MergeTable from_json(const nlohmann::json& j) {
    MergeTable t;
    try {
      t.alphabet = j.at("alphabet").get<std::vector<std::string>>();
      for (const auto& pair : j.at("rules")) {
        if (!pair.is_array() || pair.size() != 2) {
          fail(ErrorKind::InvalidMergeTable, "each rule must be a [left, right] pair");
        }
        MergeRule r;
        r.left = pair[0].get<std::string>();
        r.right = pair[1].get<std::string>();
        r.result = r.left + r.right;
        r.rank = t.rules.size();
        t.rules.push_back(std::move(r));
      }
      t.cycles = j.at("cycles").get<std::size_t>();
      t.requested_cycles = j.value("requested_cycles", t.cycles);
      t.corpus_digest = j.value("corpus_digest", "");
      t.early_stop = j.value("early_stop", false);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::InvalidMergeTable, e.what());
    }
    t.validate();
    return t;
  }

  static MergeTable parse(std::string_view text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::InvalidMergeTable, e.what());
    }
    return from_json(j);
  }
};

namespace detail {

using TokenId = std::uint32_t;
inline constexpr std::int32_t kNone = -1;

inline std::uint64_t pair_key(TokenId l, TokenId r) noexcept {
  return (static_cast<std::uint64_t>(l) << 32) | r;
}

// Interned token strings; ids 0..3 are A, C, G, T.
class TokenPool {
 public:
  TokenPool() {
    for (char b : kBases) intern(std::string(1, b));
  }

  TokenId intern(const std::string& s) {
    auto [it, inserted] = ids_.try_emplace(s, static_cast<TokenId>(strings_.size()));
    if (inserted) strings_.push_back(s);
    return it->second;
  }

  const std::string& str(TokenId id) const { return strings_[id]; }
  std::size_t size() const noexcept { return strings_.size(); }

 private:
  std::unordered_map<std::string, TokenId> ids_;
  std::vector<std::string> strings_;
};

template <typename R>
concept SequenceRange =
    std::ranges::input_range<R> && BasesLike<std::ranges::range_value_t<R>>;

// Incremental BPE trainer. Adjacent-pair counts are kept exact under every
// local edit, so each cycle costs time proportional to the occurrences it
// rewrites instead of a full corpus rescan.
class BpeTrainer {
 public:
  template <SequenceRange R>
  BpeTrainer(const R& corpus, std::int64_t min_pair_count)
      : min_count_(std::max<std::int64_t>(1, min_pair_count)) {
    std::size_t total = 0;
    std::size_t count = 0;
    for (const auto& s : corpus) {
      total += bases_view(s).size();
      ++count;
    }
    if (count == 0 || total == 0) fail(ErrorKind::EmptyCorpus, "BPE training corpus is empty");
    if (total >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
      fail(ErrorKind::CorpusTooLarge, "BPE training corpus exceeds 2^31 bases");
    }
    tok_.reserve(total);
    prev_.reserve(total);
    next_.reserve(total);
    for (const auto& s : corpus) {
      const std::string_view b = bases_view(s);
      const auto start = static_cast<std::int32_t>(tok_.size());
      for (std::size_t i = 0; i < b.size(); ++i) {
        const int code = base_code(b[i]);
        if (code < 0) fail(ErrorKind::InvalidBase, "non-ACGT base in BPE training corpus");
        const auto pos = static_cast<std::int32_t>(tok_.size());
        tok_.push_back(static_cast<std::int32_t>(code));
        prev_.push_back(i == 0 ? kNone : pos - 1);
        next_.push_back(i + 1 == b.size() ? kNone : pos + 1);
      }
      if (!b.empty()) starts_.push_back(start);
    }
    for (std::size_t i = 0; i < tok_.size(); ++i) {
      if (next_[i] != kNone) add(tok_[i], tok_[static_cast<std::size_t>(next_[i])], static_cast<std::int32_t>(i));
    }
    for (const auto& [key, c] : counts_) push(key, c);
  }

  // Runs up to `cycles` merge cycles; stops early once no pair reaches the
  // minimum count.
  MergeTable run(std::size_t cycles) {
    MergeTable table;
    table.requested_cycles = cycles;
    while (table.rules.size() < cycles) {
      const auto best = pop_best();
      if (!best) {
        table.early_stop = true;
        break;
      }
      const auto [l, r] = *best;
      MergeRule rule{pool_.str(l), pool_.str(r), pool_.str(l) + pool_.str(r), table.rules.size()};
      const TokenId merged = pool_.intern(rule.result);
      apply(l, r, merged);
      table.rules.push_back(std::move(rule));
    }
    table.cycles = table.rules.size();
    return table;
  }

  // Current token strings of every training sequence.
  std::vector<std::vector<std::string>> working_corpus() const {
    std::vector<std::vector<std::string>> out;
    out.reserve(starts_.size());
    for (std::int32_t pos : starts_) {
      auto& seq = out.emplace_back();
      for (std::int32_t i = pos; i != kNone; i = next_[static_cast<std::size_t>(i)]) {
        seq.push_back(pool_.str(static_cast<TokenId>(tok_[static_cast<std::size_t>(i)])));
      }
    }
    return out;
  }

 private:
  struct Candidate {
    std::int64_t count;
    TokenId left;
    TokenId right;
  };

  // Heap order: highest count first, then lexicographically smallest (left, right).
  bool lower_priority(const Candidate& a, const Candidate& b) const {
    if (a.count != b.count) return a.count < b.count;
    const auto& al = pool_.str(a.left);
    const auto& bl = pool_.str(b.left);
    if (al != bl) return al > bl;
    return pool_.str(a.right) > pool_.str(b.right);
  }

  void push(std::uint64_t key, std::int64_t count) {
    if (count < min_count_) return;
    heap_.push_back({count, static_cast<TokenId>(key >> 32), static_cast<TokenId>(key & 0xFFFFFFFFu)});
    std::push_heap(heap_.begin(), heap_.end(),
                   [this](const Candidate& a, const Candidate& b) { return lower_priority(a, b); });
  }

  std::optional<std::pair<TokenId, TokenId>> pop_best() {
    auto cmp = [this](const Candidate& a, const Candidate& b) { return lower_priority(a, b); };
    while (!heap_.empty()) {
      std::pop_heap(heap_.begin(), heap_.end(), cmp);
      const Candidate c = heap_.back();
      heap_.pop_back();
      const auto it = counts_.find(pair_key(c.left, c.right));
      // Entries go stale whenever a count changes; only the current value counts.
      if (it != counts_.end() && it->second == c.count) return std::pair{c.left, c.right};
    }
    return std::nullopt;
  }

  void add(std::int32_t l, std::int32_t r, std::int32_t pos) {
    const auto key = pair_key(static_cast<TokenId>(l), static_cast<TokenId>(r));
    ++counts_[key];
    positions_[key].push_back(pos);
  }

  void bump(std::int32_t l, std::int32_t r, std::int32_t pos) {
    const auto key = pair_key(static_cast<TokenId>(l), static_cast<TokenId>(r));
    const auto c = ++counts_[key];
    positions_[key].push_back(pos);
    push(key, c);
  }

  void drop(std::int32_t l, std::int32_t r) {
    const auto key = pair_key(static_cast<TokenId>(l), static_cast<TokenId>(r));
    const auto it = counts_.find(key);
    if (it == counts_.end() || it->second <= 0) {
      fail(ErrorKind::InvariantViolation, "pair count underflow during BPE training");
    }
    if (--it->second == 0) {
      counts_.erase(it);
    } else {
      push(key, it->second);
    }
  }

  // Left-to-right, non-overlapping replacement of (l, r) in every sequence.
  void apply(TokenId l, TokenId r, TokenId merged) {
    const auto key = pair_key(l, r);
    auto node = positions_.extract(key);
    if (node.empty()) return;
    std::vector<std::int32_t> where = std::move(node.mapped());
    std::sort(where.begin(), where.end());
    where.erase(std::unique(where.begin(), where.end()), where.end());

    const auto li = static_cast<std::int32_t>(l);
    const auto ri = static_cast<std::int32_t>(r);
    const auto mi = static_cast<std::int32_t>(merged);
    for (std::int32_t i : where) {
      const auto ui = static_cast<std::size_t>(i);
      if (tok_[ui] != li) continue;
      const std::int32_t j = next_[ui];
      if (j == kNone || tok_[static_cast<std::size_t>(j)] != ri) continue;
      const std::int32_t p = prev_[ui];
      const std::int32_t n = next_[static_cast<std::size_t>(j)];

      if (p != kNone) drop(tok_[static_cast<std::size_t>(p)], li);
      drop(li, ri);
      if (n != kNone) drop(ri, tok_[static_cast<std::size_t>(n)]);

      tok_[ui] = mi;
      tok_[static_cast<std::size_t>(j)] = kNone;
      next_[ui] = n;
      if (n != kNone) prev_[static_cast<std::size_t>(n)] = i;

      if (p != kNone) bump(tok_[static_cast<std::size_t>(p)], mi, p);
      if (n != kNone) bump(mi, tok_[static_cast<std::size_t>(n)], i);
    }
    if (counts_.contains(key)) {
      fail(ErrorKind::InvariantViolation, "merged pair still present after replacement");
    }
  }

  std::int64_t min_count_;
  TokenPool pool_;
  std::vector<std::int32_t> tok_;
  std::vector<std::int32_t> prev_;
  std::vector<std::int32_t> next_;
  std::vector<std::int32_t> starts_;
  std::unordered_map<std::uint64_t, std::int64_t> counts_;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> positions_;
  std::vector<Candidate> heap_;
};

}  // namespace detail

// Trains `cycles` BPE merges. Each cycle picks the most frequent adjacent pair
// (every adjacent position counts, overlaps included), breaking ties by the
// lexicographically smallest (left, right), and rewrites its occurrences
// left-to-right without overlap inside each sequence. Training stops early when
// the most frequent pair occurs fewer than `min_pair_count` times; the default
// of 1 merges until no adjacent pair is left.
template <detail::SequenceRange R>
MergeTable bpe_train(const R& corpus, std::size_t cycles, std::int64_t min_pair_count = 1) {
  detail::BpeTrainer trainer(corpus, min_pair_count);
  MergeTable table = trainer.run(cycles);
  table.corpus_digest = corpus_digest(corpus);
  return table;
}

// Applies a MergeTable in rank order. Immutable after construction and safe to
// share across threads.
class BpeEncoder {
 public:
  using TokenId = detail::TokenId;

  explicit BpeEncoder(const MergeTable& table) {
    table.validate();
    for (const auto& r : table.rules) {
      const TokenId l = pool_.intern(r.left);
      const TokenId rt = pool_.intern(r.right);
      const TokenId m = pool_.intern(r.result);
      ranks_[detail::pair_key(l, rt)].push_back(static_cast<std::uint32_t>(r.rank));
      results_.push_back(m);
    }
  }

  std::size_t token_count() const noexcept { return pool_.size(); }
  const std::string& token(TokenId id) const { return pool_.str(id); }

  // Token ids (in this encoder's id space) for `seq`.
  //
  // Equivalent to applying every rule in rank order, each one left-to-right
  // without overlap: a min-heap of (rank, position) visits exactly the rules
  // whose pair is present, in rank order, and positions in ascending order.
  void encode_ids(std::string_view seq, std::vector<TokenId>& out) const {
    const std::size_t n = seq.size();
    out.clear();
    if (n == 0) return;
    thread_local Scratch s;
    s.tok.resize(n);
    s.prev.resize(n);
    s.next.resize(n);
    s.heap.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const int code = base_code(seq[i]);
      if (code < 0) fail(ErrorKind::InvalidBase, "non-ACGT base passed to BPE encoder");
      s.tok[i] = static_cast<std::int32_t>(code);
      s.prev[i] = static_cast<std::int32_t>(i) - 1;
      s.next[i] = i + 1 < n ? static_cast<std::int32_t>(i + 1) : detail::kNone;
    }
    constexpr std::int64_t kStart = -1;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      schedule(s, static_cast<std::int32_t>(i), kStart);
    }
    while (!s.heap.empty()) {
      std::pop_heap(s.heap.begin(), s.heap.end(), std::greater<>{});
      const auto [rank, pos] = s.heap.back();
      s.heap.pop_back();
      const auto up = static_cast<std::size_t>(pos);
      if (s.tok[up] == detail::kNone) continue;
      const std::int32_t nx = s.next[up];
      if (nx == detail::kNone) continue;
      if (!has_rank(s.tok[up], s.tok[static_cast<std::size_t>(nx)], rank)) continue;

      const std::int32_t after = s.next[static_cast<std::size_t>(nx)];
      s.tok[up] = static_cast<std::int32_t>(results_[rank]);
      s.tok[static_cast<std::size_t>(nx)] = detail::kNone;
      s.next[up] = after;
      if (after != detail::kNone) s.prev[static_cast<std::size_t>(after)] = pos;
      if (s.prev[up] != detail::kNone) schedule(s, s.prev[up], rank);
      if (after != detail::kNone) schedule(s, pos, rank);
    }
    for (std::int32_t i = 0; i != detail::kNone; i = s.next[static_cast<std::size_t>(i)]) {
      out.push_back(static_cast<TokenId>(s.tok[static_cast<std::size_t>(i)]));
    }
  }

  std::vector<std::string> encode(std::string_view seq) const {
    std::vector<TokenId> ids;
    encode_ids(seq, ids);
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (TokenId id : ids) out.push_back(pool_.str(id));
    return out;
  }

 private:
  struct Scratch {
    std::vector<std::int32_t> tok;
    std::vector<std::int32_t> prev;
    std::vector<std::int32_t> next;
    std::vector<std::pair<std::uint32_t, std::int32_t>> heap;
  };

  const std::vector<std::uint32_t>* ranks_of(std::int32_t l, std::int32_t r) const {
    const auto it = ranks_.find(detail::pair_key(static_cast<TokenId>(l), static_cast<TokenId>(r)));
    return it == ranks_.end() ? nullptr : &it->second;
  }

  bool has_rank(std::int32_t l, std::int32_t r, std::uint32_t rank) const {
    const auto* v = ranks_of(l, r);
    return v != nullptr && std::binary_search(v->begin(), v->end(), rank);
  }

  // Queues the pair starting at `pos` under its first rank above `after`.
  void schedule(Scratch& s, std::int32_t pos, std::int64_t after) const {
    const auto up = static_cast<std::size_t>(pos);
    const std::int32_t nx = s.next[up];
    const auto* v = ranks_of(s.tok[up], s.tok[static_cast<std::size_t>(nx)]);
    if (v == nullptr) return;
    const auto it = std::upper_bound(v->begin(), v->end(), after,
                                     [](std::int64_t a, std::uint32_t b) { return a < b; });
    if (it == v->end()) return;
    s.heap.emplace_back(*it, pos);
    std::push_heap(s.heap.begin(), s.heap.end(), std::greater<>{});
  }

  detail::TokenPool pool_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> ranks_;
  std::vector<TokenId> results_;
};

inline std::vector<std::string> bpe_encode(std::string_view seq, const MergeTable& table) {
  return BpeEncoder(table).encode(seq);
}

}  // namespace hybridtok
