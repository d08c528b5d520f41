#include <gtest/gtest.h>

#include "hybridtok/sequence_io.hpp"
#include "hybridtok/vocab.hpp"
#include "support/generators.hpp"

using namespace hybridtok;
namespace gen = hybridtok::testing;
using Strings = std::vector<std::string>;

namespace {

MergeTable ac_table() {
  MergeTable t;
  t.rules.push_back({"A", "C", "AC", 0});
  t.cycles = 1;
  return t;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvariantViolation;
}

}  // namespace

TEST(BuildVocabulary, SetUnionWithSpecials) {
  const Strings kmers{"A", "C"};
  const Strings bpe{"C", "G"};
  const auto v = build_vocabulary(kmers, bpe, 1, 0);
  EXPECT_EQ(v.size(), 8u);
  const auto& c = v.metadata().counts;
  EXPECT_EQ(c.kmer, 2u);
  EXPECT_EQ(c.bpe, 2u);
  EXPECT_EQ(c.shared, 1u);
  EXPECT_EQ(c.total, 8u);
  EXPECT_EQ(v.token_of(0), "[CLS]");
  EXPECT_EQ(v.token_of(4), "[UNK]");
  EXPECT_EQ(v.token_of(5), "A");
  EXPECT_EQ(v.token_of(7), "G");
}

TEST(BuildVocabulary, EmptyTableWithK1HasNineTokens) {
  const auto v = build_vocabulary(kmer_vocabulary(1), MergeTable{});
  EXPECT_EQ(v.size(), 9u);
  EXPECT_EQ(v.metadata().counts.shared, 4u);
  EXPECT_EQ(v.metadata().k, 1);
}

TEST(BuildVocabulary, IdsOrderedByLengthThenLexAndInvertible) {
  Rng rng(4);
  std::vector<std::string> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back(gen::structured_dna(rng, 305));
  const auto table = bpe_train(corpus, 120);
  const auto kmers = kmer_vocabulary(6);
  const auto v = build_vocabulary(kmers, table);
  const auto& c = v.metadata().counts;
  EXPECT_EQ(c.total, v.size());
  EXPECT_EQ(c.total, c.special + c.kmer + c.bpe - c.shared);
  EXPECT_EQ(c.kmer, 4096u);
  EXPECT_EQ(c.bpe, table.distinct_strings().size());
  const auto regular = v.regular_tokens();
  EXPECT_TRUE(std::is_sorted(regular.begin(), regular.end(), LengthThenLex{}));
  for (std::size_t id = 0; id < v.size(); ++id) {
    EXPECT_EQ(v.id_of(v.token_of(static_cast<TokenId>(id))), static_cast<TokenId>(id));
  }
  EXPECT_EQ(v.serialize(), build_vocabulary(kmers, table).serialize());
  EXPECT_EQ(Vocabulary::parse(v.serialize()).serialize(), v.serialize());
  EXPECT_EQ(v.metadata().corpus_digest, table.corpus_digest);
}

TEST(VocabularyJson, RejectsDisplacedSpecials) {
  auto j = build_vocabulary(kmer_vocabulary(1), MergeTable{}).to_json();
  std::swap(j["tokens"][0], j["tokens"][1]);
  EXPECT_EQ(kind_of([&] { Vocabulary::from_json(j); }), ErrorKind::MalformedFile);
}

TEST(VocabularyText, OneTokenPerLine) {
  const auto v = build_vocabulary(kmer_vocabulary(1), MergeTable{});
  EXPECT_EQ(v.to_text(), "[CLS]\n[SEP]\n[MASK]\n[PAD]\n[UNK]\nA\nC\nG\nT\n");
}

TEST(HybridEncode, TenBaseExampleBareAndWithSpecials) {
  const auto table = ac_table();
  const auto v = build_vocabulary(kmer_vocabulary(6), table);
  const Segment seg{{"ACACACACAC", "s", 0}};
  const auto bare = hybrid_encode(seg, v, table, 6, false);
  EXPECT_EQ(bare.ids.size(), 10u);
  EXPECT_EQ(bare.kmer_region, (IndexRange{0, 5}));
  EXPECT_EQ(bare.bpe_region, (IndexRange{5, 10}));
  for (std::size_t i = 5; i < 10; ++i) EXPECT_EQ(v.token_of(bare.ids[i]), "AC");

  const auto full = hybrid_encode(seg, v, table, 6, true);
  ASSERT_EQ(full.ids.size(), 13u);
  EXPECT_EQ(full.ids.front(), special::kCls);
  EXPECT_EQ(full.ids[6], special::kSep);
  EXPECT_EQ(full.ids.back(), special::kSep);
  EXPECT_EQ(full.kmer_region, (IndexRange{1, 6}));
  EXPECT_EQ(full.bpe_region, (IndexRange{7, 12}));

  for (const auto& enc : {bare, full}) {
    EXPECT_EQ(decode_region(enc, Region::kmer, v), "ACACACACAC");
    EXPECT_EQ(decode_region(enc, Region::bpe, v), "ACACACACAC");
  }
}

TEST(HybridEncode, UnknownTokensStrictVersusLenient) {
  const auto table = ac_table();
  // Vocabulary without the BPE string "AC".
  const auto v = build_vocabulary(kmer_vocabulary(3), Strings{"A", "C", "G", "T"}, 3, 0);
  const Segment seg{{"ACAC", "s", 0}};
  EXPECT_EQ(kind_of([&] { hybrid_encode(seg, v, table, 3, false); }), ErrorKind::UnknownToken);
  const auto enc = hybrid_encode(seg, v, table, 3, false, UnknownPolicy::lenient);
  EXPECT_EQ(enc.ids[enc.bpe_region.begin], special::kUnk);
  EXPECT_EQ(kind_of([&] { decode_region(enc, Region::bpe, v); }), ErrorKind::LossyEncoding);
  EXPECT_EQ(decode_region(enc, Region::kmer, v), "ACAC");
}

TEST(HybridEncode, BpeRegionDecodesByConcatenation) {
  const auto table = ac_table();
  const auto v = build_vocabulary(kmer_vocabulary(1), table);
  HybridEncoding enc;
  enc.ids = {*v.id_of("AC"), *v.id_of("AC")};
  enc.bpe_region = {0, 2};
  EXPECT_EQ(decode_region(enc, Region::bpe, v), "ACAC");
}

TEST(HybridEncode, LengthLawAndRoundTripOnRandomSegments) {
  Rng rng(12);
  std::vector<std::string> corpus;
  for (int i = 0; i < 30; ++i) corpus.push_back(gen::structured_dna(rng, 305));
  const auto table = bpe_train(corpus, 200);
  const auto v = build_vocabulary(kmer_vocabulary(6), table);
  const HybridEncoder encoder(v, table, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string s = trial % 2 ? gen::random_dna(rng, 6 + rng.below(400))
                                    : gen::structured_dna(rng, 305);
    const auto enc = encoder.encode(s, false);
    EXPECT_EQ(enc.kmer_region.size(), s.size() - 5);
    EXPECT_EQ(enc.ids.size(), s.size() - 5 + bpe_encode(s, table).size());
    EXPECT_EQ(decode_region(enc, Region::kmer, v), s);
    EXPECT_EQ(decode_region(enc, Region::bpe, v), s);
  }
}

TEST(HybridEncode, SegmentShorterThanK) {
  const auto table = ac_table();
  const auto v = build_vocabulary(kmer_vocabulary(6), table);
  EXPECT_EQ(kind_of([&] { hybrid_encode(Segment{{"ACAC", "s", 0}}, v, table, 6, false); }),
            ErrorKind::SequenceTooShort);
}
