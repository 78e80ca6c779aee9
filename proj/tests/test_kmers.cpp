#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "tcrsc/errors.hpp"
#include "tcrsc/kmers.hpp"
#include "tcrsc/rng.hpp"

using namespace tcrsc;

TEST_CASE("generate_kmers slides a stride-1 window") {
  const KmerSpec k4{4, 0};
  CHECK(generate_kmers("CASSGQ", k4) ==
        std::vector<std::string>{"CASS", "ASSG", "SSGQ"});
  CHECK(generate_kmers("CASSRGQYEQYF", k4).size() == 9);  // 12 - 4 + 1
  CHECK(generate_kmers("CAS", k4).empty());               // shorter than span
}

TEST_CASE("spaced k-mers keep one residue then skip gap positions") {
  const KmerSpec spec{2, 1};  // span 3
  CHECK(generate_kmers("ABCDE", spec) ==
        std::vector<std::string>{"AC", "BD", "CE"});
  CHECK(spec.span() == 3);
  CHECK(KmerSpec{4, 1}.span() == 7);
}

TEST_CASE("k-mer count matches the length arithmetic") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int len = 1 + static_cast<int>(rng.uniform_index(30));
    std::string s(static_cast<std::size_t>(len), 'A');
    for (auto& c : s) {
      c = Alphabet::kSymbols[rng.uniform_index(21)];
    }
    const KmerSpec spec{1 + static_cast<int>(rng.uniform_index(4)),
                        static_cast<int>(rng.uniform_index(3))};
    const auto kmers = generate_kmers(s, spec);
    if (len >= spec.span()) {
      CHECK(static_cast<int>(kmers.size()) == len - spec.span() + 1);
    } else {
      CHECK(kmers.empty());
    }
    // gap=0 reduces to contiguous substrings
    if (spec.gap == 0) {
      for (std::size_t i = 0; i < kmers.size(); ++i) {
        CHECK(kmers[i] == s.substr(i, static_cast<std::size_t>(spec.k)));
      }
    }
  }
}

TEST_CASE("kmer_index is the mixed-radix position") {
  CHECK(kmer_index("AAAA") == 0);
  CHECK(kmer_index("CAAA") == 9261);  // index(C)=1, 1 * 21^3
  CHECK(kmer_index("XXXX") == 194480);  // 21^4 - 1
  CHECK(pow21(3) == 9261);
  CHECK_THROWS_AS(kmer_index("CAB_"), DataError);
}

TEST_CASE("kmer_index enumerates 2-mers in lexicographic order") {
  // cross-check the full bijection against an independent counter
  std::int64_t expected = 0;
  for (char a : Alphabet::kSymbols) {
    for (char b : Alphabet::kSymbols) {
      const std::string kmer{a, b};
      CHECK(kmer_index(kmer) == expected);
      CHECK(index_to_kmer(expected, 2) == kmer);
      ++expected;
    }
  }
  CHECK(expected == 441);
}

TEST_CASE("index_to_kmer inverts kmer_index") {
  CHECK(index_to_kmer(0, 4) == "AAAA");
  CHECK(index_to_kmer(9261, 4) == "CAAA");
  CHECK_THROWS_AS(index_to_kmer(-1, 2), DataError);
  CHECK_THROWS_AS(index_to_kmer(441, 2), DataError);

  for (std::int64_t i = 0; i < 441; ++i) {
    CHECK(kmer_index(index_to_kmer(i, 2)) == i);
  }
}

TEST_CASE("KmerSpec validation") {
  CHECK_THROWS_AS((KmerSpec{0, 0}.validate()), DataError);
  CHECK_THROWS_AS((KmerSpec{9, 0}.validate()), DataError);
  CHECK_THROWS_AS((KmerSpec{4, -1}.validate()), DataError);
  CHECK_NOTHROW((KmerSpec{8, 0}.validate()));
}
