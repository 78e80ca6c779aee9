#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tcrsc/alphabet.hpp"

namespace tcrsc {

struct KmerSpec {
  int k = 4;
  int gap = 0;  // 0 = contiguous; g > 0 skips g positions after each kept one

  // Window length covered by one k-mer: k + (k-1)*gap.
  int span() const { return k + (k - 1) * gap; }
  void validate() const;  // 1 <= k <= 8 (21^8 fits 64 bits), gap >= 0
};

// 21^k as a 64-bit integer, k in [0, 8].
std::int64_t pow21(int k);

// Sliding window, stride 1: returns len - span + 1 k-mers in order,
// duplicates retained. Sequences shorter than the span yield an empty list.
std::vector<std::string> generate_kmers(std::string_view residues,
                                        const KmerSpec& spec);

// Mixed-radix index: sum_i index(aa_i) * 21^(k-1-i), unique in [0, 21^k).
std::int64_t kmer_index(std::string_view kmer,
                        const Alphabet& alphabet = Alphabet::standard());

// Inverse of kmer_index.
std::string index_to_kmer(std::int64_t index, int k,
                          const Alphabet& alphabet = Alphabet::standard());

}  // namespace tcrsc
