#include "tcrsc/kmers.hpp"

#include "tcrsc/errors.hpp"

namespace tcrsc {

void KmerSpec::validate() const {
  if (k < 1 || k > 8) throw DataError("k must be in [1, 8]");
  if (gap < 0) throw DataError("gap must be >= 0");
}

std::int64_t pow21(int k) {
  std::int64_t v = 1;
  for (int i = 0; i < k; ++i) v *= 21;
  return v;
}

std::vector<std::string> generate_kmers(std::string_view residues,
                                        const KmerSpec& spec) {
  spec.validate();
  const int span = spec.span();
  const int len = static_cast<int>(residues.size());
  std::vector<std::string> kmers;
  if (len < span) return kmers;  // zero-count row upstream, not an error

  const int stride = spec.gap + 1;
  kmers.reserve(static_cast<std::size_t>(len - span + 1));
  for (int start = 0; start + span <= len; ++start) {
    std::string kmer(static_cast<std::size_t>(spec.k), '\0');
    for (int i = 0; i < spec.k; ++i) {
      kmer[static_cast<std::size_t>(i)] =
          residues[static_cast<std::size_t>(start + i * stride)];
    }
    kmers.push_back(std::move(kmer));
  }
  return kmers;
}

std::int64_t kmer_index(std::string_view kmer, const Alphabet& alphabet) {
  std::int64_t index = 0;
  for (char c : kmer) {
    const int pos = alphabet.index(c);
    if (pos < 0) {
      throw DataError("kmer_index: character '" + std::string(1, c) +
                      "' not in alphabet");
    }
    index = index * Alphabet::kSize + pos;
  }
  return index;
}

std::string index_to_kmer(std::int64_t index, int k, const Alphabet& alphabet) {
  if (index < 0 || index >= pow21(k)) {
    throw DataError("index_to_kmer: index " + std::to_string(index) +
                    " out of range for k=" + std::to_string(k));
  }
  std::string kmer(static_cast<std::size_t>(k), '\0');
  for (int i = k - 1; i >= 0; --i) {
    kmer[static_cast<std::size_t>(i)] =
        alphabet.symbol(static_cast<int>(index % Alphabet::kSize));
    index /= Alphabet::kSize;
  }
  return kmer;
}

}  // namespace tcrsc
