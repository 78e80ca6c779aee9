#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tcrsc/kmers.hpp"
#include "tcrsc/seqio.hpp"
#include "tcrsc/sparse.hpp"

namespace tcrsc {

enum class EmbeddingMode {
  kBagOfKmers,       // dim 21^k, k-mer occurrence counts
  kPositionalConcat, // dim 21*k*(max_len-span+1), per-k-mer one-hot blocks
  kSequenceOhe,      // dim 21*max_len, per-residue one-hot (OHE baseline)
};

EmbeddingMode parse_embedding_mode(std::string_view name);
std::string to_string(EmbeddingMode mode);

struct EmbeddingSpec {
  KmerSpec kmer;
  EmbeddingMode mode = EmbeddingMode::kBagOfKmers;
  int max_len = 0;  // padding bound, required > 0 for positional modes
  bool use_domain_knowledge = false;
  bool normalize = false;  // optional per-row L2 normalization

  // Dimension of the sequence block (excludes the domain-knowledge block).
  Index sequence_dim() const;
  void validate() const;
};

// Per-label property sets over five fixed categories. Vocabularies are the
// sorted union of all labels' values per category; the encoded vector is the
// concatenation of per-category multi-hot blocks in category order.
class DomainKnowledgeTable {
 public:
  using Properties = std::map<std::string, std::vector<std::string>>;

  static const std::array<std::string, 5>& categories();

  // The four cancers' properties as shipped by default.
  static DomainKnowledgeTable builtin_default();

  // JSON object: label -> category -> list of strings.
  static DomainKnowledgeTable load_json(const std::string& path);
  void save_json(const std::string& path) const;

  explicit DomainKnowledgeTable(std::map<std::string, Properties> entries);

  bool has_label(const std::string& label) const;
  std::vector<std::string> labels() const;
  Index dim() const;  // sum of category vocabulary sizes
  const std::vector<std::string>& vocabulary(int category) const;
  const std::map<std::string, Properties>& entries() const { return entries_; }

  std::uint64_t hash() const;

 private:
  std::map<std::string, Properties> entries_;  // label -> category -> values
  std::array<std::vector<std::string>, 5> vocab_;
};

SparseVector encode_sequence(const SequenceRecord& record,
                             const EmbeddingSpec& spec,
                             const Alphabet& alphabet = Alphabet::standard());

SparseVector build_domain_vector(const std::string& label,
                                 const DomainKnowledgeTable& table);

// Row r = encode_sequence(records[r]) ++ build_domain_vector(label r) when
// spec.use_domain_knowledge (table must then be non-null and cover every
// label). short_rows, when given, counts sequences shorter than the k-mer
// window (they contribute all-zero sequence blocks).
SparseMatrix embed_dataset(const std::vector<SequenceRecord>& records,
                           const EmbeddingSpec& spec,
                           const DomainKnowledgeTable* table = nullptr,
                           std::size_t* short_rows = nullptr);

}  // namespace tcrsc
