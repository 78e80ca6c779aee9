#include "tcrsc/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "tcrsc/errors.hpp"
#include "tcrsc/hash.hpp"

namespace tcrsc {

using nlohmann::json;

EmbeddingMode parse_embedding_mode(std::string_view name) {
  if (name == "bag-of-kmers") return EmbeddingMode::kBagOfKmers;
  if (name == "positional-concat") return EmbeddingMode::kPositionalConcat;
  if (name == "sequence-ohe") return EmbeddingMode::kSequenceOhe;
  throw DataError("unknown embedding mode: " + std::string(name) +
                  " (expected bag-of-kmers, positional-concat, or sequence-ohe)");
}

std::string to_string(EmbeddingMode mode) {
  switch (mode) {
    case EmbeddingMode::kBagOfKmers: return "bag-of-kmers";
    case EmbeddingMode::kPositionalConcat: return "positional-concat";
    case EmbeddingMode::kSequenceOhe: return "sequence-ohe";
  }
  return "?";
}

void EmbeddingSpec::validate() const {
  kmer.validate();
  if (mode != EmbeddingMode::kBagOfKmers && max_len <= 0) {
    throw DataError("positional embedding modes require max_len > 0");
  }
  if (mode == EmbeddingMode::kPositionalConcat && max_len < kmer.span()) {
    throw DataError("max_len must be >= the k-mer span");
  }
}

Index EmbeddingSpec::sequence_dim() const {
  switch (mode) {
    case EmbeddingMode::kBagOfKmers:
      return pow21(kmer.k);
    case EmbeddingMode::kPositionalConcat:
      return static_cast<Index>(Alphabet::kSize) * kmer.k *
             (max_len - kmer.span() + 1);
    case EmbeddingMode::kSequenceOhe:
      return static_cast<Index>(Alphabet::kSize) * max_len;
  }
  return 0;
}

const std::array<std::string, 5>& DomainKnowledgeTable::categories() {
  static const std::array<std::string, 5> cats = {
      "hla_types", "gene_mutations", "clinical_characteristics",
      "immunological_features", "epigenetic_modifications"};
  return cats;
}

DomainKnowledgeTable::DomainKnowledgeTable(std::map<std::string, Properties> entries)
    : entries_(std::move(entries)) {
  const auto& cats = categories();
  for (auto& [label, props] : entries_) {
    if (label.empty()) throw DataError("domain table: empty label");
    for (auto& [cat, values] : props) {
      if (std::find(cats.begin(), cats.end(), cat) == cats.end()) {
        throw DataError("domain table: unknown category '" + cat +
                        "' for label '" + label + "'");
      }
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
    }
  }
  for (std::size_t c = 0; c < cats.size(); ++c) {
    std::set<std::string> vocab;
    for (const auto& [label, props] : entries_) {
      const auto it = props.find(cats[c]);
      if (it != props.end()) vocab.insert(it->second.begin(), it->second.end());
    }
    vocab_[c].assign(vocab.begin(), vocab.end());
  }
}

DomainKnowledgeTable DomainKnowledgeTable::builtin_default() {
  std::map<std::string, Properties> t;
  t["Breast"] = {
      {"hla_types", {"HLA-A2", "HLA-B7", "HLA-DRB1*15:01"}},
      {"gene_mutations", {"BRCA1", "BRCA2", "TP53", "PIK3CA"}},
      {"clinical_characteristics",
       {"tumor size", "grade", "hormone receptor presence", "HER2 status"}},
      {"immunological_features", {"TILs", "PD-1", "PD-L1", "CTLA-4"}},
  };
  t["Colorectal"] = {
      {"hla_types", {"HLA-A11", "HLA-B44"}},
      {"gene_mutations", {"APC", "KRAS", "TP53", "BRAF"}},
      {"clinical_characteristics", {"tumor attributes", "lymph node involvement"}},
      {"immunological_features", {"TILs", "immune checkpoint molecules"}},
  };
  t["Liver"] = {
      {"hla_types", {"HLA-A2", "HLA-B35"}},
      {"gene_mutations", {"TP53", "CTNNB1", "AXIN1", "ARID1A"}},
      {"epigenetic_modifications", {"CDKN2A", "MGMT", "GSTP1"}},
  };
  t["Urothelial"] = {
      {"hla_types", {"HLA-A2", "HLA-B7"}},
      {"gene_mutations", {"FGFR3", "TP53", "RB1", "PIK3CA"}},
  };
  return DomainKnowledgeTable(std::move(t));
}

DomainKnowledgeTable DomainKnowledgeTable::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open domain table: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("domain table " + path + ": " + e.what());
  }
  if (!j.is_object()) throw DataError("domain table must be a JSON object");
  std::map<std::string, Properties> entries;
  for (const auto& [label, props] : j.items()) {
    if (!props.is_object()) {
      throw DataError("domain table: entry for '" + label + "' must be an object");
    }
    Properties p;
    for (const auto& [cat, values] : props.items()) {
      if (!values.is_array()) {
        throw DataError("domain table: category '" + cat + "' must be an array");
      }
      p[cat] = values.get<std::vector<std::string>>();
    }
    entries[label] = std::move(p);
  }
  return DomainKnowledgeTable(std::move(entries));
}

void DomainKnowledgeTable::save_json(const std::string& path) const {
  json j = json::object();
  for (const auto& [label, props] : entries_) {
    json p = json::object();
    for (const auto& [cat, values] : props) p[cat] = values;
    j[label] = std::move(p);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
}

bool DomainKnowledgeTable::has_label(const std::string& label) const {
  return entries_.count(label) > 0;
}

std::vector<std::string> DomainKnowledgeTable::labels() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [label, props] : entries_) out.push_back(label);
  return out;
}

Index DomainKnowledgeTable::dim() const {
  Index d = 0;
  for (const auto& v : vocab_) d += static_cast<Index>(v.size());
  return d;
}

const std::vector<std::string>& DomainKnowledgeTable::vocabulary(int category) const {
  return vocab_[static_cast<std::size_t>(category)];
}

std::uint64_t DomainKnowledgeTable::hash() const {
  std::uint64_t h = fnv1a64("domain-table");
  for (const auto& [label, props] : entries_) {
    h = fnv1a64(label, h);
    for (const auto& [cat, values] : props) {
      h = fnv1a64(cat, h);
      for (const auto& v : values) h = fnv1a64(v, h);
    }
  }
  return h;
}

namespace {

SparseVector encode_bag(const SequenceRecord& record, const EmbeddingSpec& spec,
                        const Alphabet& alphabet) {
  SparseVector v;
  v.dim = spec.sequence_dim();
  std::vector<Index> idx;
  for (const auto& kmer : generate_kmers(record.residues, spec.kmer)) {
    idx.push_back(kmer_index(kmer, alphabet));
  }
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && idx[j] == idx[i]) ++j;
    v.entries.push_back({idx[i], static_cast<double>(j - i)});
    i = j;
  }
  return v;
}

SparseVector encode_positional(const SequenceRecord& record,
                               const EmbeddingSpec& spec,
                               const Alphabet& alphabet) {
  if (static_cast<int>(record.residues.size()) > spec.max_len) {
    throw DataError("sequence '" + record.id + "' longer than max_len (" +
                    std::to_string(record.residues.size()) + " > " +
                    std::to_string(spec.max_len) + ")");
  }
  SparseVector v;
  v.dim = spec.sequence_dim();
  const Index block = static_cast<Index>(Alphabet::kSize) * spec.kmer.k;
  const auto kmers = generate_kmers(record.residues, spec.kmer);
  for (std::size_t j = 0; j < kmers.size(); ++j) {
    for (int i = 0; i < spec.kmer.k; ++i) {
      const int pos = alphabet.index(kmers[j][static_cast<std::size_t>(i)]);
      v.entries.push_back({static_cast<Index>(j) * block +
                               static_cast<Index>(i) * Alphabet::kSize + pos,
                           1.0});
    }
  }
  return v;  // entries are already in ascending index order
}

SparseVector encode_ohe(const SequenceRecord& record, const EmbeddingSpec& spec,
                        const Alphabet& alphabet) {
  if (static_cast<int>(record.residues.size()) > spec.max_len) {
    throw DataError("sequence '" + record.id + "' longer than max_len (" +
                    std::to_string(record.residues.size()) + " > " +
                    std::to_string(spec.max_len) + ")");
  }
  SparseVector v;
  v.dim = spec.sequence_dim();
  for (std::size_t i = 0; i < record.residues.size(); ++i) {
    const int pos = alphabet.index(record.residues[i]);
    v.entries.push_back(
        {static_cast<Index>(i) * Alphabet::kSize + pos, 1.0});
  }
  return v;
}

}  // namespace

SparseVector encode_sequence(const SequenceRecord& record,
                             const EmbeddingSpec& spec,
                             const Alphabet& alphabet) {
  spec.validate();
  for (char c : record.residues) {
    if (!alphabet.contains(c)) {
      throw DataError("sequence '" + record.id + "': residue '" +
                      std::string(1, c) + "' not in alphabet");
    }
  }
  switch (spec.mode) {
    case EmbeddingMode::kBagOfKmers: return encode_bag(record, spec, alphabet);
    case EmbeddingMode::kPositionalConcat:
      return encode_positional(record, spec, alphabet);
    case EmbeddingMode::kSequenceOhe: return encode_ohe(record, spec, alphabet);
  }
  throw DataError("unreachable embedding mode");
}

SparseVector build_domain_vector(const std::string& label,
                                 const DomainKnowledgeTable& table) {
  const auto it = table.entries().find(label);
  if (it == table.entries().end()) {
    throw DataError("label '" + label + "' not present in the domain table");
  }
  SparseVector v;
  v.dim = table.dim();
  Index base = 0;
  const auto& cats = DomainKnowledgeTable::categories();
  for (std::size_t c = 0; c < cats.size(); ++c) {
    const auto& vocab = table.vocabulary(static_cast<int>(c));
    const auto props = it->second.find(cats[c]);
    if (props != it->second.end()) {
      for (const auto& value : props->second) {
        const auto pos = std::lower_bound(vocab.begin(), vocab.end(), value);
        // constructor guarantees every value is in the category vocabulary
        v.entries.push_back({base + static_cast<Index>(pos - vocab.begin()), 1.0});
      }
    }
    base += static_cast<Index>(vocab.size());
  }
  std::sort(v.entries.begin(), v.entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  return v;
}

SparseMatrix embed_dataset(const std::vector<SequenceRecord>& records,
                           const EmbeddingSpec& spec,
                           const DomainKnowledgeTable* table,
                           std::size_t* short_rows) {
  if (records.empty()) throw DataError("embed_dataset: empty record list");
  spec.validate();
  if (spec.use_domain_knowledge && table == nullptr) {
    throw DataError("embed_dataset: domain knowledge requested but no table given");
  }

  const Index seq_dim = spec.sequence_dim();
  const Index domain_dim = spec.use_domain_knowledge ? table->dim() : 0;

  // row-parallel encoding; CSR assembly below is an ordered reduction, so
  // the result is identical for any worker count
  std::vector<SparseVector> rows(records.size());
  parallel_for(records.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      SparseVector row = encode_sequence(records[r], spec);
      row.dim = seq_dim + domain_dim;
      if (spec.use_domain_knowledge) {
        const SparseVector dom = build_domain_vector(records[r].label, *table);
        for (const auto& e : dom.entries) {
          row.entries.push_back({seq_dim + e.index, e.value});
        }
      }
      if (spec.normalize && !row.entries.empty()) {
        double sq = 0;
        for (const auto& e : row.entries) sq += e.value * e.value;
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& e : row.entries) e.value *= inv;
      }
      rows[r] = std::move(row);
    }
  });
  if (short_rows) {
    std::size_t short_count = 0;
    for (const auto& row : rows) {
      // an all-zero sequence block leaves no entry below seq_dim
      short_count += row.entries.empty() || row.entries.front().index >= seq_dim;
    }
    *short_rows = short_count;
  }
  return rows_to_matrix(rows);
}

}  // namespace tcrsc
