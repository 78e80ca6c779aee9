#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tcrsc/alphabet.hpp"

namespace tcrsc {

struct SequenceRecord {
  std::string id;
  std::string residues;  // uppercase, validated against the alphabet
  std::string label;
  bool operator==(const SequenceRecord&) const = default;
};

struct ClassStats {
  std::int64_t count = 0;
  int min_len = 0;
  int max_len = 0;
  double mean_len = 0.0;
};

struct DatasetStats {
  std::map<std::string, ClassStats> per_class;
  std::int64_t total = 0;
};

// Uppercases and validates a raw residue string. Characters outside the
// 21-symbol alphabet map to X when map_unknown is set, otherwise throw
// DataError naming the offending character. context is prepended to errors.
std::string normalize_residues(std::string_view raw, bool map_unknown,
                               const std::string& context);

// CSV rows are `id,sequence,label` or `sequence,label` (id = data-row index).
std::vector<SequenceRecord> load_csv(const std::string& path, bool has_header,
                                     bool map_unknown = false);

// FASTA with `>id|label` headers; multi-line bodies are concatenated.
std::vector<SequenceRecord> load_fasta(const std::string& path,
                                       bool map_unknown = false);

// Canonical interchange: header line `id,sequence,label`, then one row per
// record. load_csv(path, /*has_header=*/true) round-trips.
void write_csv(const std::vector<SequenceRecord>& records,
               const std::string& path);

DatasetStats compute_stats(const std::vector<SequenceRecord>& records);

struct MotifClass {
  std::string label;
  std::string motif;
};

// Uniform-random residue strings with the class motif planted at a random
// position. Lengths are uniform in [min_len, max_len]. Deterministic per seed.
std::vector<SequenceRecord> generate_synthetic(
    int n_per_class, const std::vector<MotifClass>& classes, int min_len,
    int max_len, std::uint64_t seed);

}  // namespace tcrsc
