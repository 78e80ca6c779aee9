#include "tcrsc/seqio.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

#include "tcrsc/errors.hpp"
#include "tcrsc/rng.hpp"

namespace tcrsc {

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

void validate_record(const SequenceRecord& rec, const std::string& context) {
  if (rec.residues.empty()) throw DataError(context + ": empty sequence");
  if (rec.label.empty()) throw DataError(context + ": empty label");
}

}  // namespace

std::string normalize_residues(std::string_view raw, bool map_unknown,
                               const std::string& context) {
  const Alphabet& a = Alphabet::standard();
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (a.contains(up)) {
      out.push_back(up);
    } else if (map_unknown) {
      out.push_back('X');
    } else {
      throw DataError(context + ": unknown residue '" + std::string(1, up) +
                      "' (use --map-unknown to map to X)");
    }
  }
  return out;
}

std::vector<SequenceRecord> load_csv(const std::string& path, bool has_header,
                                     bool map_unknown) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::vector<SequenceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line_no == 1 && has_header) continue;
    if (line.empty()) continue;
    const std::string context = path + ":" + std::to_string(line_no);

    const auto fields = split_fields(line, ',');
    SequenceRecord rec;
    if (fields.size() == 3) {
      rec.id = fields[0];
      rec.residues = normalize_residues(fields[1], map_unknown, context);
      rec.label = fields[2];
    } else if (fields.size() == 2) {
      rec.id = std::to_string(row);
      rec.residues = normalize_residues(fields[0], map_unknown, context);
      rec.label = fields[1];
    } else {
      throw DataError(context + ": expected 2 or 3 comma-separated columns, got " +
                      std::to_string(fields.size()));
    }
    validate_record(rec, context);
    records.push_back(std::move(rec));
    ++row;
  }
  return records;
}

std::vector<SequenceRecord> load_fasta(const std::string& path,
                                       bool map_unknown) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::vector<SequenceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool have_entry = false;
  SequenceRecord current;
  std::string body;
  std::string entry_context;

  auto flush = [&]() {
    if (!have_entry) return;
    current.residues = normalize_residues(body, map_unknown, entry_context);
    validate_record(current, entry_context);
    records.push_back(current);
    body.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '>') {
      flush();
      const std::string header = line.substr(1);
      const std::size_t bar = header.find('|');
      const std::string context = path + ":" + std::to_string(line_no);
      if (bar == std::string::npos) {
        throw DataError(context + ": FASTA header missing label (expected >id|label)");
      }
      current = SequenceRecord{};
      current.id = header.substr(0, bar);
      current.label = header.substr(bar + 1);
      entry_context = context;
      have_entry = true;
    } else {
      if (!have_entry) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": sequence data before any FASTA header");
      }
      body += line;
    }
  }
  flush();
  return records;
}

void write_csv(const std::vector<SequenceRecord>& records,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << "id,sequence,label\n";
  for (const auto& rec : records) {
    out << rec.id << ',' << rec.residues << ',' << rec.label << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

DatasetStats compute_stats(const std::vector<SequenceRecord>& records) {
  if (records.empty()) throw DataError("compute_stats: empty record list");
  DatasetStats stats;
  std::map<std::string, double> length_sum;
  for (const auto& rec : records) {
    auto& cs = stats.per_class[rec.label];
    const int len = static_cast<int>(rec.residues.size());
    if (cs.count == 0) {
      cs.min_len = len;
      cs.max_len = len;
    } else {
      cs.min_len = std::min(cs.min_len, len);
      cs.max_len = std::max(cs.max_len, len);
    }
    ++cs.count;
    length_sum[rec.label] += len;
    ++stats.total;
  }
  for (auto& [label, cs] : stats.per_class) {
    cs.mean_len = length_sum[label] / static_cast<double>(cs.count);
  }
  return stats;
}

std::vector<SequenceRecord> generate_synthetic(
    int n_per_class, const std::vector<MotifClass>& classes, int min_len,
    int max_len, std::uint64_t seed) {
  if (min_len <= 0 || max_len < min_len) {
    throw DataError("generate_synthetic: invalid length range");
  }
  const Alphabet& a = Alphabet::standard();
  for (const auto& mc : classes) {
    if (mc.motif.empty() || static_cast<int>(mc.motif.size()) > min_len) {
      throw DataError("generate_synthetic: motif for class '" + mc.label +
                      "' must be nonempty and no longer than min_len");
    }
    for (char c : mc.motif) {
      if (!a.contains(c)) {
        throw DataError("generate_synthetic: motif character '" +
                        std::string(1, c) + "' outside the alphabet");
      }
    }
  }

  // Residues are drawn from the 20 standard codes; X is reserved for
  // ambiguity mapping on input.
  constexpr int kStandard = 20;
  Rng rng(seed);
  std::vector<SequenceRecord> records;
  records.reserve(static_cast<std::size_t>(n_per_class) * classes.size());
  for (const auto& mc : classes) {
    for (int i = 0; i < n_per_class; ++i) {
      const int len =
          min_len + static_cast<int>(rng.uniform_index(
                        static_cast<std::uint64_t>(max_len - min_len + 1)));
      std::string s(static_cast<std::size_t>(len), 'A');
      for (auto& c : s) c = a.symbol(static_cast<int>(rng.uniform_index(kStandard)));
      const int slots = len - static_cast<int>(mc.motif.size()) + 1;
      const int pos = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(slots)));
      s.replace(static_cast<std::size_t>(pos), mc.motif.size(), mc.motif);
      records.push_back({mc.label + "_" + std::to_string(i), std::move(s), mc.label});
    }
  }
  return records;
}

}  // namespace tcrsc
