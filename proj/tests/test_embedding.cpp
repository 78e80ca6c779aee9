#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "tcrsc/embedding.hpp"
#include "tcrsc/errors.hpp"
#include "tcrsc/rng.hpp"

using namespace tcrsc;

namespace {

DomainKnowledgeTable gene_only_table() {
  std::map<std::string, DomainKnowledgeTable::Properties> t;
  t["Breast"] = {{"gene_mutations", {"BRCA1", "BRCA2", "TP53", "PIK3CA"}}};
  t["Colorectal"] = {{"gene_mutations", {"APC", "KRAS", "TP53", "BRAF"}}};
  t["Liver"] = {{"gene_mutations", {"TP53", "CTNNB1", "AXIN1", "ARID1A"}}};
  t["Urothelial"] = {{"gene_mutations", {"FGFR3", "TP53", "RB1", "PIK3CA"}}};
  return DomainKnowledgeTable(std::move(t));
}

Eigen::VectorXd densify(const SparseVector& v) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(v.dim);
  for (const auto& e : v.entries) d[e.index] = e.value;
  return d;
}

std::string random_residues(Rng& rng, int len) {
  std::string s(static_cast<std::size_t>(len), 'A');
  for (auto& c : s) c = Alphabet::kSymbols[rng.uniform_index(20)];
  return s;
}

}  // namespace

TEST_CASE("bag-of-kmers counts occurrences in the 21^k space") {
  EmbeddingSpec spec;
  spec.kmer = {4, 0};
  const auto v = encode_sequence({"s", "AAAAA", "x"}, spec);
  CHECK(v.dim == 194481);
  REQUIRE(v.entries.size() == 1);
  CHECK(v.entries[0].index == 0);
  CHECK(v.entries[0].value == 2.0);  // "AAAA" twice
}

TEST_CASE("positional-concat lays out per-k-mer one-hot blocks") {
  EmbeddingSpec spec;
  spec.kmer = {4, 0};
  spec.mode = EmbeddingMode::kPositionalConcat;
  spec.max_len = 4;
  const auto v = encode_sequence({"s", "CASS", "x"}, spec);
  CHECK(v.dim == 84);  // 21 * 4 * 1
  std::vector<Index> idx;
  for (const auto& e : v.entries) {
    idx.push_back(e.index);
    CHECK(e.value == 1.0);
  }
  CHECK(idx == std::vector<Index>{1, 21, 57, 78});
}

TEST_CASE("sequence-ohe pads to max_len") {
  EmbeddingSpec spec;
  spec.mode = EmbeddingMode::kSequenceOhe;
  spec.max_len = 3;
  const auto v = encode_sequence({"s", "CA", "x"}, spec);
  CHECK(v.dim == 63);
  std::vector<Index> idx;
  for (const auto& e : v.entries) idx.push_back(e.index);
  CHECK(idx == std::vector<Index>{1, 21});
}

TEST_CASE("positional modes reject sequences longer than max_len") {
  EmbeddingSpec spec;
  spec.mode = EmbeddingMode::kSequenceOhe;
  spec.max_len = 3;
  CHECK_THROWS_WITH_AS(encode_sequence({"long_one", "CASS", "x"}, spec),
                       doctest::Contains("long_one"), DataError);
}

TEST_CASE("encoded rows match the dense oracles") {
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    const int len = 4 + static_cast<int>(rng.uniform_index(18));
    const std::string residues = random_residues(rng, len);
    const int k = 2 + static_cast<int>(rng.uniform_index(3));
    const int gap = static_cast<int>(rng.uniform_index(2));
    const SequenceRecord rec{"r", residues, "x"};

    EmbeddingSpec bag;
    bag.kmer = {k, gap};
    CHECK(densify(encode_sequence(rec, bag)) ==
          oracle::dense_bag_counts(residues, k, gap));

    EmbeddingSpec pos;
    pos.kmer = {k, gap};
    pos.mode = EmbeddingMode::kPositionalConcat;
    pos.max_len = 24;
    const auto row = encode_sequence(rec, pos);
    CHECK(densify(row) == oracle::dense_positional(residues, k, gap, 24));
    const int windows = std::max(0, len - pos.kmer.span() + 1);
    CHECK(static_cast<int>(row.entries.size()) == k * windows);

    EmbeddingSpec ohe;
    ohe.mode = EmbeddingMode::kSequenceOhe;
    ohe.max_len = 24;
    CHECK(densify(encode_sequence(rec, ohe)) ==
          oracle::dense_sequence_ohe(residues, 24));
  }
}

TEST_CASE("bag row sums equal the k-mer count") {
  Rng rng(55);
  EmbeddingSpec spec;
  spec.kmer = {3, 0};
  for (int trial = 0; trial < 30; ++trial) {
    const int len = 1 + static_cast<int>(rng.uniform_index(20));
    const std::string residues = random_residues(rng, len);
    const auto v = encode_sequence({"r", residues, "x"}, spec);
    double sum = 0;
    for (const auto& e : v.entries) sum += e.value;
    const int expected = std::max(0, len - spec.kmer.span() + 1);
    CHECK(sum == static_cast<double>(expected));
    CHECK(static_cast<int>(v.entries.size()) <= std::max(expected, 0));
  }
}

TEST_CASE("domain vector places ones at the sorted vocabulary positions") {
  const auto table = gene_only_table();
  CHECK(table.dim() == 12);
  // sorted union: APC ARID1A AXIN1 BRAF BRCA1 BRCA2 CTNNB1 FGFR3 KRAS PIK3CA RB1 TP53
  auto indices = [](const SparseVector& v) {
    std::vector<Index> idx;
    for (const auto& e : v.entries) idx.push_back(e.index);
    return idx;
  };
  CHECK(indices(build_domain_vector("Breast", table)) ==
        std::vector<Index>{4, 5, 9, 11});
  CHECK(indices(build_domain_vector("Colorectal", table)) ==
        std::vector<Index>{0, 3, 8, 11});
  CHECK_THROWS_AS(build_domain_vector("Lung", table), DataError);

  // label-determinism
  const auto a = densify(build_domain_vector("Liver", table));
  const auto b = densify(build_domain_vector("Liver", table));
  CHECK(a == b);
}

TEST_CASE("distinct property sets give distinct domain vectors") {
  const auto table = DomainKnowledgeTable::builtin_default();
  const auto labels = table.labels();
  CHECK(labels == std::vector<std::string>{"Breast", "Colorectal", "Liver", "Urothelial"});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      CHECK(densify(build_domain_vector(labels[i], table)) !=
            densify(build_domain_vector(labels[j], table)));
    }
  }
}

TEST_CASE("domain table JSON round-trip") {
  const auto table = DomainKnowledgeTable::builtin_default();
  const auto path =
      (std::filesystem::temp_directory_path() / "domain_rt.json").string();
  table.save_json(path);
  const auto loaded = DomainKnowledgeTable::load_json(path);
  CHECK(loaded.hash() == table.hash());
  CHECK(loaded.dim() == table.dim());

  std::map<std::string, DomainKnowledgeTable::Properties> bad;
  bad["A"] = {{"not_a_category", {"x"}}};
  CHECK_THROWS_AS(DomainKnowledgeTable(std::move(bad)), DataError);
}

TEST_CASE("embed_dataset concatenates sequence and domain blocks") {
  const std::vector<SequenceRecord> records = {
      {"1", "CASSRGQYEQYF", "Breast"}, {"2", "CASSLEAGRAYEQYF", "Colorectal"}};
  EmbeddingSpec spec;
  spec.kmer = {4, 0};

  const auto plain = embed_dataset(records, spec);
  CHECK(plain.rows() == 2);
  CHECK(plain.cols() == 194481);

  spec.use_domain_knowledge = true;
  const auto table = gene_only_table();
  const auto fused = embed_dataset(records, spec, &table);
  CHECK(fused.cols() == 194493);  // + 12 gene terms

  CHECK_THROWS_AS(embed_dataset({}, spec, &table), DataError);
  CHECK_THROWS_AS(embed_dataset(records, spec, nullptr), DataError);
}

TEST_CASE("row permutation permutes embedding rows identically") {
  const auto records = generate_synthetic(
      4, {{"Breast", "CASS"}, {"Liver", "GQYE"}}, 8, 14, 5);
  std::vector<SequenceRecord> reversed(records.rbegin(), records.rend());
  EmbeddingSpec spec;
  spec.kmer = {3, 0};
  const auto a = to_dense(embed_dataset(records, spec));
  const auto b = to_dense(embed_dataset(reversed, spec));
  CHECK(a == b.colwise().reverse());
}

TEST_CASE("normalize flag gives unit-norm rows") {
  const auto records = generate_synthetic(3, {{"Breast", "CASS"}}, 8, 14, 5);
  EmbeddingSpec spec;
  spec.kmer = {3, 0};
  spec.normalize = true;
  const auto x = to_dense(embed_dataset(records, spec));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    CHECK(x.row(r).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("short sequences yield zero rows and are counted") {
  const std::vector<SequenceRecord> records = {{"1", "CA", "A"},
                                               {"2", "CASSGQ", "A"}};
  EmbeddingSpec spec;
  spec.kmer = {4, 0};
  std::size_t short_rows = 0;
  const auto x = embed_dataset(records, spec, nullptr, &short_rows);
  CHECK(short_rows == 1);
  CHECK(to_dense(x).row(0).sum() == 0.0);
}

TEST_CASE("triplet text format round-trips") {
  const auto records = generate_synthetic(
      5, {{"Breast", "CASS"}, {"Liver", "GQYE"}}, 8, 14, 9);
  EmbeddingSpec spec;
  spec.kmer = {4, 0};
  const auto x = embed_dataset(records, spec);
  const auto path =
      (std::filesystem::temp_directory_path() / "triplets_rt.txt").string();
  write_triplets(x, path);
  const auto y = read_triplets(path);
  CHECK(y.rows() == x.rows());
  CHECK(y.cols() == x.cols());
  CHECK(to_dense(y) == to_dense(x));
}

TEST_CASE("take_rows and take_columns slice as expected") {
  const std::vector<SequenceRecord> records = {
      {"1", "AACC", "x"}, {"2", "CCDD", "x"}, {"3", "DDEE", "x"}};
  EmbeddingSpec spec;
  spec.kmer = {2, 0};
  const auto x = embed_dataset(records, spec);

  const auto sub = take_rows(x, {2, 0});
  CHECK(to_dense(sub).row(0) == to_dense(x).row(2));
  CHECK(to_dense(sub).row(1) == to_dense(x).row(0));

  const auto cols = take_columns(x, {0, 1, 22});
  CHECK(cols.cols() == 3);
  CHECK(to_dense(cols).col(2) == to_dense(x).col(22));
  CHECK_THROWS_AS(take_columns(x, {1, 0}), DataError);
  CHECK_THROWS_AS(take_rows(x, {5}), DataError);
}
