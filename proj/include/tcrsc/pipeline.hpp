#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcrsc/embedding.hpp"
#include "tcrsc/lasso.hpp"
#include "tcrsc/metrics.hpp"
#include "tcrsc/projection.hpp"

namespace tcrsc {

struct RunConfig {
  // input
  std::string input_path;
  std::string input_format = "csv";  // csv | fasta
  bool has_header = false;
  bool map_unknown = false;

  // embedding
  int k = 4;
  int gap = 0;  // used by spaced k-mers; default pattern is keep 1, skip gap
  std::string mode = "bag-of-kmers";
  int max_len = 0;  // 0 = auto (longest input sequence) for positional modes
  bool use_domain_knowledge = false;
  bool normalize = false;
  std::string domain_table_path;  // empty = builtin four-cancer table

  // lasso
  std::string alpha = "0.01";  // positive number, or "auto" for the
                               // validation-tuned grid {1e-4 .. 1}
  double lasso_tol = 1e-6;
  int lasso_max_iter = 1000;

  // classifiers
  std::vector<std::string> classifiers = {"knn", "nb", "lr", "dt"};
  int knn_k = 3;

  // evaluation
  double test_frac = 0.3;
  double val_frac = 0.1;
  int n_runs = 5;
  std::uint64_t seed = 0;

  // projection
  bool project = false;
  TsneConfig tsne;

  // artifact locations
  std::string out_dir = ".";
  std::string embedding_dir;  // input for select/train/evaluate/project;
                              // defaults to out_dir
  std::string model_dir;      // input for evaluate; defaults to out_dir

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Hash of the semantic fields (artifact locations excluded); stamped into
  // every output file.
  std::string config_hash() const;

  void validate() const;
  EmbeddingSpec embedding_spec(int longest_sequence) const;
  bool alpha_auto() const { return alpha == "auto"; }
  double alpha_value() const;  // numeric alpha; throws for "auto"
};

// Loaded dataset plus derived pieces shared by the commands.
struct Dataset {
  std::vector<SequenceRecord> records;
  std::vector<std::string> class_names;  // sorted distinct labels
  std::vector<int> labels;               // class indices per record
  int longest = 0;
};

Dataset load_dataset(const RunConfig& cfg);

struct EmbeddingArtifact {
  SparseMatrix x;
  nlohmann::json sidecar;
};

// The per-command entry points behind the CLI subcommands. Each writes its
// fixed-name artifacts under cfg.out_dir and returns the primary result.
DatasetStats cmd_stats(const RunConfig& cfg, bool as_json, std::ostream& out);
nlohmann::json cmd_embed(const RunConfig& cfg);
nlohmann::json cmd_select(const RunConfig& cfg);
nlohmann::json cmd_train(const RunConfig& cfg);
nlohmann::json cmd_evaluate(const RunConfig& cfg);
nlohmann::json cmd_project(const RunConfig& cfg);

// Full method: per run r in [0, n_runs): stratified split with seed
// base+r, feature selection on training rows only, reduce train/test, fit and
// evaluate each classifier; averaged report written to report.json.
nlohmann::json cmd_pipeline(const RunConfig& cfg);

// report.json contents for the given per-run evaluations.
nlohmann::json report_to_json(const EvalReport& report, const RunConfig& cfg,
                              const DatasetStats& stats,
                              const nlohmann::json& lasso_echo);

// Strips volatile timing fields (train_time_seconds and the wall_* keys) so
// reports can be compared across reruns.
nlohmann::json strip_timing(nlohmann::json j);

}  // namespace tcrsc
