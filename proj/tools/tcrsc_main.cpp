// tcrsc: k-mer sparse-coding embeddings for TCR sequences, Lasso feature
// selection, classification, and t-SNE projection.

#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tcrsc/errors.hpp"
#include "tcrsc/pipeline.hpp"

namespace {

using tcrsc::RunConfig;

// Flags override values from --config; only flags the user actually passed
// are applied.
struct Binder {
  CLI::App* app = nullptr;
  RunConfig staged;
  std::string config_path;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> applies;

  explicit Binder(CLI::App* a) : app(a) {
    app->add_option("--config", config_path, "JSON config file (flags win)");
  }

  template <typename T>
  void opt(const std::string& flag, T RunConfig::*member, const std::string& desc) {
    auto* o = app->add_option(flag, staged.*member, desc);
    applies.push_back({o, [this, member](RunConfig& c) { c.*member = staged.*member; }});
  }

  void flag(const std::string& name, bool RunConfig::*member, const std::string& desc) {
    auto* o = app->add_flag(name, staged.*member, desc);
    applies.push_back({o, [this, member](RunConfig& c) { c.*member = staged.*member; }});
  }

  void input_options() {
    opt("--input", &RunConfig::input_path, "input sequence file");
    opt("--format", &RunConfig::input_format, "input format: csv or fasta");
    flag("--has-header", &RunConfig::has_header, "first CSV line is a header");
    flag("--map-unknown", &RunConfig::map_unknown,
         "map nonstandard residues to X instead of rejecting");
  }

  void embedding_options() {
    opt("--k", &RunConfig::k, "k-mer length");
    opt("--gap", &RunConfig::gap, "spaced k-mer gap (0 = contiguous)");
    opt("--mode", &RunConfig::mode,
        "bag-of-kmers | positional-concat | sequence-ohe");
    opt("--max-len", &RunConfig::max_len,
        "padding bound for positional modes (0 = longest input)");
    flag("--domain-knowledge", &RunConfig::use_domain_knowledge,
         "fuse label-keyed domain-knowledge vectors (label leakage!)");
    opt("--domain-table", &RunConfig::domain_table_path,
        "domain-knowledge JSON (default: builtin four-cancer table)");
    flag("--normalize", &RunConfig::normalize, "L2-normalize embedding rows");
  }

  void lasso_options() {
    opt("--alpha", &RunConfig::alpha, "Lasso penalty, or 'auto'");
    opt("--lasso-tol", &RunConfig::lasso_tol, "coordinate-descent tolerance");
    opt("--lasso-max-iter", &RunConfig::lasso_max_iter, "max sweeps");
  }

  void classifier_options() {
    auto* o = app->add_option("--classifiers", staged.classifiers,
                              "subset of knn,nb,lr,dt")
                  ->delimiter(',');
    applies.push_back({o, [this](RunConfig& c) { c.classifiers = staged.classifiers; }});
    opt("--knn-k", &RunConfig::knn_k, "KNN neighbor count");
  }

  template <typename T>
  void tsne_opt(const std::string& name, T tcrsc::TsneConfig::*member,
                const std::string& desc) {
    auto* o = app->add_option(name, staged.tsne.*member, desc);
    applies.push_back(
        {o, [this, member](RunConfig& c) { c.tsne.*member = staged.tsne.*member; }});
  }

  void tsne_options() {
    tsne_opt("--perplexity", &tcrsc::TsneConfig::perplexity, "t-SNE perplexity");
    tsne_opt("--tsne-iterations", &tcrsc::TsneConfig::iterations, "t-SNE iterations");
    tsne_opt("--tsne-learning-rate", &tcrsc::TsneConfig::learning_rate,
             "t-SNE learning rate");
    tsne_opt("--tsne-seed", &tcrsc::TsneConfig::seed, "t-SNE init seed");
    tsne_opt("--max-points", &tcrsc::TsneConfig::max_points,
             "stratified subsample cap");
  }

  void output_options() {
    opt("--out-dir", &RunConfig::out_dir, "output directory");
  }

  void artifact_input_options() {
    opt("--embedding-dir", &RunConfig::embedding_dir,
        "directory holding embedding.txt/embedding.json (default: out-dir)");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw tcrsc::DataError("cannot open config: " + config_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::parse_error& e) {
        throw tcrsc::DataError(config_path + ": " + e.what());
      }
      cfg = RunConfig::from_json(j);
    }
    for (const auto& [option, apply] : applies) {
      if (option->count() > 0) apply(cfg);
    }
    if (cfg.input_path.empty()) {
      throw CLI::ValidationError("--input is required (as a flag or in --config)");
    }
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TCR sequence classification via sparse k-mer coding"};
  app.require_subcommand(1);

  auto* stats = app.add_subcommand("stats", "per-class dataset statistics");
  Binder stats_b(stats);
  stats_b.input_options();
  bool stats_json = false;
  stats->add_flag("--json", stats_json, "emit JSON instead of a table");
  stats->callback([&] { tcrsc::cmd_stats(stats_b.resolve(), stats_json, std::cout); });

  auto* embed = app.add_subcommand("embed", "write the sparse embedding matrix");
  Binder embed_b(embed);
  embed_b.input_options();
  embed_b.embedding_options();
  embed_b.output_options();
  embed->callback([&] { tcrsc::cmd_embed(embed_b.resolve()); });

  auto* select = app.add_subcommand("select", "Lasso feature selection");
  Binder select_b(select);
  select_b.input_options();
  select_b.lasso_options();
  select_b.output_options();
  select_b.artifact_input_options();
  select->callback([&] { tcrsc::cmd_select(select_b.resolve()); });

  auto* train = app.add_subcommand("train", "fit classifiers on reduced features");
  Binder train_b(train);
  train_b.input_options();
  train_b.classifier_options();
  train_b.output_options();
  train_b.artifact_input_options();
  train->callback([&] { tcrsc::cmd_train(train_b.resolve()); });

  auto* evaluate = app.add_subcommand("evaluate", "score saved models");
  Binder evaluate_b(evaluate);
  evaluate_b.input_options();
  evaluate_b.classifier_options();
  evaluate_b.output_options();
  evaluate_b.artifact_input_options();
  evaluate_b.opt("--model-dir", &RunConfig::model_dir,
                 "directory holding model_*.json (default: out-dir)");
  evaluate->callback([&] { tcrsc::cmd_evaluate(evaluate_b.resolve()); });

  auto* project = app.add_subcommand("project", "2D t-SNE of the embedding");
  Binder project_b(project);
  project_b.input_options();
  project_b.tsne_options();
  project_b.output_options();
  project_b.artifact_input_options();
  project->callback([&] { tcrsc::cmd_project(project_b.resolve()); });

  auto* pipeline = app.add_subcommand(
      "pipeline", "split / embed / select / train / evaluate, averaged over runs");
  Binder pipeline_b(pipeline);
  pipeline_b.input_options();
  pipeline_b.embedding_options();
  pipeline_b.lasso_options();
  pipeline_b.classifier_options();
  pipeline_b.tsne_options();
  pipeline_b.output_options();
  pipeline_b.opt("--test-frac", &RunConfig::test_frac, "test fraction");
  pipeline_b.opt("--val-frac", &RunConfig::val_frac, "validation fraction of train");
  pipeline_b.opt("--n-runs", &RunConfig::n_runs, "number of repeated runs");
  pipeline_b.opt("--seed", &RunConfig::seed, "base seed; run r uses seed+r");
  pipeline_b.flag("--project", &RunConfig::project, "also write tsne.csv/tsne.svg");
  pipeline->callback([&] { tcrsc::cmd_pipeline(pipeline_b.resolve()); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nRun with --help for usage.\n";
    return 1;
  } catch (const tcrsc::NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const tcrsc::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
