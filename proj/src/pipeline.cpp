#include "tcrsc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "tcrsc/classify.hpp"
#include "tcrsc/errors.hpp"
#include "tcrsc/hash.hpp"

namespace tcrsc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double round4(double v) { return std::round(v * 1e4) / 1e4; }

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

json stats_to_json(const DatasetStats& stats) {
  json classes = json::object();
  for (const auto& [label, cs] : stats.per_class) {
    classes[label] = {{"count", cs.count},
                      {"min_len", cs.min_len},
                      {"max_len", cs.max_len},
                      {"mean_len", round4(cs.mean_len)}};
  }
  return {{"classes", classes}, {"total", stats.total}};
}

void warn_label_leakage() {
  std::cerr << "WARNING: domain-knowledge features are derived from the class "
               "label itself;\n"
               "         reported accuracy includes label leakage.\n";
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg;
  static const std::set<std::string> known = {
      "input", "format", "has_header", "map_unknown", "k", "gap", "mode",
      "max_len", "use_domain_knowledge", "normalize", "domain_table", "alpha",
      "lasso_tol", "lasso_max_iter", "classifiers", "knn_k", "test_frac",
      "val_frac", "n_runs", "seed", "project", "tsne", "out_dir",
      "embedding_dir", "model_dir"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw DataError("config: unknown key '" + key + "'");
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("input", cfg.input_path);
  get("format", cfg.input_format);
  get("has_header", cfg.has_header);
  get("map_unknown", cfg.map_unknown);
  get("k", cfg.k);
  get("gap", cfg.gap);
  get("mode", cfg.mode);
  get("max_len", cfg.max_len);
  get("use_domain_knowledge", cfg.use_domain_knowledge);
  get("normalize", cfg.normalize);
  get("domain_table", cfg.domain_table_path);
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    cfg.alpha = a.is_string() ? a.get<std::string>() : std::to_string(a.get<double>());
  }
  get("lasso_tol", cfg.lasso_tol);
  get("lasso_max_iter", cfg.lasso_max_iter);
  get("classifiers", cfg.classifiers);
  get("knn_k", cfg.knn_k);
  get("test_frac", cfg.test_frac);
  get("val_frac", cfg.val_frac);
  get("n_runs", cfg.n_runs);
  get("seed", cfg.seed);
  get("project", cfg.project);
  if (j.contains("tsne")) {
    const json& t = j.at("tsne");
    static const std::set<std::string> tsne_known = {
        "perplexity", "iterations", "learning_rate", "early_exaggeration",
        "seed", "max_points"};
    for (const auto& [key, value] : t.items()) {
      if (!tsne_known.count(key)) throw DataError("config: unknown tsne key '" + key + "'");
    }
    if (t.contains("perplexity")) cfg.tsne.perplexity = t.at("perplexity").get<double>();
    if (t.contains("iterations")) cfg.tsne.iterations = t.at("iterations").get<int>();
    if (t.contains("learning_rate")) cfg.tsne.learning_rate = t.at("learning_rate").get<double>();
    if (t.contains("early_exaggeration")) cfg.tsne.early_exaggeration = t.at("early_exaggeration").get<double>();
    if (t.contains("seed")) cfg.tsne.seed = t.at("seed").get<std::uint64_t>();
    if (t.contains("max_points")) cfg.tsne.max_points = t.at("max_points").get<std::int64_t>();
  }
  get("out_dir", cfg.out_dir);
  get("embedding_dir", cfg.embedding_dir);
  get("model_dir", cfg.model_dir);
  return cfg;
}

json RunConfig::to_json() const {
  return {{"input", input_path},
          {"format", input_format},
          {"has_header", has_header},
          {"map_unknown", map_unknown},
          {"k", k},
          {"gap", gap},
          {"mode", mode},
          {"max_len", max_len},
          {"use_domain_knowledge", use_domain_knowledge},
          {"normalize", normalize},
          {"domain_table", domain_table_path},
          {"alpha", alpha},
          {"lasso_tol", lasso_tol},
          {"lasso_max_iter", lasso_max_iter},
          {"classifiers", classifiers},
          {"knn_k", knn_k},
          {"test_frac", test_frac},
          {"val_frac", val_frac},
          {"n_runs", n_runs},
          {"seed", seed},
          {"project", project},
          {"tsne",
           {{"perplexity", tsne.perplexity},
            {"iterations", tsne.iterations},
            {"learning_rate", tsne.learning_rate},
            {"early_exaggeration", tsne.early_exaggeration},
            {"seed", tsne.seed},
            {"max_points", tsne.max_points}}},
          {"out_dir", out_dir},
          {"embedding_dir", embedding_dir},
          {"model_dir", model_dir}};
}

std::string RunConfig::config_hash() const {
  json j = to_json();
  j.erase("out_dir");
  j.erase("embedding_dir");
  j.erase("model_dir");
  return hex64(fnv1a64(j.dump()));
}

double RunConfig::alpha_value() const {
  if (alpha_auto()) throw DataError("alpha is 'auto'; no fixed value");
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(alpha, &pos);
  } catch (const std::exception&) {
    throw DataError("invalid alpha: '" + alpha + "'");
  }
  if (pos != alpha.size() || !(v >= 0) || !std::isfinite(v)) {
    throw DataError("invalid alpha: '" + alpha + "' (expected a number >= 0 or 'auto')");
  }
  return v;
}

void RunConfig::validate() const {
  if (input_path.empty()) throw DataError("config: input path is required");
  if (input_format != "csv" && input_format != "fasta") {
    throw DataError("config: format must be csv or fasta");
  }
  parse_embedding_mode(mode);
  KmerSpec{k, gap}.validate();
  if (!(test_frac > 0 && test_frac < 1) || !(val_frac > 0 && val_frac < 1)) {
    throw DataError("config: fractions must be in (0, 1)");
  }
  if (n_runs < 1) throw DataError("config: n_runs must be >= 1");
  if (knn_k < 1) throw DataError("config: knn_k must be >= 1");
  if (classifiers.empty()) throw DataError("config: classifier list is empty");
  for (const auto& c : classifiers) {
    if (c != "knn" && c != "nb" && c != "lr" && c != "dt") {
      throw DataError("config: unknown classifier '" + c + "'");
    }
  }
  if (!alpha_auto()) alpha_value();
}

EmbeddingSpec RunConfig::embedding_spec(int longest_sequence) const {
  EmbeddingSpec spec;
  spec.kmer = KmerSpec{k, gap};
  spec.mode = parse_embedding_mode(mode);
  spec.max_len = max_len > 0 ? max_len : longest_sequence;
  spec.use_domain_knowledge = use_domain_knowledge;
  spec.normalize = normalize;
  return spec;
}

Dataset load_dataset(const RunConfig& cfg) {
  if (cfg.input_format != "csv" && cfg.input_format != "fasta") {
    throw DataError("config: format must be csv or fasta");
  }
  Dataset ds;
  ds.records = cfg.input_format == "fasta"
                   ? load_fasta(cfg.input_path, cfg.map_unknown)
                   : load_csv(cfg.input_path, cfg.has_header, cfg.map_unknown);
  if (ds.records.empty()) throw DataError(cfg.input_path + ": no records");
  std::set<std::string> names;
  for (const auto& rec : ds.records) {
    names.insert(rec.label);
    ds.longest = std::max(ds.longest, static_cast<int>(rec.residues.size()));
  }
  ds.class_names.assign(names.begin(), names.end());
  ds.labels.reserve(ds.records.size());
  for (const auto& rec : ds.records) {
    const auto it = std::lower_bound(ds.class_names.begin(), ds.class_names.end(), rec.label);
    ds.labels.push_back(static_cast<int>(it - ds.class_names.begin()));
  }
  return ds;
}

DatasetStats cmd_stats(const RunConfig& cfg, bool as_json, std::ostream& out) {
  const Dataset ds = load_dataset(cfg);
  const DatasetStats stats = compute_stats(ds.records);
  if (as_json) {
    out << stats_to_json(stats).dump(2) << '\n';
  } else {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-16s %10s %6s %6s %10s\n", "Class", "Count",
                  "Min", "Max", "Mean");
    out << buf;
    for (const auto& [label, cs] : stats.per_class) {
      std::snprintf(buf, sizeof(buf), "%-16s %10lld %6d %6d %10.4f\n", label.c_str(),
                    static_cast<long long>(cs.count), cs.min_len, cs.max_len,
                    cs.mean_len);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%-16s %10lld\n", "Total",
                  static_cast<long long>(stats.total));
    out << buf;
  }
  return stats;
}

namespace {

struct EmbedPieces {
  Dataset dataset;
  EmbeddingSpec spec;
  DomainKnowledgeTable table{std::map<std::string, DomainKnowledgeTable::Properties>{}};
  SparseMatrix x;
  json sidecar;
};

json embedding_echo(const EmbeddingSpec& spec, const DomainKnowledgeTable* table) {
  return {{"mode", to_string(spec.mode)},
          {"k", spec.kmer.k},
          {"gap", spec.kmer.gap},
          {"max_len", spec.max_len},
          {"use_domain_knowledge", spec.use_domain_knowledge},
          {"normalize", spec.normalize},
          {"alphabet_hash", hex64(Alphabet::standard().hash())},
          {"domain_table_hash", table ? hex64(table->hash()) : ""}};
}

EmbedPieces embed_pieces(const RunConfig& cfg) {
  EmbedPieces p;
  p.dataset = load_dataset(cfg);
  p.spec = cfg.embedding_spec(p.dataset.longest);
  const DomainKnowledgeTable* table = nullptr;
  if (cfg.use_domain_knowledge) {
    warn_label_leakage();
    p.table = cfg.domain_table_path.empty()
                  ? DomainKnowledgeTable::builtin_default()
                  : DomainKnowledgeTable::load_json(cfg.domain_table_path);
    table = &p.table;
  }
  std::size_t short_rows = 0;
  p.x = embed_dataset(p.dataset.records, p.spec, table, &short_rows);
  if (short_rows > 0) {
    std::cerr << "warning: " << short_rows
              << " sequence(s) shorter than the k-mer window; their sequence "
                 "blocks are all-zero\n";
  }

  json echo = embedding_echo(p.spec, table);
  echo["input_fnv"] = hex64(fnv1a64_file(cfg.input_path));
  const std::string embedding_hash = hex64(fnv1a64(echo.dump()));
  p.sidecar = echo;
  p.sidecar["input"] = cfg.input_path;
  p.sidecar["n_records"] = p.dataset.records.size();
  p.sidecar["rows"] = p.x.rows();
  p.sidecar["cols"] = p.x.cols();
  p.sidecar["nnz"] = p.x.nonZeros();
  p.sidecar["embedding_hash"] = embedding_hash;
  p.sidecar["config_hash"] = cfg.config_hash();
  return p;
}

// Embedding artifact as read back by the downstream commands; rejects
// mixed-provenance inputs via the stored input hash.
struct LoadedEmbedding {
  SparseMatrix x;
  json sidecar;
  std::string embedding_hash;
};

LoadedEmbedding load_embedding(const RunConfig& cfg) {
  const std::string dir = cfg.embedding_dir.empty() ? cfg.out_dir : cfg.embedding_dir;
  LoadedEmbedding le;
  le.sidecar = load_json_file(dir + "/embedding.json");
  le.embedding_hash = le.sidecar.at("embedding_hash").get<std::string>();
  const std::string recorded_input = le.sidecar.at("input_fnv").get<std::string>();
  if (hex64(fnv1a64_file(cfg.input_path)) != recorded_input) {
    throw DataError("embedding.json was built from a different input file than " +
                    cfg.input_path);
  }
  le.x = read_triplets(dir + "/embedding.txt");
  if (le.x.rows() != le.sidecar.at("rows").get<Index>() ||
      le.x.cols() != le.sidecar.at("cols").get<Index>()) {
    throw DataError("embedding.txt does not match its sidecar dimensions");
  }
  return le;
}

ClassifierScores evaluate_classifier(const Classifier& clf,
                                     const Eigen::MatrixXd& x_test,
                                     const std::vector<int>& y_test,
                                     int n_classes, double train_time) {
  const Eigen::MatrixXd proba = clf.predict_proba(x_test);
  const std::vector<int> pred = clf.predict(x_test);
  const Eigen::MatrixXi cm = confusion_matrix(y_test, pred, n_classes);
  const ClassificationMetrics m = classification_metrics(cm);
  const OvrAuc auc = roc_auc_ovr(y_test, proba);
  ClassifierScores s;
  s.accuracy = m.accuracy;
  s.precision_weighted = m.precision_weighted;
  s.recall_weighted = m.recall_weighted;
  s.f1_weighted = m.f1_weighted;
  s.f1_macro = m.f1_macro;
  s.precision_macro = m.precision_macro;
  s.recall_macro = m.recall_macro;
  s.roc_auc_weighted = auc.weighted;
  s.roc_auc_macro = auc.macro;
  s.train_time_seconds = train_time;
  return s;
}

json scores_to_json(const ClassifierScores& s) {
  return {{"accuracy", s.accuracy},
          {"precision_weighted", s.precision_weighted},
          {"recall_weighted", s.recall_weighted},
          {"f1_weighted", s.f1_weighted},
          {"f1_macro", s.f1_macro},
          {"precision_macro", s.precision_macro},
          {"recall_macro", s.recall_macro},
          {"roc_auc_weighted", s.roc_auc_weighted},
          {"roc_auc_macro", s.roc_auc_macro},
          {"train_time_seconds", s.train_time_seconds}};
}

std::vector<int> take_labels(const std::vector<int>& labels,
                             const std::vector<Index>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(labels[static_cast<std::size_t>(i)]);
  return out;
}

// Validation-accuracy tuning over the log-spaced grid {1e-4 .. 1}: pick the
// largest alpha within one standard error of the best accuracy. Accuracy is
// measured with the first configured classifier.
double tune_alpha(const RunConfig& cfg, const SparseMatrix& x_train,
                  const std::vector<int>& y_train, const SparseMatrix& x_val,
                  const std::vector<int>& y_val, int n_classes) {
  std::vector<double> grid;
  for (int i = 0; i < 9; ++i) grid.push_back(std::pow(10.0, -4.0 + 0.5 * i));

  const lasso::FitOptions opts{cfg.lasso_tol, cfg.lasso_max_iter};
  std::vector<double> acc(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    try {
      const lasso::LassoModel model = lasso::select_features(x_train, y_train, grid[g], opts);
      if (model.selected.empty()) continue;
      const Eigen::MatrixXd train_d = to_dense(lasso::reduce(x_train, model));
      const Eigen::MatrixXd val_d = to_dense(lasso::reduce(x_val, model));
      auto clf = make_classifier(cfg.classifiers.front(), cfg.knn_k);
      clf->fit(train_d, y_train, n_classes);
      const std::vector<int> pred = clf->predict(val_d);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == y_val[i];
      acc[g] = static_cast<double>(hits) / static_cast<double>(pred.size());
    } catch (const DataError&) {
      acc[g] = 0.0;  // e.g. empty selection at this alpha
    }
  }
  const std::size_t best = static_cast<std::size_t>(
      std::max_element(acc.begin(), acc.end()) - acc.begin());
  const double n_val = static_cast<double>(y_val.size());
  const double se = std::sqrt(std::max(acc[best] * (1.0 - acc[best]), 0.0) / n_val);
  double chosen = grid[best];
  for (std::size_t g = grid.size(); g-- > 0;) {
    if (acc[g] >= acc[best] - se) {
      chosen = grid[g];
      break;
    }
  }
  return chosen;
}

}  // namespace

json cmd_embed(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  EmbedPieces p = embed_pieces(cfg);
  write_triplets(p.x, cfg.out_dir + "/embedding.txt");
  write_json_file(p.sidecar, cfg.out_dir + "/embedding.json");
  return p.sidecar;
}

json cmd_select(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.alpha_auto()) {
    throw DataError("select: alpha=auto is only available in the pipeline "
                    "command; pass a numeric alpha");
  }
  fs::create_directories(cfg.out_dir);
  const LoadedEmbedding le = load_embedding(cfg);
  const Dataset ds = load_dataset(cfg);
  if (static_cast<Index>(ds.records.size()) != le.x.rows()) {
    throw DataError("select: embedding rows do not match the input record count");
  }
  const lasso::FitOptions opts{cfg.lasso_tol, cfg.lasso_max_iter};
  const lasso::LassoModel model = lasso::select_features(
      le.x, ds.labels, cfg.alpha_value(), opts, ds.class_names);
  if (model.selected.empty()) {
    throw DataError("select: no features selected; refit with a smaller alpha");
  }
  json j = lasso::model_to_json(model);
  j["lasso_hash"] = hex64(fnv1a64(j.dump()));
  j["embedding_hash"] = le.embedding_hash;
  j["config_hash"] = cfg.config_hash();
  write_json_file(j, cfg.out_dir + "/lasso.json");
  return j;
}

json cmd_train(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const LoadedEmbedding le = load_embedding(cfg);
  const Dataset ds = load_dataset(cfg);
  json lasso_json = load_json_file(cfg.out_dir + "/lasso.json");
  if (lasso_json.at("embedding_hash").get<std::string>() != le.embedding_hash) {
    throw DataError("train: lasso.json was fitted on a different embedding");
  }
  const lasso::LassoModel model = lasso::model_from_json(lasso_json);
  const Eigen::MatrixXd x = to_dense(lasso::reduce(le.x, model));
  const int n_classes = static_cast<int>(ds.class_names.size());

  json summary = json::object();
  for (const auto& kind : cfg.classifiers) {
    auto clf = make_classifier(kind, cfg.knn_k);
    const auto t0 = std::chrono::steady_clock::now();
    clf->fit(x, ds.labels, n_classes);
    const double train_time = elapsed_seconds(t0);
    json j;
    j["model"] = clf->to_json();
    j["classes"] = ds.class_names;
    j["embedding_hash"] = le.embedding_hash;
    j["lasso_hash"] = lasso_json.at("lasso_hash");
    j["config_hash"] = cfg.config_hash();
    j["train_time_seconds"] = train_time;
    const std::string path = cfg.out_dir + "/model_" + kind + ".json";
    write_json_file(j, path);
    summary[kind] = {{"file", path}, {"train_time_seconds", train_time}};
  }
  return summary;
}

json cmd_evaluate(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const LoadedEmbedding le = load_embedding(cfg);
  const Dataset ds = load_dataset(cfg);
  const std::string mdir = cfg.model_dir.empty() ? cfg.out_dir : cfg.model_dir;
  json lasso_json = load_json_file(mdir + "/lasso.json");
  if (lasso_json.at("embedding_hash").get<std::string>() != le.embedding_hash) {
    throw DataError("evaluate: lasso.json was fitted on a different embedding");
  }
  const lasso::LassoModel model = lasso::model_from_json(lasso_json);
  const Eigen::MatrixXd x = to_dense(lasso::reduce(le.x, model));
  const int n_classes = static_cast<int>(ds.class_names.size());

  EvalReport report;
  for (const auto& kind : cfg.classifiers) {
    const json mj = load_json_file(mdir + "/model_" + kind + ".json");
    if (mj.at("embedding_hash").get<std::string>() != le.embedding_hash ||
        mj.at("lasso_hash") != lasso_json.at("lasso_hash")) {
      throw DataError("evaluate: model_" + kind +
                      ".json does not belong to this embedding/selection");
    }
    const auto clf = classifier_from_json(mj.at("model"));
    report.per_classifier[kind].push_back(
        evaluate_classifier(*clf, x, ds.labels, n_classes,
                            mj.at("train_time_seconds").get<double>()));
  }

  const DatasetStats stats = compute_stats(ds.records);
  json lasso_echo = {{"alpha", {model.alpha}},
                     {"n_selected", {model.selected.size()}}};
  const json out = report_to_json(report, cfg, stats, lasso_echo);
  write_json_file(out, cfg.out_dir + "/report.json");
  return out;
}

json cmd_project(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const LoadedEmbedding le = load_embedding(cfg);
  const Dataset ds = load_dataset(cfg);
  if (static_cast<Index>(ds.records.size()) != le.x.rows()) {
    throw DataError("project: embedding rows do not match the input record count");
  }

  const std::vector<Index> subsample =
      stratified_subsample(ds.labels, cfg.tsne.max_points, cfg.tsne.seed);
  const SparseMatrix x = take_rows(le.x, subsample);
  const TsneResult result = tsne_from_sq_dists(squared_distances(x), cfg.tsne);

  std::vector<std::string> ids, labels;
  for (Index i : subsample) {
    ids.push_back(ds.records[static_cast<std::size_t>(i)].id);
    labels.push_back(ds.records[static_cast<std::size_t>(i)].label);
  }
  write_projection_csv(ids, result.y, labels, cfg.out_dir + "/tsne.csv");
  write_scatter_svg(result.y, labels, cfg.out_dir + "/tsne.svg",
                    "config_hash: " + cfg.config_hash());
  return {{"n_points", subsample.size()},
          {"kl_final", result.kl_final},
          {"config_hash", cfg.config_hash()},
          {"csv", cfg.out_dir + "/tsne.csv"},
          {"svg", cfg.out_dir + "/tsne.svg"}};
}

json report_to_json(const EvalReport& report, const RunConfig& cfg,
                    const DatasetStats& stats, const json& lasso_echo) {
  json classifiers = json::object();
  const auto means = report.mean();
  for (const auto& [name, runs] : report.per_classifier) {
    json run_list = json::array();
    for (const auto& r : runs) run_list.push_back(scores_to_json(r));
    classifiers[name] = {{"runs", run_list}, {"mean", scores_to_json(means.at(name))}};
  }
  json seeds = json::array();
  for (int r = 0; r < report.n_runs(); ++r) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(r));
  return {{"config_hash", cfg.config_hash()},
          {"embedding",
           {{"mode", cfg.mode},
            {"k", cfg.k},
            {"gap", cfg.gap},
            {"use_domain_knowledge", cfg.use_domain_knowledge},
            {"normalize", cfg.normalize}}},
          {"dataset", stats_to_json(stats)},
          {"n_runs", report.n_runs()},
          {"seeds", seeds},
          {"lasso", lasso_echo},
          {"classifiers", classifiers}};
}

json cmd_pipeline(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  EmbedPieces p = embed_pieces(cfg);
  write_triplets(p.x, cfg.out_dir + "/embedding.txt");
  write_json_file(p.sidecar, cfg.out_dir + "/embedding.json");

  const Dataset& ds = p.dataset;
  const int n_classes = static_cast<int>(ds.class_names.size());
  const DatasetStats stats = compute_stats(ds.records);
  const lasso::FitOptions opts{cfg.lasso_tol, cfg.lasso_max_iter};

  std::vector<EvalReport> run_reports;
  std::vector<double> run_alphas;
  std::vector<std::size_t> run_selected;
  json persisted_lasso;

  for (int run = 0; run < cfg.n_runs; ++run) {
    const std::uint64_t run_seed = cfg.seed + static_cast<std::uint64_t>(run);
    const SplitPlan plan =
        stratified_split(ds.labels, cfg.test_frac, cfg.val_frac, run_seed);

    const SparseMatrix x_train = take_rows(p.x, plan.train_idx);
    const SparseMatrix x_test = take_rows(p.x, plan.test_idx);
    const std::vector<int> y_train = take_labels(ds.labels, plan.train_idx);
    const std::vector<int> y_test = take_labels(ds.labels, plan.test_idx);

    double alpha = 0;
    if (cfg.alpha_auto()) {
      if (plan.val_idx.empty()) {
        throw DataError("pipeline: alpha=auto needs a nonempty validation "
                        "split; dataset too small for val_frac=" +
                        std::to_string(cfg.val_frac));
      }
      const SparseMatrix x_val = take_rows(p.x, plan.val_idx);
      const std::vector<int> y_val = take_labels(ds.labels, plan.val_idx);
      alpha = tune_alpha(cfg, x_train, y_train, x_val, y_val, n_classes);
      std::cerr << "run " << run << ": tuned alpha = " << alpha << "\n";
    } else {
      alpha = cfg.alpha_value();
    }

    // selection on training rows only; test columns follow the trained model
    const lasso::LassoModel model =
        lasso::select_features(x_train, y_train, alpha, opts, ds.class_names);
    if (model.selected.empty()) {
      throw DataError("pipeline: no features selected at alpha=" +
                      std::to_string(alpha) + "; use a smaller alpha");
    }
    run_alphas.push_back(alpha);
    run_selected.push_back(model.selected.size());
    if (run == 0) {
      persisted_lasso = lasso::model_to_json(model);
      persisted_lasso["lasso_hash"] = hex64(fnv1a64(persisted_lasso.dump()));
      persisted_lasso["embedding_hash"] = p.sidecar.at("embedding_hash");
      persisted_lasso["config_hash"] = cfg.config_hash();
      persisted_lasso["run"] = 0;
      persisted_lasso["seed"] = run_seed;
      persisted_lasso["trained_on"] = "train-rows-only";
    }

    const Eigen::MatrixXd train_d = to_dense(lasso::reduce(x_train, model));
    const Eigen::MatrixXd test_d = to_dense(lasso::reduce(x_test, model));

    EvalReport run_report;
    for (const auto& kind : cfg.classifiers) {
      auto clf = make_classifier(kind, cfg.knn_k);
      const auto t0 = std::chrono::steady_clock::now();
      clf->fit(train_d, y_train, n_classes);
      const double train_time = elapsed_seconds(t0);
      run_report.per_classifier[kind].push_back(
          evaluate_classifier(*clf, test_d, y_test, n_classes, train_time));
    }
    run_reports.push_back(std::move(run_report));
  }

  write_json_file(persisted_lasso, cfg.out_dir + "/lasso.json");

  const EvalReport report = average_runs(run_reports);
  json lasso_echo = {{"alpha", run_alphas}, {"n_selected", run_selected}};
  const json out = report_to_json(report, cfg, stats, lasso_echo);
  write_json_file(out, cfg.out_dir + "/report.json");

  if (cfg.project) {
    const std::vector<Index> subsample =
        stratified_subsample(ds.labels, cfg.tsne.max_points, cfg.tsne.seed);
    const SparseMatrix xs = take_rows(p.x, subsample);
    const TsneResult result = tsne_from_sq_dists(squared_distances(xs), cfg.tsne);
    std::vector<std::string> ids, labels;
    for (Index i : subsample) {
      ids.push_back(ds.records[static_cast<std::size_t>(i)].id);
      labels.push_back(ds.records[static_cast<std::size_t>(i)].label);
    }
    write_projection_csv(ids, result.y, labels, cfg.out_dir + "/tsne.csv");
    write_scatter_svg(result.y, labels, cfg.out_dir + "/tsne.svg",
                    "config_hash: " + cfg.config_hash());
  }
  return out;
}

json strip_timing(json j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto& [key, value] : j.items()) {
      if (key.ends_with("_seconds")) continue;
      out[key] = strip_timing(value);
    }
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (auto& value : j) out.push_back(strip_timing(value));
    return out;
  }
  return j;
}

}  // namespace tcrsc
