#include "tcrsc/classify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

#include "tcrsc/errors.hpp"
#include "tcrsc/parallel.hpp"
#include "tcrsc/rng.hpp"

namespace tcrsc {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;
using nlohmann::json;

SplitPlan stratified_split(const std::vector<int>& labels, double test_frac,
                           double val_frac, std::uint64_t seed) {
  if (labels.empty()) throw DataError("stratified_split: empty label vector");
  if (!(test_frac > 0 && test_frac < 1) || !(val_frac > 0 && val_frac < 1)) {
    throw DataError("stratified_split: fractions must be in (0, 1)");
  }
  int n_classes = 0;
  for (int c : labels) {
    if (c < 0) throw DataError("stratified_split: negative class index");
    n_classes = std::max(n_classes, c + 1);
  }
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
  }
  int present = 0;
  for (const auto& m : members) present += !m.empty();
  if (present < 2) throw DataError("stratified_split: need at least 2 classes");
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (!members[c].empty() && members[c].size() < 3) {
      throw DataError("stratified_split: class " + std::to_string(c) +
                      " has fewer than 3 members");
    }
  }

  Rng rng(seed);
  SplitPlan plan;
  plan.seed = seed;
  for (auto& idx : members) {
    if (idx.empty()) continue;
    rng.shuffle(idx);
    const auto n = static_cast<double>(idx.size());
    // largest-remainder allocation between the two buckets; ties go to the
    // carved-out bucket
    const auto n_test = static_cast<std::size_t>(std::floor(test_frac * n + 0.5));
    const double pool = n - static_cast<double>(n_test);
    const auto n_val = static_cast<std::size_t>(std::floor(val_frac * pool + 0.5));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i < n_test) {
        plan.test_idx.push_back(idx[i]);
      } else if (i < n_test + n_val) {
        plan.val_idx.push_back(idx[i]);
      } else {
        plan.train_idx.push_back(idx[i]);
      }
    }
  }
  return plan;
}

std::vector<int> Classifier::predict(const MatrixXd& x) const {
  const MatrixXd proba = predict_proba(x);
  std::vector<int> out(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < proba.cols(); ++c) {
      if (proba(i, c) > proba(i, best)) best = static_cast<int>(c);
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

// ---------------------------------------------------------------- KNN

void KnnClassifier::fit(const MatrixXd& x, const std::vector<int>& y,
                        int n_classes) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw DataError("knn: rows(X) must equal len(y)");
  }
  if (k_ < 1 || k_ > x.rows()) {
    throw DataError("knn: k must be in [1, rows(X_train)]");
  }
  train_x_ = x;
  train_y_ = y;
  n_classes_ = n_classes;
}

MatrixXd KnnClassifier::predict_proba(const MatrixXd& x) const {
  if (x.cols() != train_x_.cols()) throw DataError("knn: feature dimension mismatch");
  MatrixXd proba = MatrixXd::Zero(x.rows(), n_classes_);
  const auto n = static_cast<std::size_t>(x.rows());
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<double, Eigen::Index>> dist(
        static_cast<std::size_t>(train_x_.rows()));
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      for (Eigen::Index t = 0; t < train_x_.rows(); ++t) {
        dist[static_cast<std::size_t>(t)] = {
            (train_x_.row(t) - x.row(row)).squaredNorm(), t};
      }
      // equidistant ties resolved toward the lower training index
      std::partial_sort(dist.begin(), dist.begin() + k_, dist.end());
      for (int j = 0; j < k_; ++j) {
        const int cls = train_y_[static_cast<std::size_t>(dist[static_cast<std::size_t>(j)].second)];
        proba(row, cls) += 1.0;
      }
      proba.row(row) /= static_cast<double>(k_);
    }
  });
  return proba;
}

json KnnClassifier::to_json() const {
  json j;
  j["kind"] = "knn";
  j["k"] = k_;
  j["n_classes"] = n_classes_;
  j["train_y"] = train_y_;
  json rows = json::array();
  for (Eigen::Index i = 0; i < train_x_.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < train_x_.cols(); ++c) row.push_back(train_x_(i, c));
    rows.push_back(std::move(row));
  }
  j["train_x"] = std::move(rows);
  return j;
}

// ---------------------------------------------------------------- NB

void GaussianNbClassifier::fit(const MatrixXd& x, const std::vector<int>& y,
                               int n_classes) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw DataError("nb: rows(X) must equal len(y)");
  }
  n_classes_ = n_classes;
  const Eigen::Index d = x.cols();
  means_ = MatrixXd::Zero(n_classes, d);
  vars_ = MatrixXd::Zero(n_classes, d);
  VectorXd counts = VectorXd::Zero(n_classes);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int c = y[static_cast<std::size_t>(i)];
    means_.row(c) += x.row(i);
    counts[c] += 1.0;
  }
  for (int c = 0; c < n_classes; ++c) {
    if (counts[c] == 0) throw DataError("nb: class " + std::to_string(c) + " has no samples");
    means_.row(c) /= counts[c];
  }
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int c = y[static_cast<std::size_t>(i)];
    vars_.row(c) += (x.row(i) - means_.row(c)).array().square().matrix();
  }
  for (int c = 0; c < n_classes; ++c) vars_.row(c) /= counts[c];

  // floor variances at var_smoothing times the largest overall feature
  // variance (falls back to var_smoothing itself for all-constant data)
  const RowVectorXd overall_mean = x.colwise().mean();
  const RowVectorXd overall_var =
      (x.rowwise() - overall_mean).array().square().colwise().mean();
  double eps = var_smoothing_ * overall_var.maxCoeff();
  if (eps <= 0) eps = var_smoothing_;
  vars_ = vars_.cwiseMax(eps);

  log_priors_ = (counts / static_cast<double>(x.rows())).array().log();
}

MatrixXd GaussianNbClassifier::predict_proba(const MatrixXd& x) const {
  if (x.cols() != means_.cols()) throw DataError("nb: feature dimension mismatch");
  MatrixXd log_post(x.rows(), n_classes_);
  VectorXd log_norm(n_classes_);
  for (int c = 0; c < n_classes_; ++c) {
    log_norm[c] = (2.0 * std::numbers::pi * vars_.row(c).array()).log().sum();
  }
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int c = 0; c < n_classes_; ++c) {
      const double mahal =
          ((x.row(i) - means_.row(c)).array().square() / vars_.row(c).array()).sum();
      log_post(i, c) = log_priors_[c] - 0.5 * (log_norm[c] + mahal);
    }
    const double m = log_post.row(i).maxCoeff();
    log_post.row(i) = (log_post.row(i).array() - m).exp();
    log_post.row(i) /= log_post.row(i).sum();
  }
  return log_post;
}

json GaussianNbClassifier::to_json() const {
  json j;
  j["kind"] = "nb";
  j["var_smoothing"] = var_smoothing_;
  j["n_classes"] = n_classes_;
  auto dump = [](const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["means"] = dump(means_);
  j["vars"] = dump(vars_);
  j["log_priors"] = std::vector<double>(log_priors_.begin(), log_priors_.end());
  return j;
}

// ---------------------------------------------------------------- LR

MatrixXd softmax_rows(const MatrixXd& logits) {
  MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

double lr_objective(const MatrixXd& w, const RowVectorXd& b, const MatrixXd& x,
                    const std::vector<int>& y, double l2) {
  const MatrixXd logits = (x * w).rowwise() + b;
  double ce = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    ce += lse - logits(i, y[static_cast<std::size_t>(i)]);
  }
  return ce / static_cast<double>(x.rows()) + 0.5 * l2 * w.squaredNorm();
}

void lr_gradient(const MatrixXd& w, const RowVectorXd& b, const MatrixXd& x,
                 const std::vector<int>& y, double l2, MatrixXd& grad_w,
                 RowVectorXd& grad_b) {
  MatrixXd p = softmax_rows((x * w).rowwise() + b);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    p(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  }
  const double n = static_cast<double>(x.rows());
  grad_w = x.transpose() * p / n + l2 * w;
  grad_b = p.colwise().sum() / n;
}

void LogisticRegressionClassifier::fit(const MatrixXd& x,
                                       const std::vector<int>& y,
                                       int n_classes) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw DataError("lr: rows(X) must equal len(y)");
  }
  if (n_classes < 2) throw DataError("lr: need at least 2 classes");
  if (!x.allFinite()) throw NumericError("lr: non-finite features");
  n_classes_ = n_classes;
  w_ = MatrixXd::Zero(x.cols(), n_classes);
  b_ = RowVectorXd::Zero(n_classes);
  converged_ = false;
  objective_.clear();

  double obj = lr_objective(w_, b_, x, y, opts_.l2);
  double step = opts_.initial_step;
  MatrixXd gw;
  RowVectorXd gb;
  constexpr double kArmijo = 1e-4;
  for (int epoch = 0; epoch < opts_.max_epochs; ++epoch) {
    lr_gradient(w_, b_, x, y, opts_.l2, gw, gb);
    const double gmax = std::max(gw.cwiseAbs().maxCoeff(), gb.cwiseAbs().maxCoeff());
    if (gmax < opts_.tol) {
      converged_ = true;
      break;
    }
    const double gsq = gw.squaredNorm() + gb.squaredNorm();
    double s = step;
    bool accepted = false;
    while (s > 1e-16) {
      const MatrixXd w_try = w_ - s * gw;
      const RowVectorXd b_try = b_ - s * gb;
      const double obj_try = lr_objective(w_try, b_try, x, y, opts_.l2);
      if (obj_try <= obj - kArmijo * s * gsq) {
        w_ = w_try;
        b_ = b_try;
        obj = obj_try;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) break;  // step stalled below machine resolution
    objective_.push_back(obj);
    step = 2.0 * s;
  }
}

MatrixXd LogisticRegressionClassifier::predict_proba(const MatrixXd& x) const {
  if (x.cols() != w_.rows()) throw DataError("lr: feature dimension mismatch");
  return softmax_rows((x * w_).rowwise() + b_);
}

json LogisticRegressionClassifier::to_json() const {
  json j;
  j["kind"] = "lr";
  j["n_classes"] = n_classes_;
  j["l2"] = opts_.l2;
  j["converged"] = converged_;
  json rows = json::array();
  for (Eigen::Index i = 0; i < w_.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < w_.cols(); ++c) row.push_back(w_(i, c));
    rows.push_back(std::move(row));
  }
  j["w"] = std::move(rows);
  j["b"] = std::vector<double>(b_.begin(), b_.end());
  return j;
}

// ---------------------------------------------------------------- DT

namespace {

double gini(const std::vector<std::int64_t>& counts, std::int64_t n) {
  double g = 1.0;
  for (std::int64_t c : counts) {
    const double f = static_cast<double>(c) / static_cast<double>(n);
    g -= f * f;
  }
  return g;
}

}  // namespace

int DecisionTreeClassifier::build(const MatrixXd& x, const std::vector<int>& y,
                                  std::vector<int>& idx, int begin, int end,
                                  int depth) {
  const int n = end - begin;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes_), 0);
  for (int i = begin; i < end; ++i) {
    ++counts[static_cast<std::size_t>(y[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])])];
  }
  const int node_id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  {
    Node& node = nodes_.back();
    node.n = n;
    node.probs = VectorXd::Zero(n_classes_);
    for (int c = 0; c < n_classes_; ++c) {
      node.probs[c] = static_cast<double>(counts[static_cast<std::size_t>(c)]) / n;
    }
  }

  const bool pure =
      *std::max_element(counts.begin(), counts.end()) == static_cast<std::int64_t>(n);
  if (pure || depth >= max_depth_ || n < 2 * min_leaf_) return node_id;

  // exhaustive scan: candidate thresholds are the sorted unique values
  // (all but the largest); x <= t goes left
  int best_feature = -1;
  double best_threshold = 0;
  double best_impurity = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, int>> vals(static_cast<std::size_t>(n));
  std::vector<std::int64_t> left_counts(static_cast<std::size_t>(n_classes_));
  for (int f = 0; f < static_cast<int>(x.cols()); ++f) {
    for (int i = begin; i < end; ++i) {
      const int sample = idx[static_cast<std::size_t>(i)];
      vals[static_cast<std::size_t>(i - begin)] = {x(sample, f), y[static_cast<std::size_t>(sample)]};
    }
    std::sort(vals.begin(), vals.end());
    std::fill(left_counts.begin(), left_counts.end(), 0);
    for (int i = 0; i + 1 < n; ++i) {
      ++left_counts[static_cast<std::size_t>(vals[static_cast<std::size_t>(i)].second)];
      if (vals[static_cast<std::size_t>(i)].first == vals[static_cast<std::size_t>(i + 1)].first) continue;
      const int n_left = i + 1;
      const int n_right = n - n_left;
      if (n_left < min_leaf_ || n_right < min_leaf_) continue;
      std::vector<std::int64_t> right_counts(counts);
      for (std::size_t c = 0; c < right_counts.size(); ++c) right_counts[c] -= left_counts[c];
      const double impurity = (n_left * gini(left_counts, n_left) +
                               n_right * gini(right_counts, n_right)) /
                              static_cast<double>(n);
      if (impurity < best_impurity) {  // strict: ties keep lower feature/threshold
        best_impurity = impurity;
        best_feature = f;
        best_threshold = vals[static_cast<std::size_t>(i)].first;
      }
    }
  }
  if (best_feature < 0) return node_id;  // all candidate splits violate min_leaf

  const auto mid = std::stable_partition(
      idx.begin() + begin, idx.begin() + end, [&](int sample) {
        return x(sample, best_feature) <= best_threshold;
      });
  const int split = static_cast<int>(mid - idx.begin());
  const int left = build(x, y, idx, begin, split, depth + 1);
  const int right = build(x, y, idx, split, end, depth + 1);
  nodes_[static_cast<std::size_t>(node_id)].feature = best_feature;
  nodes_[static_cast<std::size_t>(node_id)].threshold = best_threshold;
  nodes_[static_cast<std::size_t>(node_id)].left = left;
  nodes_[static_cast<std::size_t>(node_id)].right = right;
  return node_id;
}

void DecisionTreeClassifier::fit(const MatrixXd& x, const std::vector<int>& y,
                                 int n_classes) {
  if (static_cast<std::size_t>(x.rows()) != y.size() || x.rows() == 0) {
    throw DataError("dt: rows(X) must equal len(y) >= 1");
  }
  n_classes_ = n_classes;
  nodes_.clear();
  std::vector<int> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  build(x, y, idx, 0, static_cast<int>(x.rows()), 0);
}

MatrixXd DecisionTreeClassifier::predict_proba(const MatrixXd& x) const {
  if (nodes_.empty()) throw DataError("dt: not fitted");
  MatrixXd proba(x.rows(), n_classes_);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
      const Node& nd = nodes_[static_cast<std::size_t>(node)];
      node = x(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    proba.row(i) = nodes_[static_cast<std::size_t>(node)].probs;
  }
  return proba;
}

int DecisionTreeClassifier::depth() const {
  std::function<int(int)> walk = [&](int node) -> int {
    const Node& nd = nodes_[static_cast<std::size_t>(node)];
    if (nd.feature < 0) return 0;
    return 1 + std::max(walk(nd.left), walk(nd.right));
  };
  return nodes_.empty() ? 0 : walk(0);
}

namespace {

json node_to_json(const std::vector<DecisionTreeClassifier::Node>& nodes, int id) {
  const auto& nd = nodes[static_cast<std::size_t>(id)];
  json j;
  j["n"] = nd.n;
  if (nd.feature < 0) {
    j["leaf"] = true;
    j["probs"] = std::vector<double>(nd.probs.begin(), nd.probs.end());
  } else {
    j["leaf"] = false;
    j["feature"] = nd.feature;
    j["threshold"] = nd.threshold;
    j["left"] = node_to_json(nodes, nd.left);
    j["right"] = node_to_json(nodes, nd.right);
  }
  return j;
}

int node_from_json(const json& j, std::vector<DecisionTreeClassifier::Node>& nodes,
                   int n_classes) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  nodes.back().n = j.at("n").get<std::int64_t>();
  if (j.at("leaf").get<bool>()) {
    const auto probs = j.at("probs").get<std::vector<double>>();
    nodes[static_cast<std::size_t>(id)].probs =
        Eigen::Map<const VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size()));
  } else {
    const int feature = j.at("feature").get<int>();
    const double threshold = j.at("threshold").get<double>();
    nodes[static_cast<std::size_t>(id)].probs = VectorXd::Zero(n_classes);
    const int left = node_from_json(j.at("left"), nodes, n_classes);
    const int right = node_from_json(j.at("right"), nodes, n_classes);
    nodes[static_cast<std::size_t>(id)].feature = feature;
    nodes[static_cast<std::size_t>(id)].threshold = threshold;
    nodes[static_cast<std::size_t>(id)].left = left;
    nodes[static_cast<std::size_t>(id)].right = right;
  }
  return id;
}

}  // namespace

json DecisionTreeClassifier::to_json() const {
  json j;
  j["kind"] = "dt";
  j["n_classes"] = n_classes_;
  j["max_depth"] = max_depth_;
  j["min_leaf"] = min_leaf_;
  j["tree"] = node_to_json(nodes_, 0);
  return j;
}

// ---------------------------------------------------------------- factory

std::unique_ptr<Classifier> make_classifier(const std::string& kind, int knn_k) {
  if (kind == "knn") return std::make_unique<KnnClassifier>(knn_k);
  if (kind == "nb") return std::make_unique<GaussianNbClassifier>();
  if (kind == "lr") return std::make_unique<LogisticRegressionClassifier>();
  if (kind == "dt") return std::make_unique<DecisionTreeClassifier>();
  throw DataError("unknown classifier kind: " + kind +
                  " (expected knn, nb, lr, or dt)");
}

std::unique_ptr<Classifier> classifier_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  auto load_matrix = [](const json& rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index k = 0; k < c; ++k) {
        m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
      }
    }
    return m;
  };
  if (kind == "knn") {
    auto c = std::make_unique<KnnClassifier>(j.at("k").get<int>());
    c->n_classes_ = j.at("n_classes").get<int>();
    c->train_y_ = j.at("train_y").get<std::vector<int>>();
    c->train_x_ = load_matrix(j.at("train_x"));
    return c;
  }
  if (kind == "nb") {
    auto c = std::make_unique<GaussianNbClassifier>(j.at("var_smoothing").get<double>());
    c->n_classes_ = j.at("n_classes").get<int>();
    c->means_ = load_matrix(j.at("means"));
    c->vars_ = load_matrix(j.at("vars"));
    const auto lp = j.at("log_priors").get<std::vector<double>>();
    c->log_priors_ = Eigen::Map<const VectorXd>(lp.data(), static_cast<Eigen::Index>(lp.size()));
    return c;
  }
  if (kind == "lr") {
    auto c = std::make_unique<LogisticRegressionClassifier>();
    c->n_classes_ = j.at("n_classes").get<int>();
    c->opts_.l2 = j.at("l2").get<double>();
    c->converged_ = j.at("converged").get<bool>();
    c->w_ = load_matrix(j.at("w"));
    const auto b = j.at("b").get<std::vector<double>>();
    c->b_ = Eigen::Map<const RowVectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    return c;
  }
  if (kind == "dt") {
    auto c = std::make_unique<DecisionTreeClassifier>(j.at("max_depth").get<int>(),
                                                      j.at("min_leaf").get<int>());
    c->n_classes_ = j.at("n_classes").get<int>();
    node_from_json(j.at("tree"), c->nodes_, c->n_classes_);
    return c;
  }
  throw DataError("unknown classifier kind in model file: " + kind);
}

}  // namespace tcrsc
