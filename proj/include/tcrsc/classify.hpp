#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcrsc/sparse.hpp"

namespace tcrsc {

struct SplitPlan {
  std::vector<Index> train_idx;
  std::vector<Index> val_idx;
  std::vector<Index> test_idx;
  std::uint64_t seed = 0;
};

// Per-class seeded shuffle, then proportional allocation with
// largest-remainder rounding: test gets test_frac of the class, val gets
// val_frac of the remaining train pool. Requires >= 2 classes and >= 3
// members per class. Deterministic per seed.
SplitPlan stratified_split(const std::vector<int>& labels, double test_frac,
                           double val_frac, std::uint64_t seed);

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string kind() const = 0;
  virtual void fit(const Eigen::MatrixXd& x, const std::vector<int>& y,
                   int n_classes) = 0;
  // Rows sum to 1; one column per class.
  virtual Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const = 0;
  virtual nlohmann::json to_json() const = 0;

  // argmax of predict_proba, ties to the lowest class index.
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
  int n_classes() const { return n_classes_; }

 protected:
  int n_classes_ = 0;
};

class KnnClassifier final : public Classifier {
 public:
  explicit KnnClassifier(int k = 3) : k_(k) {}
  std::string kind() const override { return "knn"; }
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& y,
           int n_classes) override;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const override;
  nlohmann::json to_json() const override;

  int k() const { return k_; }

 private:
  friend std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json&);
  int k_;
  Eigen::MatrixXd train_x_;
  std::vector<int> train_y_;
};

class GaussianNbClassifier final : public Classifier {
 public:
  explicit GaussianNbClassifier(double var_smoothing = 1e-9)
      : var_smoothing_(var_smoothing) {}
  std::string kind() const override { return "nb"; }
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& y,
           int n_classes) override;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const override;
  nlohmann::json to_json() const override;

 private:
  friend std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json&);
  double var_smoothing_;
  Eigen::MatrixXd means_, vars_;  // n_classes x n_features
  Eigen::VectorXd log_priors_;
};

struct LrOptions {
  double l2 = 1e-4;          // ridge penalty on weights (not intercepts)
  double initial_step = 1.0;  // line-search starting step
  int max_epochs = 1000;
  double tol = 1e-6;  // gradient max-norm
};

// Free functions so the gradient can be checked against finite differences.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);
double lr_objective(const Eigen::MatrixXd& w, const Eigen::RowVectorXd& b,
                    const Eigen::MatrixXd& x, const std::vector<int>& y,
                    double l2);
void lr_gradient(const Eigen::MatrixXd& w, const Eigen::RowVectorXd& b,
                 const Eigen::MatrixXd& x, const std::vector<int>& y, double l2,
                 Eigen::MatrixXd& grad_w, Eigen::RowVectorXd& grad_b);

// Multinomial softmax regression, full-batch gradient descent with
// backtracking line search.
class LogisticRegressionClassifier final : public Classifier {
 public:
  explicit LogisticRegressionClassifier(const LrOptions& opts = {})
      : opts_(opts) {}
  std::string kind() const override { return "lr"; }
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& y,
           int n_classes) override;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const override;
  nlohmann::json to_json() const override;

  bool converged() const { return converged_; }
  const std::vector<double>& objective_trace() const { return objective_; }

 private:
  friend std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json&);
  LrOptions opts_;
  Eigen::MatrixXd w_;      // n_features x n_classes
  Eigen::RowVectorXd b_;   // 1 x n_classes
  bool converged_ = false;
  std::vector<double> objective_;
};

// CART with Gini impurity; exhaustive threshold scan over sorted unique
// values per feature; split ties broken by lower feature index, then lower
// threshold.
class DecisionTreeClassifier final : public Classifier {
 public:
  struct Node {
    int feature = -1;       // -1 for leaves
    double threshold = 0.0; // x[feature] <= threshold goes left
    int left = -1, right = -1;
    Eigen::VectorXd probs;  // leaf class frequencies
    std::int64_t n = 0;
  };

  explicit DecisionTreeClassifier(int max_depth = 20, int min_leaf = 1)
      : max_depth_(max_depth), min_leaf_(min_leaf) {}
  std::string kind() const override { return "dt"; }
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& y,
           int n_classes) override;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const override;
  nlohmann::json to_json() const override;

  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;

 private:
  friend std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json&);
  int build(const Eigen::MatrixXd& x, const std::vector<int>& y,
            std::vector<int>& idx, int begin, int end, int depth);
  int max_depth_, min_leaf_;
  std::vector<Node> nodes_;
};

// kind in {knn, nb, lr, dt}; knn_k applies to knn only.
std::unique_ptr<Classifier> make_classifier(const std::string& kind,
                                            int knn_k = 3);
std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j);

}  // namespace tcrsc
