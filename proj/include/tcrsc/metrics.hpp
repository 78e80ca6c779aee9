#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace tcrsc {

// M(i, j) = count of true class i predicted as class j.
Eigen::MatrixXi confusion_matrix(const std::vector<int>& y_true,
                                 const std::vector<int>& y_pred, int n_classes);

struct ClassificationMetrics {
  double accuracy = 0;
  double precision_weighted = 0;
  double recall_weighted = 0;
  double f1_weighted = 0;
  double f1_macro = 0;
  double precision_macro = 0;
  double recall_macro = 0;
};

// Per-class precision/recall with 0/0 = 0; weighted averages use true-class
// support weights.
ClassificationMetrics classification_metrics(const Eigen::MatrixXi& m);

// Rank-based (Mann-Whitney) AUC with midranks for ties. y01 holds 0/1.
double binary_auc(const std::vector<int>& y01, const Eigen::VectorXd& scores);

struct OvrAuc {
  double weighted = 0;  // support-weighted one-vs-rest average
  double macro = 0;     // unweighted average
};

// Per class c: binary AUC of score column c against the indicator (y == c).
// Every class must appear in y_true.
OvrAuc roc_auc_ovr(const std::vector<int>& y_true,
                   const Eigen::MatrixXd& scores);

struct ClassifierScores {
  double accuracy = 0;
  double precision_weighted = 0;
  double recall_weighted = 0;
  double f1_weighted = 0;
  double f1_macro = 0;
  double precision_macro = 0;
  double recall_macro = 0;
  double roc_auc_weighted = 0;
  double roc_auc_macro = 0;
  double train_time_seconds = 0;
};

// Per-run values, keyed by classifier name. The mean is computed on demand so
// per-run values are always retained.
struct EvalReport {
  std::map<std::string, std::vector<ClassifierScores>> per_classifier;

  int n_runs() const;
  std::map<std::string, ClassifierScores> mean() const;
};

ClassifierScores mean_scores(const std::vector<ClassifierScores>& runs);

// Concatenates per-run values; all reports must carry the same classifier set.
EvalReport average_runs(const std::vector<EvalReport>& reports);

}  // namespace tcrsc
