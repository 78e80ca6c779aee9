#include "tcrsc/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "tcrsc/errors.hpp"

namespace tcrsc {

Eigen::MatrixXi confusion_matrix(const std::vector<int>& y_true,
                                 const std::vector<int>& y_pred, int n_classes) {
  if (y_true.empty()) throw DataError("confusion_matrix: empty input");
  if (y_true.size() != y_pred.size()) {
    throw DataError("confusion_matrix: length mismatch");
  }
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(n_classes, n_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
      throw DataError("confusion_matrix: label out of range at position " +
                      std::to_string(i));
    }
    ++m(t, p);
  }
  return m;
}

ClassificationMetrics classification_metrics(const Eigen::MatrixXi& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw DataError("classification_metrics: matrix must be square and nonempty");
  }
  const double total = m.sum();
  if (total <= 0) throw DataError("classification_metrics: all-zero matrix");

  const int n_classes = static_cast<int>(m.rows());
  ClassificationMetrics out;
  out.accuracy = static_cast<double>(m.trace()) / total;
  for (int c = 0; c < n_classes; ++c) {
    const double tp = m(c, c);
    const double support = m.row(c).sum();       // true class c
    const double predicted = m.col(c).sum();     // predicted class c
    const double precision = predicted > 0 ? tp / predicted : 0.0;  // 0/0 := 0
    const double recall = support > 0 ? tp / support : 0.0;
    const double f1 =
        precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    const double weight = support / total;
    out.precision_weighted += weight * precision;
    out.recall_weighted += weight * recall;
    out.f1_weighted += weight * f1;
    out.precision_macro += precision / n_classes;
    out.recall_macro += recall / n_classes;
    out.f1_macro += f1 / n_classes;
  }
  return out;
}

double binary_auc(const std::vector<int>& y01, const Eigen::VectorXd& scores) {
  if (y01.size() != static_cast<std::size_t>(scores.size()) || y01.empty()) {
    throw DataError("binary_auc: length mismatch or empty input");
  }
  const auto n = y01.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[static_cast<Eigen::Index>(a)] < scores[static_cast<Eigen::Index>(b)]; });

  // midranks for ties, then Mann-Whitney
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[static_cast<Eigen::Index>(order[j + 1])] ==
                            scores[static_cast<Eigen::Index>(order[i])]) {
      ++j;
    }
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }

  double pos_rank_sum = 0;
  std::size_t n_pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (y01[k] == 1) {
      pos_rank_sum += rank[k];
      ++n_pos;
    }
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("binary_auc: both classes must be present");
  }
  return (pos_rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1) / 2.0) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

OvrAuc roc_auc_ovr(const std::vector<int>& y_true, const Eigen::MatrixXd& scores) {
  if (y_true.size() != static_cast<std::size_t>(scores.rows()) || y_true.empty()) {
    throw DataError("roc_auc_ovr: length mismatch or empty input");
  }
  const int n_classes = static_cast<int>(scores.cols());
  std::vector<std::size_t> support(static_cast<std::size_t>(n_classes), 0);
  for (int t : y_true) {
    if (t < 0 || t >= n_classes) throw DataError("roc_auc_ovr: label out of range");
    ++support[static_cast<std::size_t>(t)];
  }
  OvrAuc out;
  for (int c = 0; c < n_classes; ++c) {
    if (support[static_cast<std::size_t>(c)] == 0) {
      throw DataError("roc_auc_ovr: class " + std::to_string(c) +
                      " absent from y_true; AUC undefined");
    }
    std::vector<int> indicator(y_true.size());
    for (std::size_t i = 0; i < y_true.size(); ++i) indicator[i] = y_true[i] == c ? 1 : 0;
    const double auc = binary_auc(indicator, scores.col(c));
    out.weighted += auc * static_cast<double>(support[static_cast<std::size_t>(c)]) /
                    static_cast<double>(y_true.size());
    out.macro += auc / n_classes;
  }
  return out;
}

int EvalReport::n_runs() const {
  int n = 0;
  for (const auto& [name, runs] : per_classifier) {
    n = std::max(n, static_cast<int>(runs.size()));
  }
  return n;
}

ClassifierScores mean_scores(const std::vector<ClassifierScores>& runs) {
  if (runs.empty()) throw DataError("mean_scores: no runs");
  ClassifierScores m;
  for (const auto& r : runs) {
    m.accuracy += r.accuracy;
    m.precision_weighted += r.precision_weighted;
    m.recall_weighted += r.recall_weighted;
    m.f1_weighted += r.f1_weighted;
    m.f1_macro += r.f1_macro;
    m.precision_macro += r.precision_macro;
    m.recall_macro += r.recall_macro;
    m.roc_auc_weighted += r.roc_auc_weighted;
    m.roc_auc_macro += r.roc_auc_macro;
    m.train_time_seconds += r.train_time_seconds;
  }
  const double n = static_cast<double>(runs.size());
  m.accuracy /= n;
  m.precision_weighted /= n;
  m.recall_weighted /= n;
  m.f1_weighted /= n;
  m.f1_macro /= n;
  m.precision_macro /= n;
  m.recall_macro /= n;
  m.roc_auc_weighted /= n;
  m.roc_auc_macro /= n;
  m.train_time_seconds /= n;
  return m;
}

std::map<std::string, ClassifierScores> EvalReport::mean() const {
  std::map<std::string, ClassifierScores> out;
  for (const auto& [name, runs] : per_classifier) out[name] = mean_scores(runs);
  return out;
}

EvalReport average_runs(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw DataError("average_runs: no reports");
  EvalReport out = reports.front();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].per_classifier.size() != out.per_classifier.size()) {
      throw DataError("average_runs: mismatched classifier sets");
    }
    for (const auto& [name, runs] : reports[i].per_classifier) {
      const auto it = out.per_classifier.find(name);
      if (it == out.per_classifier.end()) {
        throw DataError("average_runs: mismatched classifier sets");
      }
      it->second.insert(it->second.end(), runs.begin(), runs.end());
    }
  }
  return out;
}

}  // namespace tcrsc
