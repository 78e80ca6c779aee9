#include "tcrsc/lasso.hpp"

#include <algorithm>
#include <set>

#include "tcrsc/errors.hpp"
#include "tcrsc/parallel.hpp"

namespace tcrsc::lasso {

namespace {

void check_finite(const SparseMatrixCsc& x, const Eigen::VectorXd& y) {
  if (!y.allFinite()) throw NumericError("lasso: non-finite target values");
  const double* v = x.valuePtr();
  for (Index i = 0; i < x.nonZeros(); ++i) {
    if (!std::isfinite(v[i])) throw NumericError("lasso: non-finite feature values");
  }
}

double column_dot_residual(const SparseMatrixCsc& x, Index j,
                           const Eigen::VectorXd& r) {
  double dot = 0;
  for (SparseMatrixCsc::InnerIterator it(x, j); it; ++it) dot += it.value() * r[it.row()];
  return dot;
}

double kkt_violation_with_residual(const SparseMatrixCsc& x,
                                   const Eigen::VectorXd& beta,
                                   const Eigen::VectorXd& r, double alpha) {
  const double n = static_cast<double>(x.rows());
  double worst = std::abs(r.mean());  // intercept stationarity
  for (Index j = 0; j < x.cols(); ++j) {
    const double g = column_dot_residual(x, j, r) / n;
    double viol;
    if (beta[j] == 0.0) {
      viol = std::max(0.0, std::abs(g) - alpha);
    } else {
      viol = std::abs(g - alpha * (beta[j] > 0 ? 1.0 : -1.0));
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

}  // namespace

double objective_value(const SparseMatrixCsc& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double intercept,
                       double alpha) {
  Eigen::VectorXd r = y;
  r.array() -= intercept;
  for (Index j = 0; j < x.cols(); ++j) {
    if (beta[j] == 0.0) continue;
    for (SparseMatrixCsc::InnerIterator it(x, j); it; ++it) {
      r[it.row()] -= it.value() * beta[j];
    }
  }
  const double n = static_cast<double>(x.rows());
  return r.squaredNorm() / (2.0 * n) + alpha * beta.lpNorm<1>();
}

double kkt_violation(const SparseMatrixCsc& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, double intercept,
                     double alpha) {
  Eigen::VectorXd r = y;
  r.array() -= intercept;
  for (Index j = 0; j < x.cols(); ++j) {
    if (beta[j] == 0.0) continue;
    for (SparseMatrixCsc::InnerIterator it(x, j); it; ++it) {
      r[it.row()] -= it.value() * beta[j];
    }
  }
  return kkt_violation_with_residual(x, beta, r, alpha);
}

FitResult fit(const SparseMatrixCsc& x, const Eigen::VectorXd& y, double alpha,
              const FitOptions& opts) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n < 1 || y.size() != n) throw DataError("lasso: rows(X) must equal len(y) >= 1");
  if (alpha < 0 || !std::isfinite(alpha)) throw DataError("lasso: alpha must be >= 0");
  check_finite(x, y);

  const double nd = static_cast<double>(n);
  Eigen::VectorXd col_sq(p);
  std::vector<Index> active_cols;
  for (Index j = 0; j < p; ++j) {
    double sq = 0;
    for (SparseMatrixCsc::InnerIterator it(x, j); it; ++it) sq += it.value() * it.value();
    col_sq[j] = sq / nd;
    if (sq > 0) active_cols.push_back(j);
  }

  FitResult res;
  res.coefficients = Eigen::VectorXd::Zero(p);
  res.intercept = y.mean();
  Eigen::VectorXd r = y.array() - res.intercept;

  for (int sweep = 0; sweep < opts.max_iter; ++sweep) {
    double max_delta = 0;
    for (const Index j : active_cols) {
      const double old = res.coefficients[j];
      const double rho = column_dot_residual(x, j, r) / nd + col_sq[j] * old;
      const double updated = soft_threshold(rho, alpha) / col_sq[j];
      if (updated != old) {
        const double diff = updated - old;
        for (SparseMatrixCsc::InnerIterator it(x, j); it; ++it) {
          r[it.row()] -= diff * it.value();
        }
        res.coefficients[j] = updated;
        max_delta = std::max(max_delta, std::abs(diff));
      }
    }
    const double shift = r.mean();
    res.intercept += shift;
    r.array() -= shift;
    max_delta = std::max(max_delta, std::abs(shift));

    res.sweeps = sweep + 1;
    res.objective.push_back(r.squaredNorm() / (2.0 * nd) +
                            alpha * res.coefficients.lpNorm<1>());
    if (!std::isfinite(res.objective.back())) {
      throw NumericError("lasso: objective diverged at sweep " +
                         std::to_string(res.sweeps));
    }

    if (max_delta < opts.tol &&
        kkt_violation_with_residual(x, res.coefficients, r, alpha) <= opts.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

FitResult fit(const SparseMatrix& x, const Eigen::VectorXd& y, double alpha,
              const FitOptions& opts) {
  return fit(SparseMatrixCsc(x), y, alpha, opts);
}

LassoModel select_features(const SparseMatrix& x, const std::vector<int>& labels,
                           double alpha, const FitOptions& opts,
                           const std::vector<std::string>& class_names) {
  if (static_cast<Index>(labels.size()) != x.rows()) {
    throw DataError("select_features: labels size must match rows");
  }
  int n_classes = 0;
  for (int c : labels) {
    if (c < 0) throw DataError("select_features: negative class index");
    n_classes = std::max(n_classes, c + 1);
  }
  std::vector<Index> class_count(static_cast<std::size_t>(n_classes), 0);
  for (int c : labels) ++class_count[static_cast<std::size_t>(c)];
  int present = 0;
  for (Index c : class_count) present += (c > 0);
  if (present < 2) throw DataError("select_features: need at least 2 classes");
  for (int c = 0; c < n_classes; ++c) {
    if (class_count[static_cast<std::size_t>(c)] == 0) {
      throw DataError("select_features: class " + std::to_string(c) + " has no members");
    }
  }
  if (!class_names.empty() && static_cast<int>(class_names.size()) != n_classes) {
    throw DataError("select_features: class_names size mismatch");
  }

  const SparseMatrixCsc xc(x);
  std::vector<FitResult> fits(static_cast<std::size_t>(n_classes));
  parallel_for(static_cast<std::size_t>(n_classes), [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      Eigen::VectorXd y(x.rows());
      for (Index i = 0; i < x.rows(); ++i) {
        y[i] = labels[static_cast<std::size_t>(i)] == static_cast<int>(c) ? 1.0 : 0.0;
      }
      fits[c] = fit(xc, y, alpha, opts);
    }
  });

  LassoModel model;
  model.alpha = alpha;
  model.class_names = class_names;
  std::set<Index> support;
  for (auto& f : fits) {
    ClassFit cf;
    cf.intercept = f.intercept;
    cf.converged = f.converged;
    for (Index j = 0; j < f.coefficients.size(); ++j) {
      if (f.coefficients[j] != 0.0) {
        cf.indices.push_back(j);
        cf.values.push_back(f.coefficients[j]);
        support.insert(j);
      }
    }
    model.per_class.push_back(std::move(cf));
  }
  model.selected.assign(support.begin(), support.end());
  return model;
}

SparseMatrix reduce(const SparseMatrix& x, const LassoModel& model) {
  if (model.selected.empty()) {
    throw DataError("reduce: no features selected; refit with a smaller alpha");
  }
  return take_columns(x, model.selected);
}

double universal_alpha_max(const SparseMatrix& x, const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != x.rows()) {
    throw DataError("universal_alpha_max: labels size must match rows");
  }
  int n_classes = 0;
  for (int c : labels) n_classes = std::max(n_classes, c + 1);
  const SparseMatrixCsc xc(x);
  const double n = static_cast<double>(x.rows());
  double worst = 0;
  for (int c = 0; c < n_classes; ++c) {
    Eigen::VectorXd y(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
      y[i] = labels[static_cast<std::size_t>(i)] == c ? 1.0 : 0.0;
    }
    y.array() -= y.mean();
    for (Index j = 0; j < xc.cols(); ++j) {
      worst = std::max(worst, std::abs(column_dot_residual(xc, j, y)) / n);
    }
  }
  return worst;
}

nlohmann::json model_to_json(const LassoModel& model) {
  nlohmann::json j;
  j["alpha"] = model.alpha;
  j["selected"] = model.selected;
  j["classes"] = nlohmann::json::array();
  for (std::size_t c = 0; c < model.per_class.size(); ++c) {
    const auto& cf = model.per_class[c];
    nlohmann::json e;
    e["label"] = c < model.class_names.size() ? model.class_names[c]
                                              : std::to_string(c);
    e["intercept"] = cf.intercept;
    e["converged"] = cf.converged;
    e["indices"] = cf.indices;
    e["values"] = cf.values;
    j["classes"].push_back(std::move(e));
  }
  return j;
}

LassoModel model_from_json(const nlohmann::json& j) {
  LassoModel model;
  model.alpha = j.at("alpha").get<double>();
  model.selected = j.at("selected").get<std::vector<Index>>();
  for (const auto& e : j.at("classes")) {
    model.class_names.push_back(e.at("label").get<std::string>());
    ClassFit cf;
    cf.intercept = e.at("intercept").get<double>();
    cf.converged = e.at("converged").get<bool>();
    cf.indices = e.at("indices").get<std::vector<Index>>();
    cf.values = e.at("values").get<std::vector<double>>();
    if (cf.indices.size() != cf.values.size()) {
      throw DataError("lasso model: indices/values length mismatch");
    }
    model.per_class.push_back(std::move(cf));
  }
  return model;
}

}  // namespace tcrsc::lasso
