#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcrsc/sparse.hpp"

namespace tcrsc::lasso {

// sign(z) * max(|z| - gamma, 0)
template <typename Scalar>
Scalar soft_threshold(Scalar z, Scalar gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return Scalar(0);
}

struct FitOptions {
  double tol = 1e-6;
  int max_iter = 1000;  // full coordinate-descent sweeps
};

struct FitResult {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  bool converged = false;
  int sweeps = 0;
  std::vector<double> objective;  // objective value after each sweep
};

// (1/(2n)) * ||y - b0 - X beta||^2 + alpha * ||beta||_1
double objective_value(const SparseMatrixCsc& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double intercept,
                       double alpha);

// Cyclic coordinate descent with residual updates; the intercept is
// unpenalized. Declares convergence only once the max coefficient change per
// sweep is below tol AND the KKT conditions hold within tol.
FitResult fit(const SparseMatrix& x, const Eigen::VectorXd& y, double alpha,
              const FitOptions& opts = {});
FitResult fit(const SparseMatrixCsc& x, const Eigen::VectorXd& y, double alpha,
              const FitOptions& opts = {});

// Max KKT violation of (beta, intercept): for beta_j = 0 the excess of
// |(1/n) X_j' r| over alpha, else |(1/n) X_j' r - alpha*sign(beta_j)|;
// includes |mean(r)| for the intercept.
double kkt_violation(const SparseMatrixCsc& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& beta, double intercept,
                     double alpha);

struct ClassFit {
  std::vector<Index> indices;  // support, sorted
  std::vector<double> values;
  double intercept = 0.0;
  bool converged = false;
};

struct LassoModel {
  double alpha = 0.0;
  std::vector<std::string> class_names;  // parallel to per_class, may be empty
  std::vector<ClassFit> per_class;
  std::vector<Index> selected;  // sorted union of per-class supports
};

// One-vs-rest: for each class c fit on the 0/1 indicator target; selected is
// the union of supports. labels are class indices in [0, n_classes) with at
// least two classes present. Per-class fits run in parallel.
LassoModel select_features(const SparseMatrix& x, const std::vector<int>& labels,
                           double alpha, const FitOptions& opts = {},
                           const std::vector<std::string>& class_names = {});

// Column subset of x at model.selected (ascending original-index order).
SparseMatrix reduce(const SparseMatrix& x, const LassoModel& model);

// Largest alpha at which every one-vs-rest fit is fully shrunk:
// max over classes c, columns j of |(1/n) X_j' (y_c - mean(y_c))|.
double universal_alpha_max(const SparseMatrix& x, const std::vector<int>& labels);

// Persistence: alpha, per-class sparse coefficients (index/value arrays),
// intercepts, selected indices.
nlohmann::json model_to_json(const LassoModel& model);
LassoModel model_from_json(const nlohmann::json& j);

}  // namespace tcrsc::lasso
