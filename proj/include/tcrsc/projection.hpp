#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tcrsc/sparse.hpp"

namespace tcrsc {

struct TsneConfig {
  double perplexity = 30.0;  // must satisfy 1 < perplexity < (n-1)/3
  int iterations = 1000;     // >= 250
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;  // applied for the first 250 iterations
  int exaggeration_iters = 250;
  std::uint64_t seed = 0;
  std::int64_t max_points = 5000;  // stratified subsample above this

  void validate(Index n) const;
};

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x);
Eigen::MatrixXd squared_distances(const SparseMatrix& x);

// Row-stochastic conditional affinities: per-row bandwidth found by binary
// search so each row's entropy equals log(perplexity) within 1e-5.
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& sq_dists,
                                       double perplexity);

// Symmetrized P = (P_cond + P_cond^T) / (2n); entries sum to 1.
Eigen::MatrixXd pairwise_affinities(const Eigen::MatrixXd& x,
                                    double perplexity);
Eigen::MatrixXd pairwise_affinities_from_sq_dists(
    const Eigen::MatrixXd& sq_dists, double perplexity);

struct TsneResult {
  Eigen::MatrixXd y;  // n x 2, centered at the origin
  double kl_after_exaggeration = 0;  // KL at the exaggeration switch
  double kl_final = 0;
};

// Exact O(n^2) t-SNE: gradient descent on KL(P||Q) with Student-t Q,
// momentum 0.5 then 0.8 after the exaggeration phase, per-parameter gains,
// Gaussian init of scale 1e-4. Deterministic per seed.
TsneResult tsne(const Eigen::MatrixXd& x, const TsneConfig& cfg);
TsneResult tsne_from_sq_dists(const Eigen::MatrixXd& sq_dists,
                              const TsneConfig& cfg);

// Seeded per-class subsample preserving class proportions; returns sorted
// row indices (all rows when max_points >= n).
std::vector<Index> stratified_subsample(const std::vector<int>& labels,
                                        std::int64_t max_points,
                                        std::uint64_t seed);

// 800x600 scatter, axis-fit with 5% margin, fixed 8-color palette cycled by
// class index, legend included. A nonempty metadata string is embedded as an
// XML comment (used for the config hash).
void write_scatter_svg(const Eigen::MatrixXd& y,
                       const std::vector<std::string>& labels,
                       const std::string& path,
                       const std::string& metadata = "");

// CSV `id,x,y,label`, one row per point.
void write_projection_csv(const std::vector<std::string>& ids,
                          const Eigen::MatrixXd& y,
                          const std::vector<std::string>& labels,
                          const std::string& path);

}  // namespace tcrsc
