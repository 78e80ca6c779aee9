#include "tcrsc/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "tcrsc/errors.hpp"
#include "tcrsc/parallel.hpp"
#include "tcrsc/rng.hpp"

namespace tcrsc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void TsneConfig::validate(Index n) const {
  if (n < 4) throw DataError("t-SNE needs at least 4 points");
  if (!(perplexity > 1.0) ||
      perplexity >= (static_cast<double>(n) - 1.0) / 3.0) {
    throw DataError("perplexity must satisfy 1 < perplexity < (n-1)/3; got " +
                    std::to_string(perplexity) + " for n=" + std::to_string(n));
  }
  if (iterations < 250) throw DataError("t-SNE iterations must be >= 250");
}

MatrixXd squared_distances(const MatrixXd& x) {
  const VectorXd sq = x.rowwise().squaredNorm();
  MatrixXd d2 = sq.replicate(1, x.rows());
  d2 += sq.transpose().replicate(x.rows(), 1);
  d2 -= 2.0 * (x * x.transpose());
  return d2.cwiseMax(0.0);
}

MatrixXd squared_distances(const SparseMatrix& x) {
  const SparseMatrixCsc xt = x.transpose();
  const MatrixXd gram = MatrixXd(SparseMatrix(x * xt));
  const VectorXd sq = gram.diagonal();
  MatrixXd d2 = sq.replicate(1, x.rows());
  d2 += sq.transpose().replicate(x.rows(), 1);
  d2 -= 2.0 * gram;
  return d2.cwiseMax(0.0);
}

MatrixXd conditional_affinities(const MatrixXd& sq_dists, double perplexity) {
  const Eigen::Index n = sq_dists.rows();
  if (n != sq_dists.cols()) throw DataError("conditional_affinities: matrix must be square");
  if (n < 4) throw DataError("conditional_affinities: need at least 4 points");
  if (!(perplexity > 1.0)) throw DataError("conditional_affinities: perplexity must exceed 1");

  const double target = std::log(perplexity);
  MatrixXd p = MatrixXd::Zero(n, n);

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    VectorXd row(n);
    for (auto i = static_cast<Eigen::Index>(begin);
         i < static_cast<Eigen::Index>(end); ++i) {
      // distance floor guards duplicate rows; shifting by the row minimum
      // leaves the normalized distribution (and its entropy) unchanged while
      // pinning the nearest neighbor's weight at 1, so rows cannot underflow
      double dmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        row[j] = j == i ? 0.0 : std::max(sq_dists(i, j), 1e-12);
        if (j != i) dmin = std::min(dmin, row[j]);
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) row[j] -= dmin;
      }
      double beta = 1.0;
      double beta_min = -std::numeric_limits<double>::infinity();
      double beta_max = std::numeric_limits<double>::infinity();
      double sum_p = 1.0;
      for (int step = 0; step < 50; ++step) {
        sum_p = 0;
        double weighted = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
          const double pj = j == i ? 0.0 : std::exp(-beta * row[j]);
          p(i, j) = pj;
          sum_p += pj;
          weighted += pj * row[j];
        }
        const double entropy = std::log(sum_p) + beta * weighted / sum_p;
        const double diff = entropy - target;
        if (std::abs(diff) < 1e-5) break;
        if (diff > 0) {  // entropy too high: sharpen
          beta_min = beta;
          beta = std::isinf(beta_max) ? beta * 2.0 : (beta + beta_max) / 2.0;
        } else {
          beta_max = beta;
          beta = std::isinf(beta_min) ? beta / 2.0 : (beta + beta_min) / 2.0;
        }
      }
      p.row(i) /= sum_p;
    }
  });
  return p;
}

MatrixXd pairwise_affinities_from_sq_dists(const MatrixXd& sq_dists,
                                           double perplexity) {
  const MatrixXd cond = conditional_affinities(sq_dists, perplexity);
  const double n = static_cast<double>(sq_dists.rows());
  return (cond + cond.transpose()) / (2.0 * n);
}

MatrixXd pairwise_affinities(const MatrixXd& x, double perplexity) {
  return pairwise_affinities_from_sq_dists(squared_distances(x), perplexity);
}

namespace {

double kl_divergence(const MatrixXd& p, const MatrixXd& y) {
  const Eigen::Index n = y.rows();
  double sum_w = 0;
  MatrixXd w(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w(i, i) = 0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double wij = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
      w(i, j) = wij;
      w(j, i) = wij;
      sum_w += 2.0 * wij;
    }
  }
  double kl = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || p(i, j) <= 0) continue;
      kl += p(i, j) * std::log(p(i, j) / (w(i, j) / sum_w));
    }
  }
  return kl;
}

}  // namespace

TsneResult tsne_from_sq_dists(const MatrixXd& sq_dists, const TsneConfig& cfg) {
  const Eigen::Index n = sq_dists.rows();
  cfg.validate(n);
  const MatrixXd p = pairwise_affinities_from_sq_dists(sq_dists, cfg.perplexity);

  Rng rng(cfg.seed);
  MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d < 2; ++d) y(i, d) = rng.gaussian() * 1e-4;
  }
  MatrixXd velocity = MatrixXd::Zero(n, 2);
  MatrixXd gains = MatrixXd::Ones(n, 2);
  MatrixXd grad(n, 2);
  MatrixXd w(n, n);

  TsneResult res;
  double p_scale = cfg.early_exaggeration;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    if (iter == cfg.exaggeration_iters) {
      p_scale = 1.0;
      res.kl_after_exaggeration = kl_divergence(p, y);
    }

    // row-parallel; sum_w reduced in fixed row order so the result does not
    // depend on the worker count
    VectorXd row_w = VectorXd::Zero(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
      for (auto i = static_cast<Eigen::Index>(begin);
           i < static_cast<Eigen::Index>(end); ++i) {
        double acc = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
          const double wij =
              i == j ? 0.0 : 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
          w(i, j) = wij;
          acc += wij;
        }
        row_w[i] = acc;
      }
    });
    const double sum_w = row_w.sum();

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
      for (auto i = static_cast<Eigen::Index>(begin);
           i < static_cast<Eigen::Index>(end); ++i) {
        grad.row(i).setZero();
        for (Eigen::Index j = 0; j < n; ++j) {
          if (i == j) continue;
          const double mult = (p_scale * p(i, j) - w(i, j) / sum_w) * w(i, j);
          grad.row(i) += 4.0 * mult * (y.row(i) - y.row(j));
        }
      }
    });

    const double momentum = iter < cfg.exaggeration_iters ? 0.5 : 0.8;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int d = 0; d < 2; ++d) {
        const bool same_dir = (grad(i, d) > 0) == (velocity(i, d) > 0);
        gains(i, d) = std::max(0.01, same_dir ? gains(i, d) * 0.8 : gains(i, d) + 0.2);
        velocity(i, d) = momentum * velocity(i, d) -
                         cfg.learning_rate * gains(i, d) * grad(i, d);
        y(i, d) += velocity(i, d);
      }
    }
    y.rowwise() -= y.colwise().mean();
    if (!y.allFinite()) {
      throw NumericError("t-SNE diverged to non-finite values at iteration " +
                         std::to_string(iter));
    }
  }
  y.rowwise() -= y.colwise().mean();
  res.kl_final = kl_divergence(p, y);
  if (cfg.iterations <= cfg.exaggeration_iters) {
    res.kl_after_exaggeration = res.kl_final;
  }
  res.y = std::move(y);
  return res;
}

TsneResult tsne(const MatrixXd& x, const TsneConfig& cfg) {
  return tsne_from_sq_dists(squared_distances(x), cfg);
}

std::vector<Index> stratified_subsample(const std::vector<int>& labels,
                                        std::int64_t max_points,
                                        std::uint64_t seed) {
  const auto n = static_cast<std::int64_t>(labels.size());
  std::vector<Index> out;
  if (n <= max_points) {
    out.resize(static_cast<std::size_t>(n));
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  int n_classes = 0;
  for (int c : labels) n_classes = std::max(n_classes, c + 1);
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
  }

  // proportional quotas, largest remainder; remainder ties to lower class
  std::vector<std::int64_t> quota(members.size());
  std::vector<std::pair<double, std::size_t>> remainder;
  std::int64_t assigned = 0;
  for (std::size_t c = 0; c < members.size(); ++c) {
    const double exact = static_cast<double>(max_points) *
                         static_cast<double>(members[c].size()) /
                         static_cast<double>(n);
    quota[c] = static_cast<std::int64_t>(std::floor(exact));
    assigned += quota[c];
    remainder.push_back({-(exact - std::floor(exact)), c});
  }
  std::sort(remainder.begin(), remainder.end());
  for (std::size_t r = 0; assigned < max_points && r < remainder.size(); ++r) {
    const std::size_t c = remainder[r].second;
    if (quota[c] < static_cast<std::int64_t>(members[c].size())) {
      ++quota[c];
      ++assigned;
    }
  }

  Rng rng(seed);
  for (std::size_t c = 0; c < members.size(); ++c) {
    rng.shuffle(members[c]);
    for (std::int64_t i = 0; i < quota[c]; ++i) {
      out.push_back(members[c][static_cast<std::size_t>(i)]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* kPalette[8] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                           "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

void write_scatter_svg(const MatrixXd& y, const std::vector<std::string>& labels,
                       const std::string& path, const std::string& metadata) {
  if (static_cast<std::size_t>(y.rows()) != labels.size()) {
    throw DataError("write_scatter_svg: labels size must match rows");
  }
  if (!y.allFinite()) throw DataError("write_scatter_svg: coordinates must be finite");

  std::map<std::string, int> class_index;
  for (const auto& l : labels) class_index.emplace(l, 0);
  int next = 0;
  for (auto& [label, idx] : class_index) idx = next++;

  const double width = 800, height = 600;
  double xmin = y.col(0).minCoeff(), xmax = y.col(0).maxCoeff();
  double ymin = y.col(1).minCoeff(), ymax = y.col(1).maxCoeff();
  double xpad = 0.05 * (xmax - xmin);
  double ypad = 0.05 * (ymax - ymin);
  if (xpad <= 0) xpad = 1.0;
  if (ypad <= 0) ypad = 1.0;
  xmin -= xpad; xmax += xpad;
  ymin -= ypad; ymax += ypad;

  auto sx = [&](double v) { return (v - xmin) / (xmax - xmin) * width; };
  auto sy = [&](double v) { return height - (v - ymin) / (ymax - ymin) * height; };

  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  char buf[160];
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!metadata.empty()) out << "<!-- " << xml_escape(metadata) << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n"
      << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const int ci = class_index[labels[static_cast<std::size_t>(i)]];
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\" "
                  "fill-opacity=\"0.75\"/>\n",
                  sx(y(i, 0)), sy(y(i, 1)), kPalette[ci % 8]);
    out << buf;
  }
  // legend, top-right
  double ly = 20;
  for (const auto& [label, idx] : class_index) {
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"690\" y=\"%.0f\" width=\"12\" height=\"12\" fill=\"%s\"/>\n",
                  ly, kPalette[idx % 8]);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"708\" y=\"%.0f\" font-family=\"sans-serif\" "
                  "font-size=\"12\">%s</text>\n",
                  ly + 10, xml_escape(label).c_str());
    out << buf;
    ly += 18;
  }
  out << "</svg>\n";
  if (!out) throw DataError("write failed: " + path);
}

void write_projection_csv(const std::vector<std::string>& ids, const MatrixXd& y,
                          const std::vector<std::string>& labels,
                          const std::string& path) {
  if (ids.size() != static_cast<std::size_t>(y.rows()) || ids.size() != labels.size()) {
    throw DataError("write_projection_csv: length mismatch");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << "id,x,y,label\n";
  char buf[64];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", y(row, 0), y(row, 1));
    out << ids[i] << ',' << buf << ',' << labels[i] << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace tcrsc
