#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "oracles.hpp"
#include "tcrsc/classify.hpp"
#include "tcrsc/errors.hpp"
#include "tcrsc/rng.hpp"

using namespace tcrsc;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

namespace {

void check_rows_sum_to_one(const MatrixXd& proba) {
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    CHECK(std::abs(proba.row(i).sum() - 1.0) <= 1e-9);
    CHECK(proba.row(i).minCoeff() >= 0.0);
  }
}

}  // namespace

TEST_CASE("stratified_split allocates per class with largest remainder") {
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(0);
  for (int i = 0; i < 10; ++i) labels.push_back(1);
  const auto plan = stratified_split(labels, 0.3, 0.1, 0);

  auto count_class = [&](const std::vector<Index>& idx, int c) {
    return std::count_if(idx.begin(), idx.end(),
                         [&](Index i) { return labels[static_cast<std::size_t>(i)] == c; });
  };
  CHECK(count_class(plan.test_idx, 0) == 3);
  CHECK(count_class(plan.test_idx, 1) == 3);
  CHECK(count_class(plan.val_idx, 0) == 1);  // 10% of the 7-strong pool, rounded
  CHECK(count_class(plan.val_idx, 1) == 1);
  CHECK(count_class(plan.train_idx, 0) == 6);
  CHECK(count_class(plan.train_idx, 1) == 6);
}

TEST_CASE("stratified_split partitions exactly and deterministically") {
  Rng rng(17);
  std::vector<int> labels;
  for (int i = 0; i < 57; ++i) labels.push_back(static_cast<int>(rng.uniform_index(3)));
  for (int c = 0; c < 3; ++c) {  // guarantee 3+ members
    labels.push_back(c);
    labels.push_back(c);
    labels.push_back(c);
  }
  const auto plan = stratified_split(labels, 0.3, 0.1, 12);
  const auto again = stratified_split(labels, 0.3, 0.1, 12);
  CHECK(plan.train_idx == again.train_idx);
  CHECK(plan.val_idx == again.val_idx);
  CHECK(plan.test_idx == again.test_idx);

  std::set<Index> all;
  all.insert(plan.train_idx.begin(), plan.train_idx.end());
  all.insert(plan.val_idx.begin(), plan.val_idx.end());
  all.insert(plan.test_idx.begin(), plan.test_idx.end());
  CHECK(all.size() == labels.size());
  CHECK(plan.train_idx.size() + plan.val_idx.size() + plan.test_idx.size() ==
        labels.size());
}

TEST_CASE("stratified_split input contracts") {
  CHECK_THROWS_AS(stratified_split({0, 0, 0, 0}, 0.3, 0.1, 0), DataError);  // one class
  CHECK_THROWS_AS(stratified_split({0, 0, 1, 1, 1}, 0.3, 0.1, 0), DataError);  // <3 members
  std::vector<int> ok = {0, 0, 0, 1, 1, 1};
  CHECK_THROWS_AS(stratified_split(ok, 0.0, 0.1, 0), DataError);
  CHECK_THROWS_AS(stratified_split(ok, 0.3, 1.0, 0), DataError);
  CHECK_NOTHROW(stratified_split(ok, 0.3, 0.1, 0));
}

TEST_CASE("knn votes among the k nearest") {
  MatrixXd x(4, 1);
  x << 0, 1, 2, 10;
  const std::vector<int> y = {0, 0, 1, 1};

  KnnClassifier k1(1);
  k1.fit(x, y, 2);
  MatrixXd q(1, 1);
  q << 2;
  CHECK(k1.predict_proba(q)(0, 1) == 1.0);  // exact training point

  KnnClassifier k3(3);
  k3.fit(x, y, 2);
  q << 0.9;
  const auto proba = k3.predict_proba(q);  // neighbors {0,1,2}: classes 0,0,1
  CHECK(proba(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(proba(0, 1) == doctest::Approx(1.0 / 3));
  check_rows_sum_to_one(proba);
}

TEST_CASE("knn splits symmetric equidistant votes") {
  MatrixXd x(2, 1);
  x << -1, 1;
  KnnClassifier k2(2);
  k2.fit(x, {0, 1}, 2);
  MatrixXd q(1, 1);
  q << 0;
  const auto proba = k2.predict_proba(q);
  CHECK(proba(0, 0) == 0.5);
  CHECK(proba(0, 1) == 0.5);
}

TEST_CASE("knn breaks distance ties by lower training index") {
  MatrixXd x(3, 1);
  x << 5, 5, 5;  // all identical
  KnnClassifier k1(1);
  k1.fit(x, {2, 1, 0}, 3);
  MatrixXd q(1, 1);
  q << 5;
  CHECK(k1.predict(q)[0] == 2);  // index 0 wins the tie, its class is 2
}

TEST_CASE("knn validates dimensions and k") {
  MatrixXd x(2, 3);
  x.setZero();
  KnnClassifier k5(5);
  CHECK_THROWS_AS(k5.fit(x, {0, 1}, 2), DataError);  // k > rows
  KnnClassifier k1(1);
  k1.fit(x, {0, 1}, 2);
  MatrixXd q(1, 2);
  q.setZero();
  CHECK_THROWS_AS(k1.predict_proba(q), DataError);
}

TEST_CASE("knn k=1 reproduces training labels") {
  Rng rng(5);
  MatrixXd x(20, 3);
  std::vector<int> y(20);
  for (Eigen::Index i = 0; i < 20; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.gaussian();
    y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(3));
  }
  KnnClassifier k1(1);
  k1.fit(x, y, 3);
  CHECK(k1.predict(x) == y);
}

TEST_CASE("gaussian nb posterior matches the closed form") {
  // class A = {0, 2} (mean 1, var 1), class B = {8, 12} (mean 10, var 4);
  // at x=4 the density ratio is exp(-4.5) / (0.5 * exp(-4.5)) = 2
  MatrixXd x(4, 1);
  x << 0, 2, 8, 12;
  GaussianNbClassifier nb;
  nb.fit(x, {0, 0, 1, 1}, 2);
  MatrixXd q(1, 1);
  q << 4;
  const auto proba = nb.predict_proba(q);
  CHECK(proba(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-9));
  CHECK(proba(0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-9));

  // against a hand-evaluated density computation
  auto log_density = [](double v, double mean, double var) {
    return -0.5 * std::log(2 * std::numbers::pi * var) -
           (v - mean) * (v - mean) / (2 * var);
  };
  const double la = std::log(0.5) + log_density(4, 1, 1);
  const double lb = std::log(0.5) + log_density(4, 10, 4);
  CHECK(proba(0, 0) ==
        doctest::Approx(std::exp(la) / (std::exp(la) + std::exp(lb))).epsilon(1e-12));
}

TEST_CASE("gaussian nb symmetry and separation") {
  MatrixXd x(6, 1);
  x << 0, 1, 2, 0, 1, 2;  // identical distributions
  GaussianNbClassifier nb;
  nb.fit(x, {0, 0, 0, 1, 1, 1}, 2);
  MatrixXd q(1, 1);
  q << 1.3;
  const auto proba = nb.predict_proba(q);
  CHECK(proba(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  MatrixXd far(4, 1);
  far << -0.5, 0.5, 9.5, 10.5;
  GaussianNbClassifier nb2;
  nb2.fit(far, {0, 0, 1, 1}, 2);
  q << 0;
  CHECK(nb2.predict(q)[0] == 0);
}

TEST_CASE("lr separable data reaches training accuracy 1") {
  MatrixXd x(6, 1);
  x << -3, -2, -1, 1, 2, 3;
  const std::vector<int> y = {0, 0, 0, 1, 1, 1};
  LogisticRegressionClassifier lr;
  lr.fit(x, y, 2);
  CHECK(lr.predict(x) == y);
  check_rows_sum_to_one(lr.predict_proba(x));
}

TEST_CASE("softmax of zero logits is uniform") {
  const MatrixXd p = softmax_rows(MatrixXd::Zero(3, 4));
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index c = 0; c < 4; ++c) CHECK(p(i, c) == doctest::Approx(0.25));
  }
}

TEST_CASE("lr analytic gradient matches central finite differences") {
  Rng rng(23);
  const Eigen::Index n = 5, d = 4;
  const int n_classes = 3;
  MatrixXd x(n, d);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.gaussian();
    y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(n_classes));
  }
  MatrixXd w(d, n_classes);
  RowVectorXd b(n_classes);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (int c = 0; c < n_classes; ++c) w(j, c) = rng.gaussian() * 0.5;
  }
  for (int c = 0; c < n_classes; ++c) b[c] = rng.gaussian() * 0.5;

  MatrixXd gw;
  RowVectorXd gb;
  lr_gradient(w, b, x, y, 1e-3, gw, gb);

  const double h = 1e-5;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (int c = 0; c < n_classes; ++c) {
      MatrixXd wp = w, wm = w;
      wp(j, c) += h;
      wm(j, c) -= h;
      const double fd =
          (lr_objective(wp, b, x, y, 1e-3) - lr_objective(wm, b, x, y, 1e-3)) / (2 * h);
      CHECK(std::abs(gw(j, c) - fd) / std::max(1.0, std::abs(fd)) < 1e-4);
    }
  }
  for (int c = 0; c < n_classes; ++c) {
    RowVectorXd bp = b, bm = b;
    bp[c] += h;
    bm[c] -= h;
    const double fd =
        (lr_objective(w, bp, x, y, 1e-3) - lr_objective(w, bm, x, y, 1e-3)) / (2 * h);
    CHECK(std::abs(gb[c] - fd) / std::max(1.0, std::abs(fd)) < 1e-4);
  }
}

TEST_CASE("lr objective is non-increasing per accepted step") {
  Rng rng(41);
  MatrixXd x(30, 4);
  std::vector<int> y(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = rng.gaussian();
    y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(3));
  }
  LogisticRegressionClassifier lr;
  lr.fit(x, y, 3);
  const auto& trace = lr.objective_trace();
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);

  MatrixXd bad(2, 1);
  bad << 1, std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(LogisticRegressionClassifier().fit(bad, {0, 1}, 2), NumericError);
}

TEST_CASE("decision tree on pure data is a single leaf") {
  MatrixXd x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  DecisionTreeClassifier dt;
  dt.fit(x, {1, 1, 1}, 2);
  CHECK(dt.nodes().size() == 1);
  CHECK(dt.predict_proba(x)(0, 1) == 1.0);
  CHECK(dt.depth() == 0);
}

TEST_CASE("decision tree solves XOR with depth 2") {
  MatrixXd x(4, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  const std::vector<int> y = {0, 1, 1, 0};
  DecisionTreeClassifier dt;
  dt.fit(x, y, 2);
  CHECK(dt.predict(x) == y);
  CHECK(dt.depth() == 2);
}

TEST_CASE("decision tree first split matches the exhaustive Gini oracle") {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 12 + static_cast<int>(rng.uniform_index(20));
    MatrixXd x(n, 1);
    std::vector<int> y(static_cast<std::size_t>(n));
    std::vector<double> xv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      xv[static_cast<std::size_t>(i)] = std::round(rng.gaussian() * 5) / 2.0;
      x(i, 0) = xv[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(3));
    }
    const auto expected = oracle::brute_force_best_split_1d(xv, y, 3, 1);
    DecisionTreeClassifier dt(1, 1);  // depth 1: only the root split
    dt.fit(x, y, 3);
    if (!expected.found) {
      CHECK(dt.nodes().size() == 1);
      continue;
    }
    const bool root_is_pure = dt.nodes()[0].feature < 0;
    if (root_is_pure) continue;  // pure node never splits
    CHECK(dt.nodes()[0].threshold == expected.threshold);
  }
}

TEST_CASE("decision tree honors depth and leaf-size limits") {
  Rng rng(19);
  MatrixXd x(64, 3);
  std::vector<int> y(64);
  for (Eigen::Index i = 0; i < 64; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.gaussian();
    y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(4));
  }
  DecisionTreeClassifier dt(3, 5);
  dt.fit(x, y, 4);
  CHECK(dt.depth() <= 3);
  for (const auto& node : dt.nodes()) {
    if (node.feature < 0) CHECK(node.n >= 5);
  }
  check_rows_sum_to_one(dt.predict_proba(x));
}

TEST_CASE("split ties prefer the lower feature index") {
  MatrixXd x(4, 2);
  x << 0, 0, 0, 0, 1, 1, 1, 1;  // identical columns
  DecisionTreeClassifier dt;
  dt.fit(x, {0, 0, 1, 1}, 2);
  CHECK(dt.nodes()[0].feature == 0);
}

TEST_CASE("all classifiers emit probability rows summing to one") {
  Rng rng(83);
  MatrixXd x(40, 5);
  std::vector<int> y(40);
  for (Eigen::Index i = 0; i < 40; ++i) {
    for (int j = 0; j < 5; ++j) x(i, j) = rng.gaussian();
    y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(3));
    x(i, y[static_cast<std::size_t>(i)]) += 1.0;
  }
  for (const auto* kind : {"knn", "nb", "lr", "dt"}) {
    auto clf = make_classifier(kind, 3);
    clf->fit(x, y, 3);
    check_rows_sum_to_one(clf->predict_proba(x));
  }
  CHECK_THROWS_AS(make_classifier("svm"), DataError);
}

TEST_CASE("classifier JSON round-trips preserve predictions") {
  Rng rng(29);
  MatrixXd x(30, 4);
  std::vector<int> y(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = rng.gaussian();
    y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(3));
    x(i, y[static_cast<std::size_t>(i)]) += 2.0;
  }
  MatrixXd q(5, 4);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (int j = 0; j < 4; ++j) q(i, j) = rng.gaussian();
  }
  for (const auto* kind : {"knn", "nb", "lr", "dt"}) {
    auto clf = make_classifier(kind, 3);
    clf->fit(x, y, 3);
    const auto loaded = classifier_from_json(clf->to_json());
    CHECK(loaded->kind() == clf->kind());
    CHECK(loaded->predict_proba(q) == clf->predict_proba(q));
  }
}
