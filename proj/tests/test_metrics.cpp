#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "tcrsc/errors.hpp"
#include "tcrsc/metrics.hpp"
#include "tcrsc/rng.hpp"

using namespace tcrsc;
using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;

TEST_CASE("confusion_matrix counts true/predicted pairs") {
  const auto m = confusion_matrix({0, 0, 1, 1}, {0, 0, 0, 1}, 2);
  MatrixXi expected(2, 2);
  expected << 2, 0, 1, 1;
  CHECK(m == expected);

  const auto perfect = confusion_matrix({0, 1, 2, 1}, {0, 1, 2, 1}, 3);
  CHECK(perfect.diagonal().sum() == 4);
  CHECK(perfect.sum() == 4);

  CHECK_THROWS_AS(confusion_matrix({}, {}, 2), DataError);
  CHECK_THROWS_AS(confusion_matrix({0, 2}, {0, 0}, 2), DataError);
  CHECK_THROWS_AS(confusion_matrix({0, 1}, {0}, 2), DataError);
}

TEST_CASE("classification_metrics on the hand-computed example") {
  MatrixXi m(2, 2);
  m << 2, 0, 1, 1;
  const auto r = classification_metrics(m);
  CHECK(r.accuracy == doctest::Approx(0.75));
  // class 0: P=2/3 R=1 F1=0.8; class 1: P=1 R=0.5 F1=2/3
  CHECK(r.f1_macro == doctest::Approx((0.8 + 2.0 / 3) / 2).epsilon(1e-4));
  CHECK(r.f1_weighted == doctest::Approx((2 * 0.8 + 2 * 2.0 / 3) / 4).epsilon(1e-4));
  CHECK(r.precision_weighted == doctest::Approx((2 * 2.0 / 3 + 2 * 1.0) / 4));
  CHECK(r.recall_weighted == doctest::Approx(0.75));
}

TEST_CASE("identity predictions give all-ones metrics") {
  MatrixXi m = MatrixXi::Zero(3, 3);
  m(0, 0) = 5;
  m(1, 1) = 2;
  m(2, 2) = 9;
  const auto r = classification_metrics(m);
  CHECK(r.accuracy == 1.0);
  CHECK(r.precision_weighted == 1.0);
  CHECK(r.recall_weighted == 1.0);
  CHECK(r.f1_weighted == 1.0);
  CHECK(r.f1_macro == 1.0);
}

TEST_CASE("a never-predicted class contributes zero precision") {
  MatrixXi m(2, 2);
  m << 3, 0, 2, 0;  // class 1 never predicted
  const auto r = classification_metrics(m);
  CHECK(r.accuracy == doctest::Approx(0.6));
  CHECK(std::isfinite(r.precision_weighted));
  CHECK(std::isfinite(r.f1_macro));
  CHECK_THROWS_AS(classification_metrics(MatrixXi::Zero(2, 2)), DataError);
}

TEST_CASE("accuracy equals weighted recall on random matrices") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int c = 2 + static_cast<int>(rng.uniform_index(4));
    MatrixXi m(c, c);
    bool nonzero = false;
    for (int i = 0; i < c; ++i) {
      for (int j = 0; j < c; ++j) {
        m(i, j) = static_cast<int>(rng.uniform_index(9));
        nonzero |= m(i, j) > 0;
      }
    }
    if (!nonzero) m(0, 0) = 1;
    // a class with zero support keeps recall 0/0 = 0 out of the weighted sum
    const auto r = classification_metrics(m);
    CHECK(std::abs(r.accuracy - r.recall_weighted) <= 1e-12);
  }
}

TEST_CASE("weighted metrics are invariant under class relabeling") {
  Rng rng(15);
  MatrixXi m(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = 1 + static_cast<int>(rng.uniform_index(8));
  }
  const auto base = classification_metrics(m);
  const int perm[3] = {2, 0, 1};
  MatrixXi pm(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) pm(perm[i], perm[j]) = m(i, j);
  }
  const auto permuted = classification_metrics(pm);
  CHECK(base.accuracy == doctest::Approx(permuted.accuracy).epsilon(1e-12));
  CHECK(base.f1_weighted == doctest::Approx(permuted.f1_weighted).epsilon(1e-12));
  CHECK(base.f1_macro == doctest::Approx(permuted.f1_macro).epsilon(1e-12));
  CHECK(base.precision_weighted ==
        doctest::Approx(permuted.precision_weighted).epsilon(1e-12));
}

TEST_CASE("binary_auc handles the hand case and the extremes") {
  VectorXd perfect(4);
  perfect << 0.1, 0.2, 0.8, 0.9;
  CHECK(binary_auc({0, 0, 1, 1}, perfect) == 1.0);

  VectorXd flat = VectorXd::Constant(6, 0.5);
  CHECK(binary_auc({0, 1, 0, 1, 0, 1}, flat) == 0.5);

  VectorXd hand(4);
  hand << 0.1, 0.4, 0.35, 0.8;
  const std::vector<int> y = {0, 0, 1, 1};
  CHECK(binary_auc(y, hand) == doctest::Approx(oracle::pair_count_auc(y, hand)));
  CHECK(binary_auc(y, hand) == doctest::Approx(0.75));
}

TEST_CASE("rank-based AUC equals exhaustive pair counting") {
  Rng rng(27);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + static_cast<int>(rng.uniform_index(47));
    std::vector<int> y(static_cast<std::size_t>(n));
    VectorXd scores(n);
    int pos = 0;
    for (int i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(2));
      pos += y[static_cast<std::size_t>(i)];
      // quantized scores force plenty of ties
      scores[i] = std::round(rng.uniform() * 8) / 8.0;
    }
    if (pos == 0) y[0] = 1;
    if (pos == n) y[0] = 0;
    CHECK(binary_auc(y, scores) ==
          doctest::Approx(oracle::pair_count_auc(y, scores)).epsilon(1e-12));
  }
}

TEST_CASE("roc_auc_ovr averages one-vs-rest AUCs") {
  MatrixXd scores(4, 2);
  scores << 0.9, 0.1, 0.8, 0.2, 0.2, 0.8, 0.1, 0.9;
  const auto auc = roc_auc_ovr({0, 0, 1, 1}, scores);
  CHECK(auc.weighted == 1.0);
  CHECK(auc.macro == 1.0);

  CHECK_THROWS_AS(roc_auc_ovr({0, 0, 0, 0}, scores), DataError);  // class 1 absent
}

TEST_CASE("average_runs concatenates and means per-metric") {
  EvalReport a;
  a.per_classifier["knn"].push_back({.accuracy = 0.9});
  EvalReport b;
  b.per_classifier["knn"].push_back({.accuracy = 1.0});
  const auto avg = average_runs({a, b});
  CHECK(avg.n_runs() == 2);
  CHECK(avg.mean().at("knn").accuracy == doctest::Approx(0.95));

  const auto solo = average_runs({a});
  CHECK(solo.mean().at("knn").accuracy == doctest::Approx(0.9));

  const auto same = average_runs({a, a});
  CHECK(same.mean().at("knn").accuracy == doctest::Approx(0.9));

  EvalReport c;
  c.per_classifier["dt"].push_back({.accuracy = 0.5});
  CHECK_THROWS_AS(average_runs({a, c}), DataError);
  CHECK_THROWS_AS(average_runs({}), DataError);
}
