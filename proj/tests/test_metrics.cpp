// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "radcount/metrics.hpp"
#include "radcount/rng.hpp"

using namespace radcount;
using namespace radcount::metrics;

namespace {

ConfusionMatrix4 from_rows(const std::array<std::array<long long, 4>, 4>& rows) {
  ConfusionMatrix4 cm;
  cm.c = rows;
  return cm;
}

// Published count matrices used as arithmetic fixtures.
const ConfusionMatrix4 kRuleA =
    from_rows({{{198, 41, 1, 0}, {1, 141, 71, 27}, {0, 121, 78, 41}, {0, 124, 64, 52}}});
const ConfusionMatrix4 kRuleB =
    from_rows({{{374, 26, 0, 0}, {42, 266, 75, 17}, {0, 283, 99, 18}, {2, 255, 95, 48}}});
const ConfusionMatrix4 kRfB =
    from_rows({{{400, 0, 0, 0}, {21, 226, 133, 20}, {0, 138, 188, 74}, {0, 45, 162, 193}}});
const ConfusionMatrix4 kCnnA =
    from_rows({{{239, 0, 1, 0}, {0, 233, 6, 1}, {0, 2, 237, 1}, {0, 1, 4, 235}}});
const ConfusionMatrix4 kSvmB =
    from_rows({{{400, 0, 0, 0}, {18, 228, 129, 25}, {0, 146, 183, 71}, {0, 37, 139, 224}}});

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion counting: perfect, single pair, random oracle") {
  const std::vector<int> labels = {0, 1, 2, 3, 2, 1};
  const ConfusionMatrix4 perfect = confusion(labels, labels);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(perfect.at(i, j) == (i == j ? (i == 1 || i == 2 ? 2 : 1) : 0));

  const ConfusionMatrix4 single = confusion(std::vector<int>{3}, std::vector<int>{2});
  CHECK(single.at(2, 3) == 1);
  CHECK(single.total() == 1);

  Rng rng(3);
  std::vector<int> preds(500), truth(500);
  long long direct[4][4] = {};
  for (int i = 0; i < 500; ++i) {
    preds[static_cast<std::size_t>(i)] = rng.range(0, 3);
    truth[static_cast<std::size_t>(i)] = rng.range(0, 3);
    ++direct[truth[static_cast<std::size_t>(i)]][preds[static_cast<std::size_t>(i)]];
  }
  const ConfusionMatrix4 cm = confusion(preds, truth);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(cm.at(i, j) == direct[i][j]);
}

TEST_CASE("accuracy reproduces the published fixtures") {
  CHECK(accuracy(kRuleA) == doctest::Approx(0.4885).epsilon(1.1e-4));
  CHECK(std::abs(accuracy(kRuleA) - 0.4885) <= 5e-5);
  CHECK(std::abs(accuracy(kCnnA) - 0.9833) <= 5e-5);
  CHECK(std::abs(accuracy(kSvmB) - 0.6469) <= 5e-5);
  CHECK(accuracy(kRuleA) == doctest::Approx(469.0 / 960.0).epsilon(1e-12));
  CHECK(accuracy(kCnnA) == doctest::Approx(944.0 / 960.0).epsilon(1e-12));
  CHECK(accuracy(kSvmB) == doctest::Approx(1035.0 / 1600.0).epsilon(1e-12));
}

TEST_CASE("mae and rmse") {
  const std::vector<double> same = {1.0, 2.0, 0.0};
  CHECK(mae(same, same) == 0.0);
  CHECK(rmse(same, same) == 0.0);

  CHECK(mae(std::vector<double>{1.0, -1.0}, std::vector<double>{0.0, 0.0}) == 1.0);
  CHECK(rmse(std::vector<double>{1.0, -1.0}, std::vector<double>{0.0, 0.0}) == 1.0);

  CHECK(mae(std::vector<double>{0.0, 2.0}, std::vector<double>{0.0, 0.0}) == 1.0);
  CHECK(rmse(std::vector<double>{0.0, 2.0}, std::vector<double>{0.0, 0.0}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("rmse >= mae on random prediction sets") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> preds(40), labels(40);
    for (int i = 0; i < 40; ++i) {
      preds[static_cast<std::size_t>(i)] = rng.uniform(-3.0, 3.0);
      labels[static_cast<std::size_t>(i)] = rng.range(0, 3);
    }
    CHECK(rmse(preds, labels) >= mae(preds, labels) - 1e-12);
  }
}

TEST_CASE("f1 family: perfect matrix, absent class, fixture arithmetic") {
  ConfusionMatrix4 perfect;
  for (int i = 0; i < 4; ++i) perfect.at(i, i) = 10;
  const F1Family all_one = f1_family(perfect);
  CHECK(all_one.f1_macro == 1.0);
  CHECK(all_one.f1_minority == 1.0);
  CHECK(all_one.recall_minority == 1.0);

  ConfusionMatrix4 missing;  // class 3 never predicted, never true
  for (int i = 0; i < 3; ++i) missing.at(i, i) = 5;
  const F1Family f = f1_family(missing);
  CHECK(f.precision[3] == 0.0);
  CHECK(f.recall[3] == 0.0);
  CHECK(f.f1[3] == 0.0);
  CHECK(f.f1_macro == doctest::Approx(0.75).epsilon(1e-12));

  // Independent arithmetic for the rule-based fixture: per-class P/R from
  // row/column sums computed right here.
  const F1Family fam = f1_family(kRuleA);
  for (int k = 0; k < 4; ++k) {
    long long col = 0, row = 0;
    for (int i = 0; i < 4; ++i) {
      col += kRuleA.at(i, k);
      row += kRuleA.at(k, i);
    }
    const double p = static_cast<double>(kRuleA.at(k, k)) / static_cast<double>(col);
    const double r = static_cast<double>(kRuleA.at(k, k)) / static_cast<double>(row);
    CHECK(fam.precision[static_cast<std::size_t>(k)] == doctest::Approx(p).epsilon(1e-12));
    CHECK(fam.recall[static_cast<std::size_t>(k)] == doctest::Approx(r).epsilon(1e-12));
    CHECK(fam.f1[static_cast<std::size_t>(k)] ==
          doctest::Approx(2.0 * p * r / (p + r)).epsilon(1e-12));
  }
}

TEST_CASE("binary collapse reproduces the published fixtures") {
  CHECK(binary_collapse(kRuleA) == doctest::Approx((198.0 + 719.0) / 960.0).epsilon(1e-12));
  CHECK(std::abs(binary_collapse(kRuleA) - 0.9552) <= 5e-5);
  CHECK(binary_collapse(kRuleB) == doctest::Approx((374.0 + 1156.0) / 1600.0).epsilon(1e-12));
  CHECK(std::abs(binary_collapse(kRuleB) - 0.9563) <= 5e-5 + 1e-12);
  CHECK(binary_collapse(kRfB) == doctest::Approx((400.0 + 1179.0) / 1600.0).epsilon(1e-12));
  CHECK(std::abs(binary_collapse(kRfB) - 0.9869) <= 5e-5);
}

TEST_CASE("binary collapse never falls below accuracy") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    ConfusionMatrix4 cm;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) cm.at(i, j) = rng.range(0, 30);
    if (cm.total() == 0) continue;
    CHECK(binary_collapse(cm) >= accuracy(cm));
  }
}

TEST_CASE("composite score: weights, linearity, monotonicity") {
  CHECK(CompositeWeights{}.sum() == doctest::Approx(1.0).epsilon(1e-15));

  EvalReport ones;
  ones.accuracy = ones.f1_macro = ones.f1_minority = ones.recall_minority = ones.r_nonzero = 1.0;
  CHECK(composite_score(ones) == doctest::Approx(1.0).epsilon(1e-15));

  EvalReport zeros;
  CHECK(composite_score(zeros) == 0.0);

  EvalReport halves;
  halves.accuracy = halves.f1_macro = halves.f1_minority = halves.recall_minority =
      halves.r_nonzero = 0.5;
  CHECK(composite_score(halves) == doctest::Approx(0.5).epsilon(1e-15));

  // Raising any single component raises the score.
  for (int which = 0; which < 5; ++which) {
    EvalReport lo = halves, hi = halves;
    double* fields_lo[5] = {&lo.accuracy, &lo.f1_macro, &lo.f1_minority, &lo.recall_minority,
                            &lo.r_nonzero};
    double* fields_hi[5] = {&hi.accuracy, &hi.f1_macro, &hi.f1_minority, &hi.recall_minority,
                            &hi.r_nonzero};
    *fields_lo[which] = 0.2;
    *fields_hi[which] = 0.8;
    CHECK(composite_score(hi) > composite_score(lo));
  }
}

TEST_CASE("evaluate wires continuous errors and rate metrics together") {
  const std::vector<double> preds = {0.1, 1.2, 2.0, 2.6};
  const std::vector<int> classes = {0, 1, 2, 3};
  const std::vector<int> labels = {0, 1, 2, 3};
  const EvalReport rep = evaluate(preds, classes, labels);
  CHECK(rep.accuracy == 1.0);
  CHECK(rep.mae == doctest::Approx((0.1 + 0.2 + 0.0 + 0.4) / 4.0).epsilon(1e-12));
  CHECK(rep.r_nonzero == 1.0);
  CHECK(rep.composite == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.rmse >= rep.mae);
}

}  // TEST_SUITE
