#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "n2hp/metrics.hpp"

using namespace n2hp;

namespace {

double auc_oracle(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

// Each positive scores the precision among everything ranked at or above
// it; positives are visited from the highest score down.
double ap_oracle(std::vector<double> pos, const std::vector<double>& neg) {
  std::sort(pos.rbegin(), pos.rend());
  double sum = 0;
  for (double p : pos) {
    double above = 0, hits = 0;
    for (double q : pos) {
      if (q >= p) ++hits;
    }
    above = hits;
    for (double n : neg) {
      if (n >= p) ++above;
    }
    sum += hits / above;
  }
  return sum / static_cast<double>(pos.size());
}

std::vector<double> draw(std::mt19937_64& gen, std::size_t n, int levels) {
  std::vector<double> out(n);
  for (double& x : out) x = static_cast<double>(gen() % levels) / levels;
  return out;
}

}  // namespace

TEST(RocAuc, WorkedExamples) {
  EXPECT_EQ(roc_auc(std::vector{0.9, 0.8}, std::vector{0.1, 0.2}), 1.0);
  EXPECT_EQ(roc_auc(std::vector{0.5}, std::vector{0.5}), 0.5);
  EXPECT_EQ(roc_auc(std::vector{0.8, 0.4}, std::vector{0.6, 0.2}), 0.75);
}

TEST(RocAuc, EmptySideIsAnError) {
  EXPECT_THROW(roc_auc(std::vector<double>{}, std::vector{0.1}), InputError);
  EXPECT_THROW(roc_auc(std::vector{0.1}, std::vector<double>{}), InputError);
  EXPECT_THROW(roc_auc(std::vector<double>{NAN}, std::vector{0.1}), InputError);
}

TEST(RocAuc, MatchesBruteForceExactly) {
  std::mt19937_64 gen(1);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto pos = draw(gen, 1 + gen() % 50, 1 + rep % 20);
    const auto neg = draw(gen, 1 + gen() % 50, 1 + rep % 20);
    ASSERT_EQ(roc_auc(pos, neg), auc_oracle(pos, neg)) << "set " << rep;
    ASSERT_EQ(roc_auc(pos, neg) + roc_auc(neg, pos), 1.0) << "set " << rep;
  }
}

TEST(AveragePrecision, WorkedExamples) {
  EXPECT_EQ(average_precision(std::vector{0.9, 0.8}, std::vector{0.1, 0.2}), 1.0);
  EXPECT_EQ(average_precision(std::vector{0.9, 0.7}, std::vector{0.8}),
            (1.0 + 2.0 / 3.0) / 2.0);
  EXPECT_NEAR(average_precision(std::vector{0.9, 0.7}, std::vector{0.8}),
              0.8333333333, 1e-10);
  for (std::size_t k = 1; k < 10; ++k) {
    std::vector<double> neg(k);
    for (std::size_t i = 0; i < k; ++i) neg[i] = 1.0 + static_cast<double>(i);
    EXPECT_EQ(average_precision(std::vector{0.0}, neg),
              1.0 / static_cast<double>(k + 1));
  }
}

TEST(AveragePrecision, TiesDoNotDependOnInputOrder) {
  // A positive tied with a negative is credited precision 1/2 either way.
  EXPECT_EQ(average_precision(std::vector{0.5}, std::vector{0.5}), 0.5);
  EXPECT_EQ(average_precision(std::vector{0.5, 0.5}, std::vector{0.5, 0.5}), 0.5);
}

TEST(AveragePrecision, MatchesBruteForceExactly) {
  std::mt19937_64 gen(2);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto pos = draw(gen, 1 + gen() % 50, 1 + rep % 20);
    const auto neg = draw(gen, gen() % 50, 1 + rep % 20);
    ASSERT_EQ(average_precision(pos, neg), ap_oracle(pos, neg)) << "set " << rep;
  }
}

TEST(AveragePrecision, InterpolatedDominatesStep) {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 200; ++rep) {
    const auto pos = draw(gen, 1 + gen() % 30, 10);
    const auto neg = draw(gen, 1 + gen() % 30, 10);
    EXPECT_GE(average_precision(pos, neg, ApVariant::Interpolated),
              average_precision(pos, neg, ApVariant::Step));
  }
  // pos 0.9, 0.7 around neg 0.8: the second positive's precision is 2/3
  // either way, since nothing later improves on it.
  EXPECT_EQ(average_precision(std::vector{0.9, 0.7}, std::vector{0.8},
                              ApVariant::Interpolated),
            (1.0 + 2.0 / 3.0) / 2.0);
}

TEST(AveragePrecision, NoPositivesIsAnError) {
  EXPECT_THROW(average_precision(std::vector<double>{}, std::vector{0.1}),
               InputError);
}

TEST(Metrics, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 gen(4);
  const auto transforms = {
      +[](double x) { return std::exp(3 * x); },
      +[](double x) { return 7 * x * x * x + x - 4; },
      +[](double x) { return std::atan(x) + 10; },
  };
  for (int rep = 0; rep < 200; ++rep) {
    const auto pos = draw(gen, 1 + gen() % 40, 25);
    const auto neg = draw(gen, 1 + gen() % 40, 25);
    for (auto f : transforms) {
      std::vector<double> tp, tn;
      for (double x : pos) tp.push_back(f(x));
      for (double x : neg) tn.push_back(f(x));
      ASSERT_EQ(roc_auc(tp, tn), roc_auc(pos, neg));
      ASSERT_EQ(average_precision(tp, tn), average_precision(pos, neg));
    }
  }
}

TEST(BestF1, SeparatedScores) {
  const std::vector<double> s = {0.1, 0.9, 0.2, 0.7, 0.8};
  const std::vector<int> l = {0, 1, 0, 1, 1};
  const auto best = best_f1_threshold(s, l);
  EXPECT_EQ(best.f1, 1.0);
  EXPECT_EQ(best.threshold, 0.7);
}

TEST(BestF1, AllEqualHalfPositive) {
  const std::vector<double> s(6, 0.3);
  const std::vector<int> l = {1, 0, 1, 0, 1, 0};
  const auto best = best_f1_threshold(s, l);
  EXPECT_DOUBLE_EQ(best.f1, 2.0 / 3.0);
  EXPECT_EQ(best.threshold, 0.3);
}

TEST(BestF1, AllPositive) {
  const std::vector<double> s = {0.4, 0.2, 0.9};
  const std::vector<int> l = {1, 1, 1};
  const auto best = best_f1_threshold(s, l);
  EXPECT_EQ(best.f1, 1.0);
  EXPECT_EQ(best.threshold, 0.2);
}

TEST(BestF1, NoPositivesIsAnError) {
  EXPECT_THROW(best_f1_threshold(std::vector{0.1}, std::vector{0}), InputError);
}

TEST(BestF1, AgreesWithConfusionAndExhaustiveSweep) {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + gen() % 40;
    const auto s = draw(gen, n, 12);
    std::vector<int> l(n);
    for (int& x : l) x = static_cast<int>(gen() % 2);
    l[gen() % n] = 1;
    const auto best = best_f1_threshold(s, l);
    EXPECT_EQ(confusion_at(s, l, best.threshold).f1(), best.f1);
    double top = -1, top_t = 0;
    for (double t : s) {
      const double f = confusion_at(s, l, t).f1();
      if (f > top || (f == top && t > top_t)) {
        top = f;
        top_t = t;
      }
    }
    EXPECT_EQ(best.f1, top);
    EXPECT_EQ(best.threshold, top_t);
  }
}

TEST(Confusion, ExtremeThresholds) {
  const std::vector<double> s = {0.2, 0.5, 0.9};
  const std::vector<int> l = {0, 1, 1};
  const auto low = confusion_at(s, l, 0.0);
  EXPECT_EQ(low.fn, 0u);
  EXPECT_EQ(low.tn, 0u);
  const auto high = confusion_at(s, l, 1.0);
  EXPECT_EQ(high.tp, 0u);
  EXPECT_EQ(high.fp, 0u);
  EXPECT_EQ(high.total(), 3u);
}

TEST(Confusion, FourItems) {
  // At 0.5: 0.8 (pos) tp, 0.6 (neg) fp, 0.5 (pos) tp, 0.1 (pos) fn.
  const auto c = confusion_at(std::vector{0.8, 0.6, 0.5, 0.1},
                              std::vector{1, 0, 1, 1}, 0.5);
  EXPECT_EQ(c.tp, 2u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_EQ(c.tn, 0u);
  EXPECT_THROW(confusion_at(std::vector{0.1}, std::vector{1, 0}, 0.5),
               DimensionError);
}

TEST(TwoHopMass, ConstantScorer) {
  const std::vector<double> c(4, 0.25);
  const auto t = two_hop_mass_report({c, c, c, c, c, c});
  for (const auto& row : t.mean)
    for (double x : row) EXPECT_EQ(x, 0.25);
}

TEST(TwoHopMass, Means) {
  const std::vector<double> a = {1, 2, 3}, b = {4}, e;
  const auto t = two_hop_mass_report({a, b, b, a, a, b});
  EXPECT_EQ(t.mean[0][0], 2.0);
  EXPECT_EQ(t.mean[0][1], 4.0);
  EXPECT_EQ(t.mean[1][0], 4.0);
  EXPECT_THROW(two_hop_mass_report({a, b, b, a, a, e}), InputError);
}

TEST(Summarize, PopulationStd) {
  std::vector<MetricReport> records;
  for (int r = 0; r < 4; ++r) {
    MetricReport m;
    m.dataset = "d";
    m.scorer = ScorerKind::Katz;
    m.auc = 0.5 + 0.1 * r;
    m.ap = 0.5;
    m.run = r;
    records.push_back(m);
  }
  const auto s = summarize(records);
  ASSERT_EQ(s.rows.size(), 1u);
  EXPECT_EQ(s.rows[0].runs, 4u);
  EXPECT_NEAR(s.rows[0].auc_mean, 0.65, 1e-15);
  EXPECT_NEAR(s.rows[0].auc_std, std::sqrt(0.0125), 1e-15);
  EXPECT_EQ(s.rows[0].ap_std, 0.0);
  ASSERT_NE(s.find("d", ScorerKind::Katz), nullptr);
  EXPECT_EQ(s.find("d", ScorerKind::N2HP), nullptr);
}
