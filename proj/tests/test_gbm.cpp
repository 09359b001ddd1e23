#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "eval.hpp"
#include "gbm.hpp"
#include "model_io.hpp"
#include "rng.hpp"
#include "synthgen.hpp"
#include "test_util.hpp"

using namespace frauddet;

namespace {

Matrix make_matrix(size_t rows, size_t cols, std::vector<double> values) {
  Matrix m;
  m.rows = rows;
  m.cols = cols;
  m.values = std::move(values);
  return m;
}

// Exhaustive split enumeration over every feature and every boundary between
// adjacent distinct values, mirroring the documented gain and tie-break rules
// but computed by direct partitioning.
struct OracleSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

OracleSplit brute_force_root_split(const Matrix& x, std::span<const double> targets,
                                   int min_leaf) {
  OracleSplit best;
  double total = 0.0;
  for (size_t r = 0; r < x.rows; ++r) total += targets[r];
  const double base = total * total / static_cast<double>(x.rows);

  for (size_t f = 0; f < x.cols; ++f) {
    std::vector<double> distinct;
    for (size_t r = 0; r < x.rows; ++r) distinct.push_back(x.at(r, f));
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (size_t d = 1; d < distinct.size(); ++d) {
      const double threshold = split_threshold(distinct[d - 1], distinct[d]);
      double sum_left = 0.0;
      int64_t n_left = 0;
      for (size_t r = 0; r < x.rows; ++r) {
        if (x.at(r, f) <= threshold) {
          sum_left += targets[r];
          ++n_left;
        }
      }
      const int64_t n_right = static_cast<int64_t>(x.rows) - n_left;
      if (n_left < min_leaf || n_right < min_leaf) continue;
      const double sum_right = total - sum_left;
      const double gain = sum_left * sum_left / static_cast<double>(n_left) +
                          sum_right * sum_right / static_cast<double>(n_right) - base;
      if (!(gain > 0.0)) continue;
      if (!best.found || gain > best.gain) {
        best = {true, static_cast<int>(f), threshold, gain};
      }
    }
  }
  return best;
}

// Random dataset with exactly balanced labels: the base rate is 0.5, so the
// iteration-1 residuals are exactly +-0.5 and split gains are exact in any
// summation order, keeping the oracle comparison bit-for-bit meaningful.
struct ToyData {
  Matrix x;
  std::vector<int32_t> y;
};

ToyData random_toy(Rng& rng, size_t n, size_t cols) {
  ToyData data;
  data.x.rows = n;
  data.x.cols = cols;
  data.x.values.resize(n * cols);
  for (auto& v : data.x.values)
    v = std::round(rng.next_unit() * 64.0) / 8.0;  // coarse grid forces ties
  data.y.resize(n);
  for (size_t i = 0; i < n; ++i) data.y[i] = i < n / 2 ? 1 : 0;
  shuffle(data.y, rng);
  return data;
}

size_t leaf_of(const RegressionTree& tree, std::span<const double> row) {
  size_t i = 0;
  while (tree.nodes[i].feature >= 0) {
    const auto& n = tree.nodes[i];
    i = static_cast<size_t>(row[static_cast<size_t>(n.feature)] <= n.threshold
                                ? n.left
                                : n.right);
  }
  return i;
}

ClaimRecord claim_with(const std::string& diagnosis, double net) {
  ClaimRecord rec;
  rec.claim_id = diagnosis + std::to_string(net);
  rec.diagnosis_code = diagnosis;
  rec.provider_id = "P1";
  rec.hospital_district = "D1";
  rec.net_amount = net;
  rec.amount_paid_to_hospital = net / 2;
  return rec;
}

}  // namespace

TEST_CASE("bernoulli deviance formula") {
  const std::vector<int32_t> y{1, 0};
  SUBCASE("near-perfect predictions go to zero") {
    CHECK(bernoulli_deviance(y, std::vector<double>{1.0 - 1e-12, 1e-12}) <= 1e-10);
  }
  SUBCASE("coin-flip predictions cost 2 ln 2") {
    CHECK(bernoulli_deviance(y, std::vector<double>{0.5, 0.5}) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("clamping keeps hard 0/1 probabilities finite") {
    CHECK(std::isfinite(bernoulli_deviance(y, std::vector<double>{0.0, 1.0})));
  }
  SUBCASE("length mismatch is rejected") {
    CHECK(!testutil::error_message([&] {
            bernoulli_deviance(y, std::vector<double>{0.5});
          }).empty());
  }
}

TEST_CASE("analytic boosting gradient matches central finite differences") {
  Rng rng(19);
  for (int round = 0; round < 5; ++round) {
    const size_t n = 4 + rng.next_below(60);
    std::vector<int32_t> y(n);
    std::vector<double> f(n);
    for (size_t i = 0; i < n; ++i) {
      y[i] = rng.next_unit() < 0.4 ? 1 : 0;
      f[i] = 4.0 * rng.next_unit() - 2.0;
    }
    const auto deviance_at = [&](const std::vector<double>& raw) {
      std::vector<double> p(n);
      for (size_t i = 0; i < n; ++i) p[i] = sigmoid(raw[i]);
      return bernoulli_deviance(y, p);
    };
    const double h = 1e-5;
    for (size_t i = 0; i < n; ++i) {
      const double p = sigmoid(f[i]);
      const double analytic = 2.0 * (p - static_cast<double>(y[i])) / static_cast<double>(n);
      auto hi = f, lo = f;
      hi[i] += h;
      lo[i] -= h;
      const double numeric = (deviance_at(hi) - deviance_at(lo)) / (2.0 * h);
      CHECK(std::abs(analytic - numeric) <= 1e-6 * std::max(1.0, std::abs(analytic)));
    }
  }
}

TEST_CASE("a hand-built stump routes through the sigmoid") {
  RegressionTree stump;
  stump.nodes = {{0, 0.0, 1, 2, 0.0}, {-1, 0.0, -1, -1, -2.0}, {-1, 0.0, -1, -1, 2.0}};
  GbmModel model;
  model.f0 = 0.0;
  model.learning_rate = 0.5;
  model.trees = {stump};
  model.best_iteration = 1;
  const std::vector<double> left{-1.0};
  const std::vector<double> right{1.0};
  CHECK(model.predict_row(left) == doctest::Approx(0.2689414213699951).epsilon(1e-12));
  CHECK(model.predict_row(right) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
}

TEST_CASE("zero trees or zero learning rate predict the base rate") {
  Rng rng(23);
  const auto data = random_toy(rng, 32, 2);
  double base = 0.0;
  for (const int32_t v : data.y) base += v;
  base /= static_cast<double>(data.y.size());

  GbmConfig cfg;
  cfg.cv_folds = 0;
  cfg.min_leaf_count = 1;

  SUBCASE("n_trees = 0") {
    cfg.n_trees = 0;
    const GbmModel model = fit_gbm(data.x, data.y, cfg);
    for (size_t r = 0; r < data.x.rows; ++r)
      CHECK(model.predict_row(data.x.row(r)) == doctest::Approx(base).epsilon(1e-12));
  }
  SUBCASE("learning rate 0 with 10 trees") {
    cfg.n_trees = 10;
    cfg.learning_rate = 0.0;
    const GbmModel model = fit_gbm(data.x, data.y, cfg);
    for (size_t r = 0; r < data.x.rows; ++r)
      CHECK(model.predict_row(data.x.row(r)) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("a tree of all-zero leaves leaves predictions unchanged") {
  Rng rng(27);
  const auto data = random_toy(rng, 16, 2);
  GbmConfig cfg;
  cfg.n_trees = 3;
  cfg.cv_folds = 0;
  cfg.min_leaf_count = 1;
  GbmModel model = fit_gbm(data.x, data.y, cfg);
  std::vector<double> before;
  for (size_t r = 0; r < data.x.rows; ++r) before.push_back(model.predict_row(data.x.row(r)));
  RegressionTree zero;
  zero.nodes = {{-1, 0.0, -1, -1, 0.0}};
  model.trees.push_back(zero);
  model.best_iteration = 4;
  for (size_t r = 0; r < data.x.rows; ++r)
    CHECK(model.predict_row(data.x.row(r)) == before[r]);
}

TEST_CASE("separable 20-row toy set reaches training accuracy 1.0") {
  // single feature 0..19, labels split at 10
  Matrix x = make_matrix(20, 1, {});
  x.values.resize(20);
  std::iota(x.values.begin(), x.values.end(), 0.0);
  std::vector<int32_t> y(20);
  for (size_t i = 0; i < 20; ++i) y[i] = i >= 10 ? 1 : 0;

  GbmConfig cfg;
  cfg.n_trees = 10;
  cfg.max_depth = 2;
  cfg.learning_rate = 0.5;
  cfg.min_leaf_count = 1;
  cfg.cv_folds = 0;
  const GbmModel model = fit_gbm(x, y, cfg);

  // the first tree's root split matches the exhaustive oracle: residuals are
  // +-0.5, so the best boundary sits between 9 and 10
  REQUIRE(!model.trees.empty());
  CHECK(model.trees[0].nodes[0].feature == 0);
  CHECK(model.trees[0].nodes[0].threshold == 9.5);
  {
    std::vector<double> residuals(20);
    for (size_t i = 0; i < 20; ++i) residuals[i] = static_cast<double>(y[i]) - 0.5;
    const auto oracle = brute_force_root_split(x, residuals, 1);
    REQUIRE(oracle.found);
    CHECK(oracle.feature == model.trees[0].nodes[0].feature);
    CHECK(oracle.threshold == model.trees[0].nodes[0].threshold);
  }

  int correct = 0;
  for (size_t r = 0; r < 20; ++r) {
    const double p = model.predict_row(x.row(r));
    correct += (p > 0.5) == (y[r] == 1) ? 1 : 0;
  }
  CHECK(correct == 20);

  REQUIRE(model.train_deviance.size() == 10);
  for (size_t m = 1; m < model.train_deviance.size(); ++m)
    CHECK(model.train_deviance[m] <= model.train_deviance[m - 1] + 1e-9);
  CHECK(model.train_deviance.back() < model.train_deviance.front());
}

TEST_CASE("root splits match brute-force enumeration on random data") {
  Rng rng(29);
  GbmConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 4;
  cfg.min_leaf_count = 1;
  cfg.learning_rate = 0.1;
  cfg.cv_folds = 0;
  for (int round = 0; round < 20; ++round) {
    const size_t n = (round % 3 == 0) ? 8 : (round % 3 == 1 ? 16 : 32);
    const auto data = random_toy(rng, n, 3);

    double base = 0.0;
    for (const int32_t v : data.y) base += v;
    base /= static_cast<double>(n);
    std::vector<double> residuals(n);
    for (size_t i = 0; i < n; ++i) residuals[i] = static_cast<double>(data.y[i]) - base;

    const GbmModel model = fit_gbm(data.x, data.y, cfg);
    const auto& root = model.trees[0].nodes[0];
    const auto oracle = brute_force_root_split(data.x, residuals, cfg.min_leaf_count);
    if (oracle.found) {
      CHECK(root.feature == oracle.feature);
      CHECK(root.threshold == oracle.threshold);
    } else {
      CHECK(root.feature == -1);
    }
  }
}

TEST_CASE("trees respect max_depth and min_leaf_count, and route every row") {
  Rng rng(31);
  const auto data = random_toy(rng, 64, 3);
  std::vector<double> targets(64), hessians(64, 0.25);
  for (size_t i = 0; i < 64; ++i) targets[i] = static_cast<double>(data.y[i]) - 0.5;

  const RegressionTree tree = fit_regression_tree(data.x, targets, hessians, 3, 5);
  CHECK(tree.depth() <= 3);

  std::map<size_t, int> leaf_counts;
  for (size_t r = 0; r < data.x.rows; ++r) leaf_counts[leaf_of(tree, data.x.row(r))]++;
  for (const auto& [leaf, count] : leaf_counts) {
    CHECK(tree.nodes[leaf].feature == -1);
    CHECK(count >= 5);
  }
}

TEST_CASE("training deviance is non-increasing at learning rate 0.1") {
  Rng rng(33);
  for (int round = 0; round < 3; ++round) {
    const auto data = random_toy(rng, 128, 3);
    GbmConfig cfg;
    cfg.n_trees = 40;
    cfg.max_depth = 3;
    cfg.min_leaf_count = 2;
    cfg.cv_folds = 0;
    const GbmModel model = fit_gbm(data.x, data.y, cfg);
    for (size_t m = 1; m < model.train_deviance.size(); ++m)
      CHECK(model.train_deviance[m] <= model.train_deviance[m - 1] + 1e-9);
  }
}

TEST_CASE("predictions stay strictly inside (0,1) under saturation") {
  Matrix x = make_matrix(8, 1, {0, 1, 2, 3, 4, 5, 6, 7});
  const std::vector<int32_t> y{0, 0, 0, 0, 1, 1, 1, 1};
  GbmConfig cfg;
  cfg.n_trees = 200;
  cfg.max_depth = 1;
  cfg.learning_rate = 1.0;
  cfg.min_leaf_count = 1;
  cfg.cv_folds = 0;
  const GbmModel model = fit_gbm(x, y, cfg);
  for (size_t r = 0; r < x.rows; ++r) {
    const double p = model.predict_row(x.row(r));
    CHECK(std::isfinite(p));
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("degenerate labels are rejected") {
  Matrix x = make_matrix(4, 1, {1, 2, 3, 4});
  const std::vector<int32_t> ones{1, 1, 1, 1};
  GbmConfig cfg;
  cfg.cv_folds = 0;
  Error::Kind kind{};
  CHECK(!testutil::error_message([&] { fit_gbm(x, ones, cfg); }, &kind).empty());
  CHECK(kind == Error::Kind::Validation);
}

TEST_CASE("non-finite features are rejected") {
  Matrix x = make_matrix(4, 1, {1, 2, std::nan(""), 4});
  const std::vector<int32_t> y{0, 1, 0, 1};
  GbmConfig cfg;
  cfg.cv_folds = 0;
  Error::Kind kind{};
  CHECK(!testutil::error_message([&] { fit_gbm(x, y, cfg); }, &kind).empty());
  CHECK(kind == Error::Kind::Validation);
}

TEST_CASE("fit is deterministic: identical serialized bytes") {
  Rng rng(37);
  const auto data = random_toy(rng, 64, 3);
  GbmConfig cfg;
  cfg.n_trees = 12;
  cfg.max_depth = 3;
  cfg.min_leaf_count = 2;
  cfg.cv_folds = 0;
  const GbmModel a = fit_gbm(data.x, data.y, cfg);
  const GbmModel b = fit_gbm(data.x, data.y, cfg);
  CHECK(gbm_model_json(a) == gbm_model_json(b));
}

TEST_CASE("feature encoder: ordinal codes in first-appearance order") {
  Dataset train;
  train.records = {claim_with("A", 10), claim_with("B", 20), claim_with("C", 30),
                   claim_with("B", 40)};
  const FeatureEncoder enc = FeatureEncoder::fit(train, false);
  CHECK(enc.column_count() == 8);

  const Matrix m = enc.encode(train);
  // diagnosis_code is the third model feature (column 2)
  CHECK(m.at(0, 2) == 0.0);
  CHECK(m.at(1, 2) == 1.0);
  CHECK(m.at(2, 2) == 2.0);
  CHECK(m.at(3, 2) == 1.0);

  SUBCASE("unseen category maps to the reserved code") {
    Dataset test;
    test.records = {claim_with("Z", 5)};
    const Matrix t = enc.encode(test);
    CHECK(t.at(0, 2) == -1.0);
  }
  SUBCASE("re-encoding is deterministic") {
    const Matrix again = enc.encode(train);
    CHECK(again.values == m.values);
  }
}

TEST_CASE("feature encoder: one-hot expansion") {
  Dataset train;
  train.records = {claim_with("A", 10), claim_with("B", 20)};
  const FeatureEncoder enc = FeatureEncoder::fit(train, true);
  // benefit(1 cat) + days + diagnosis(2) + hospital(1) + net + provider(1)
  // + district(1) + paid = 9 columns
  CHECK(enc.column_count() == 9);

  Dataset test;
  test.records = {claim_with("Z", 5)};
  const Matrix t = enc.encode(test);
  // the two diagnosis indicator columns (offset 2) are both zero for unseen
  CHECK(t.at(0, 2) == 0.0);
  CHECK(t.at(0, 3) == 0.0);
}

TEST_CASE("cross-validation folds are balanced, disjoint and seeded") {
  const auto folds = make_folds(105, 10, 7);
  REQUIRE(folds.size() == 10);
  std::set<uint32_t> seen;
  size_t smallest = 105, largest = 0;
  for (const auto& fold : folds) {
    smallest = std::min(smallest, fold.size());
    largest = std::max(largest, fold.size());
    for (const uint32_t r : fold) CHECK(seen.insert(r).second);
  }
  CHECK(seen.size() == 105);
  CHECK(largest - smallest <= 1);

  const auto again = make_folds(105, 10, 7);
  CHECK(folds == again);
  CHECK(folds != make_folds(105, 10, 8));

  CHECK(!testutil::error_message([] { make_folds(5, 10, 1); }).empty());
  CHECK(!testutil::error_message([] { make_folds(5, 1, 1); }).empty());
}

TEST_CASE("cross-validation report is deterministic with best iteration in range") {
  Rng rng(41);
  const auto data = random_toy(rng, 128, 3);
  GbmConfig cfg;
  cfg.n_trees = 15;
  cfg.max_depth = 2;
  cfg.min_leaf_count = 2;
  cfg.cv_folds = 4;
  cfg.seed = 5;
  const CvReport a = cross_validate(data.x, data.y, cfg);
  const CvReport b = cross_validate(data.x, data.y, cfg);
  CHECK(a.mean_deviance == b.mean_deviance);
  CHECK(a.best_iteration == b.best_iteration);
  CHECK(a.best_iteration >= 1);
  CHECK(a.best_iteration <= cfg.n_trees);
  REQUIRE(a.mean_deviance.size() == 15);
}

TEST_CASE("signal-free data keeps the cv curve flat") {
  GenConfig gen;
  gen.n_claims = 600;
  gen.signal_strength = 0.0;
  gen.fraud_rate = 0.3;
  gen.seed = 77;
  const Dataset ds = generate(gen);

  GbmConfig cfg;
  cfg.n_trees = 25;
  cfg.max_depth = 3;
  cfg.min_leaf_count = 5;
  cfg.cv_folds = 3;
  cfg.seed = 9;
  const GbmTrainResult result = train_gbm(ds, cfg);
  REQUIRE(result.cv.has_value());
  const auto& curve = result.cv->mean_deviance;
  const double first = curve.front();
  const double minimum = *std::min_element(curve.begin(), curve.end());
  CHECK(first - minimum <= 0.02 * first);  // no spurious convergence story
}

TEST_CASE("train_gbm wires the cv best iteration into the model") {
  GenConfig gen;
  gen.n_claims = 500;
  gen.signal_strength = 1.5;
  gen.fraud_rate = 0.25;
  gen.seed = 13;
  const Dataset ds = generate(gen);

  GbmConfig cfg;
  cfg.n_trees = 10;
  cfg.max_depth = 3;
  cfg.min_leaf_count = 5;
  cfg.cv_folds = 3;
  SUBCASE("use_best_iteration on") {
    cfg.use_best_iteration = true;
    const GbmTrainResult result = train_gbm(ds, cfg);
    REQUIRE(result.cv.has_value());
    CHECK(result.model.best_iteration == result.cv->best_iteration);
  }
  SUBCASE("use_best_iteration off keeps all trees") {
    cfg.use_best_iteration = false;
    const GbmTrainResult result = train_gbm(ds, cfg);
    CHECK(result.model.best_iteration == cfg.n_trees);
  }
  SUBCASE("cv disabled") {
    cfg.cv_folds = 0;
    const GbmTrainResult result = train_gbm(ds, cfg);
    CHECK(!result.cv.has_value());
    CHECK(result.model.best_iteration == cfg.n_trees);
  }
  SUBCASE("one-hot encoding trains end to end") {
    cfg.cv_folds = 0;
    cfg.one_hot = true;
    const GbmTrainResult result = train_gbm(ds, cfg);
    CHECK(result.model.encoder.one_hot());
    CHECK(result.model.encoder.column_count() > kGbmFeatures.size());
    const auto scores = gbm_scores(result.model, ds);
    REQUIRE(scores.size() == ds.size());
    const double area = auc(ds.labels(), scores);
    CHECK(area > 0.6);  // the planted signal is visible through indicators too
  }
}
