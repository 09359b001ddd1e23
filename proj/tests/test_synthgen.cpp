#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "eval.hpp"
#include "gbm.hpp"
#include "markov.hpp"
#include "synthgen.hpp"
#include "test_util.hpp"

using namespace frauddet;

TEST_CASE("generate rejects invalid configs") {
  GenConfig cfg;
  cfg.n_claims = 0;
  CHECK(!testutil::error_message([&] { generate(cfg); }).empty());
  cfg = {};
  cfg.fraud_rate = 1.5;
  CHECK(!testutil::error_message([&] { generate(cfg); }).empty());
  cfg = {};
  cfg.fraud_rate = 0.0;
  CHECK(!testutil::error_message([&] { generate(cfg); }).empty());
  cfg = {};
  cfg.signal_strength = -1.0;
  CHECK(!testutil::error_message([&] { generate(cfg); }).empty());
  cfg = {};
  cfg.n_providers = 0;
  CHECK(!testutil::error_message([&] { generate(cfg); }).empty());
}

TEST_CASE("identical configs generate identical datasets") {
  GenConfig cfg;
  cfg.n_claims = 3000;
  cfg.seed = 99;
  cfg.signal_strength = 1.3;
  const Dataset a = generate(cfg);
  const Dataset b = generate(cfg);
  REQUIRE(a.size() == b.size());
  CHECK(a.records == b.records);

  cfg.seed = 100;
  const Dataset c = generate(cfg);
  CHECK(a.records != c.records);
}

TEST_CASE("every generated record satisfies the claim invariants") {
  GenConfig cfg;
  cfg.n_claims = 5000;
  cfg.seed = 4;
  cfg.signal_strength = 2.0;
  const Dataset ds = generate(cfg);
  std::set<std::string> ids;
  for (const auto& r : ds.records) {
    CHECK(ids.insert(r.claim_id).second);
    CHECK(r.days_stayed >= 0);
    CHECK(r.days_stayed <= 60);
    CHECK(r.net_amount >= 0.0);
    CHECK(std::isfinite(r.net_amount));
    CHECK(r.amount_paid_to_hospital >= 0.0);
    CHECK(r.amount_paid_to_hospital <= r.net_amount);
    CHECK(!r.diagnosis_code.empty());
    CHECK(!r.provider_id.empty());
    CHECK(!r.hospital_district.empty());
  }
}

TEST_CASE("exact_counts pins the fraud count to round(n * rate)") {
  GenConfig cfg;
  cfg.n_claims = 20000;
  cfg.fraud_rate = 0.0995;
  cfg.exact_counts = true;
  cfg.seed = 8;
  for (const double strength : {0.0, 1.5}) {
    cfg.signal_strength = strength;
    const Dataset ds = generate(cfg);
    CHECK(ds.fraud_count() == 1990);  // round(20000 * 0.0995)
  }
}

TEST_CASE("the full-size dataset hits the published fraud rate") {
  GenConfig cfg;
  cfg.n_claims = 382587;
  cfg.fraud_rate = 0.0995;
  cfg.exact_counts = true;
  cfg.seed = 7;
  cfg.signal_strength = 1.0;
  const Dataset ds = generate(cfg);
  CHECK(ds.size() == 382587);
  CHECK(ds.fraud_count() == 38067);  // round(382587 * 0.0995) = round(38067.4065)
  const double share =
      static_cast<double>(ds.fraud_count()) / static_cast<double>(ds.size());
  CHECK(std::abs(share - 0.0995) <= 0.00005);

  // a file with the published fraud count reads back at 9.95% as well
  GenConfig published = cfg;
  published.fraud_rate = 38082.0 / 382587.0;
  const Dataset exact = generate(published);
  CHECK(exact.fraud_count() == 38082);

  testutil::TempDir tmp;
  const auto path = tmp.file("full.csv");
  write_dataset(exact, path);
  const Dataset back = read_dataset(path);
  REQUIRE(back.size() == 382587);
  CHECK(back.fraud_count() == 38082);
  const double published_share =
      static_cast<double>(back.fraud_count()) / static_cast<double>(back.size());
  CHECK(std::abs(published_share - 0.0995) <= 0.00005);
}

TEST_CASE("without exact_counts the rate lands within four binomial sd") {
  GenConfig cfg;
  cfg.n_claims = 15000;
  cfg.fraud_rate = 0.0995;
  cfg.exact_counts = false;
  for (const double strength : {0.0, 1.0, 2.0}) {
    for (const uint64_t seed : {1ull, 2ull, 3ull}) {
      cfg.signal_strength = strength;
      cfg.seed = seed;
      const Dataset ds = generate(cfg);
      const double expected = cfg.fraud_rate * static_cast<double>(cfg.n_claims);
      const double sd = std::sqrt(expected * (1.0 - cfg.fraud_rate));
      CHECK(std::abs(static_cast<double>(ds.fraud_count()) - expected) <= 4.0 * sd);
    }
  }
}

TEST_CASE("zero signal strength makes labels independent of the features") {
  GenConfig cfg;
  cfg.n_claims = 50000;
  cfg.fraud_rate = 0.0995;
  cfg.signal_strength = 0.0;
  cfg.seed = 10;
  const Dataset ds = generate(cfg);

  const SplitResult split = split_train_test(ds, 0.7, 10);
  const MarkovFraudModel model = train_markov(split.train, {});
  const auto scores = markov_scores(model, split.test);
  const double area = auc(split.test.labels(), scores);
  CHECK(area >= 0.48);
  CHECK(area <= 0.52);
}

TEST_CASE("median gbm auc is non-decreasing in the signal strength") {
  const auto median_auc = [](double strength) {
    std::vector<double> aucs;
    for (const uint64_t seed : {3ull, 14ull, 25ull}) {
      GenConfig gen;
      gen.n_claims = 3000;
      gen.fraud_rate = 0.15;
      gen.signal_strength = strength;
      gen.seed = seed;
      const Dataset ds = generate(gen);
      const SplitResult split = split_train_test(ds, 0.7, seed);

      GbmConfig cfg;
      cfg.n_trees = 25;
      cfg.max_depth = 3;
      cfg.min_leaf_count = 5;
      cfg.cv_folds = 0;
      const GbmTrainResult fit = train_gbm(split.train, cfg);
      const auto scores = gbm_scores(fit.model, split.test);
      aucs.push_back(auc(split.test.labels(), scores));
    }
    std::sort(aucs.begin(), aucs.end());
    return aucs[1];
  };
  const double a0 = median_auc(0.0);
  const double a1 = median_auc(1.0);
  const double a2 = median_auc(2.0);
  CHECK(a0 <= a1);
  CHECK(a1 <= a2);
  CHECK(a2 > 0.7);  // the planted signal is actually learnable
}
