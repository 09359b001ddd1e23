#include "synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "common.hpp"
#include "rng.hpp"

namespace frauddet {

namespace {

// Zipf-like categorical sampler: P(index j) proportional to (j+1)^-0.8.
class ZipfSampler {
 public:
  explicit ZipfSampler(int size) {
    cumulative_.resize(static_cast<size_t>(size));
    double total = 0.0;
    for (int j = 0; j < size; ++j) {
      total += std::pow(static_cast<double>(j + 1), -0.8);
      cumulative_[static_cast<size_t>(j)] = total;
    }
    for (auto& c : cumulative_) c /= total;
  }

  int sample(double u) const {
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    return static_cast<int>(std::min<size_t>(
        static_cast<size_t>(it - cumulative_.begin()), cumulative_.size() - 1));
  }

 private:
  std::vector<double> cumulative_;
};

double round2(double v) { return std::round(v * 100.0) / 100.0; }

bool risky_provider(int index1) { return index1 % 13 == 3; }
bool risky_district(int index1) { return index1 % 7 == 2; }

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid_(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Intercept such that the mean fraud propensity over the generated claims
// equals fraud_rate; reduces to logit(fraud_rate) when the signal is flat.
double calibrate_intercept(const std::vector<double>& scaled_signal, double rate) {
  double c = logit(rate);
  const auto n = static_cast<double>(scaled_signal.size());
  for (int iter = 0; iter < 100; ++iter) {
    double mean = 0.0, slope = 0.0;
    for (const double s : scaled_signal) {
      const double p = sigmoid_(c + s);
      mean += p;
      slope += p * (1.0 - p);
    }
    mean /= n;
    slope /= n;
    const double err = mean - rate;
    if (std::abs(err) < 1e-13 || slope <= 0.0) break;
    c -= err / slope;
  }
  return c;
}

}  // namespace

double planted_signal(const ClaimRecord& rec, double paid_ratio) {
  double s = 0.0;
  // visible through the five chain features
  if (rec.net_amount > 25000.0) s += 1.5;
  if (rec.days_stayed <= 1 && rec.benefit_type == BenefitType::Surgical) s += 1.2;
  // visible only through the three extra features
  const int provider_index = std::atoi(rec.provider_id.c_str() + 1);
  const int district_index = std::atoi(rec.hospital_district.c_str() + 1);
  if (risky_provider(provider_index)) s += 2.4;
  if (risky_district(district_index)) s += 1.8;
  if (paid_ratio > 0.95) s += 2.6;
  return s;
}

Dataset generate(const GenConfig& config) {
  if (config.n_claims < 1) throw_invalid("generate: n_claims must be >= 1");
  if (!(config.fraud_rate > 0.0 && config.fraud_rate < 1.0))
    throw_invalid("generate: fraud_rate must be in (0,1), got " +
                  format_double(config.fraud_rate));
  if (!(config.signal_strength >= 0.0) || !std::isfinite(config.signal_strength))
    throw_invalid("generate: signal_strength must be a finite value >= 0");
  if (config.n_diagnosis_codes < 1 || config.n_providers < 1 || config.n_districts < 1)
    throw_invalid("generate: vocabulary sizes must be >= 1");

  const auto n = static_cast<size_t>(config.n_claims);
  Rng rng(config.seed);
  const ZipfSampler diag_sampler(config.n_diagnosis_codes);
  const ZipfSampler provider_sampler(config.n_providers);
  const ZipfSampler district_sampler(config.n_districts);

  Dataset ds;
  ds.records.resize(n);
  std::vector<double> scaled_signal(n);
  std::vector<double> noise(n);
  std::vector<double> tiebreak(n);

  for (size_t i = 0; i < n; ++i) {
    ClaimRecord& rec = ds.records[i];
    {
      char id[24];
      std::snprintf(id, sizeof(id), "C%09zu", i + 1);
      rec.claim_id = id;
    }
    rec.benefit_type =
        rng.next_unit() < 0.65 ? BenefitType::Medical : BenefitType::Surgical;
    rec.days_stayed =
        std::min(60, static_cast<int>(std::floor(rng.next_exponential(3.0))));
    rec.diagnosis_code =
        (rec.benefit_type == BenefitType::Medical ? "M" : "S") +
        std::to_string(diag_sampler.sample(rng.next_unit()) + 1);
    rec.hospital_type =
        rng.next_unit() < 0.6 ? HospitalType::Private : HospitalType::Public;
    const double scale = rec.benefit_type == BenefitType::Surgical ? 1.6 : 1.0;
    rec.net_amount = round2(scale * std::exp(9.1 + 0.85 * rng.next_normal()));
    rec.provider_id =
        "P" + std::to_string(provider_sampler.sample(rng.next_unit()) + 1);
    rec.hospital_district =
        "D" + std::to_string(district_sampler.sample(rng.next_unit()) + 1);
    const double paid_ratio = 0.55 + 0.45 * rng.next_unit();
    rec.amount_paid_to_hospital = round2(paid_ratio * rec.net_amount);

    scaled_signal[i] = config.signal_strength * planted_signal(rec, paid_ratio);
    noise[i] = rng.next_logistic();
    tiebreak[i] = rng.next_unit();
  }

  const double intercept = config.signal_strength == 0.0
                               ? logit(config.fraud_rate)
                               : calibrate_intercept(scaled_signal, config.fraud_rate);

  if (config.exact_counts) {
    const auto k = static_cast<size_t>(std::llround(
        static_cast<double>(config.n_claims) * config.fraud_rate));
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
      const double sa = intercept + scaled_signal[a] + noise[a];
      const double sb = intercept + scaled_signal[b] + noise[b];
      if (sa != sb) return sa > sb;
      if (tiebreak[a] != tiebreak[b]) return tiebreak[a] < tiebreak[b];
      return a < b;
    });
    for (size_t i = 0; i < n; ++i)
      ds.records[order[i]].label = i < k ? Label::Fraud : Label::NotFraud;
  } else {
    for (size_t i = 0; i < n; ++i)
      ds.records[i].label = intercept + scaled_signal[i] + noise[i] > 0.0
                                ? Label::Fraud
                                : Label::NotFraud;
  }

  std::ostringstream prov;
  prov << "synthgen(seed=" << config.seed << ",n=" << config.n_claims
       << ",fraud_rate=" << format_double(config.fraud_rate)
       << ",signal_strength=" << format_double(config.signal_strength)
       << ",exact_counts=" << (config.exact_counts ? "true" : "false") << ")";
  ds.provenance = prov.str();
  return ds;
}

}  // namespace frauddet
