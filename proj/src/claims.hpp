#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace frauddet {

enum class BenefitType : uint8_t { Medical, Surgical };
enum class HospitalType : uint8_t { Private, Public };
enum class Label : uint8_t { NotFraud = 0, Fraud = 1 };

const char* to_string(BenefitType b);
const char* to_string(HospitalType h);
const char* to_string(Label l);

// One health-insurance claim, reduced to the features either model consumes.
struct ClaimRecord {
  std::string claim_id;
  BenefitType benefit_type = BenefitType::Medical;
  int days_stayed = 0;
  std::string diagnosis_code;
  HospitalType hospital_type = HospitalType::Private;
  double net_amount = 0.0;
  std::string provider_id;
  std::string hospital_district;
  double amount_paid_to_hospital = 0.0;
  Label label = Label::NotFraud;

  bool operator==(const ClaimRecord&) const = default;
};

struct Dataset {
  std::vector<ClaimRecord> records;
  std::string provenance;  // source file or generator config, free text

  size_t size() const { return records.size(); }
  size_t fraud_count() const;
  std::vector<Label> labels() const;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  double ratio = 0.0;
  uint64_t seed = 0;
};

// Column order of the dataset file format. Extra columns after these are
// accepted on input and ignored.
inline constexpr const char* kDatasetColumns[] = {
    "claim_id",       "benefit_type", "days_stayed",
    "diagnosis_code", "hospital_type", "net_amount",
    "provider_id",    "hospital_district", "amount_paid_to_hospital",
    "label",
};
inline constexpr size_t kDatasetColumnCount = 10;

Dataset read_dataset(std::istream& in, const std::string& origin);
Dataset read_dataset(const std::string& path);

void write_dataset(const Dataset& dataset, std::ostream& out);
void write_dataset(const Dataset& dataset, const std::string& path);

// Seeded uniform shuffle (Fisher-Yates over the fixed Rng); the first
// floor(ratio * n) records of the permutation form the train set.
SplitResult split_train_test(const Dataset& dataset, double ratio, uint64_t seed);

}  // namespace frauddet
