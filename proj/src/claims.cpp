#include "claims.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "common.hpp"
#include "rng.hpp"

namespace frauddet {

const char* to_string(BenefitType b) {
  return b == BenefitType::Medical ? "MEDICAL" : "SURGICAL";
}

const char* to_string(HospitalType h) {
  return h == HospitalType::Private ? "Private" : "Public";
}

const char* to_string(Label l) { return l == Label::Fraud ? "FRAUD" : "NOT_FRAUD"; }

size_t Dataset::fraud_count() const {
  size_t n = 0;
  for (const auto& r : records)
    if (r.label == Label::Fraud) ++n;
  return n;
}

std::vector<Label> Dataset::labels() const {
  std::vector<Label> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  for (;;) {
    const size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void row_error(const std::string& origin, size_t line_no,
                            const std::string& column, const std::string& what) {
  std::ostringstream os;
  os << origin << ":" << line_no;
  if (!column.empty()) os << ": column '" << column << "'";
  os << ": " << what;
  throw_validation(os.str());
}

double parse_amount(const std::string& origin, size_t line_no,
                    const std::string& column, const std::string& field) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    row_error(origin, line_no, column, "expected a number, got \"" + field + "\"");
  if (!std::isfinite(value))
    row_error(origin, line_no, column, "amount must be finite");
  if (value < 0.0)
    row_error(origin, line_no, column, "amount must be >= 0, got \"" + field + "\"");
  return value;
}

int parse_days(const std::string& origin, size_t line_no, const std::string& field) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    row_error(origin, line_no, "days_stayed",
              "expected a non-negative integer, got \"" + field + "\"");
  if (value < 0)
    row_error(origin, line_no, "days_stayed",
              "expected a non-negative integer, got \"" + field + "\"");
  return value;
}

}  // namespace

Dataset read_dataset(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw_validation(origin + ": empty file, header row required");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_fields(line);
  if (header.size() < kDatasetColumnCount) {
    std::ostringstream os;
    os << origin << ":1: header has " << header.size() << " columns, expected at least "
       << kDatasetColumnCount << " (missing '" << kDatasetColumns[header.size()] << "')";
    throw_validation(os.str());
  }
  for (size_t i = 0; i < kDatasetColumnCount; ++i) {
    if (header[i] != kDatasetColumns[i]) {
      std::ostringstream os;
      os << origin << ":1: header column " << (i + 1) << " is \"" << header[i]
         << "\", expected \"" << kDatasetColumns[i] << "\"";
      throw_validation(os.str());
    }
  }
  {
    std::unordered_set<std::string> seen;
    for (const auto& name : header) {
      if (!seen.insert(name).second)
        throw_validation(origin + ":1: duplicate header column '" + name + "'");
    }
  }

  Dataset ds;
  ds.provenance = origin;
  std::unordered_set<std::string> ids;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      std::ostringstream os;
      os << origin << ":" << line_no << ": expected " << header.size()
         << " fields, got " << fields.size();
      throw_validation(os.str());
    }

    ClaimRecord rec;
    rec.claim_id = fields[0];
    if (rec.claim_id.empty()) row_error(origin, line_no, "claim_id", "must not be empty");
    if (!ids.insert(rec.claim_id).second)
      row_error(origin, line_no, "claim_id", "duplicate claim_id \"" + rec.claim_id + "\"");

    if (fields[1] == "MEDICAL") {
      rec.benefit_type = BenefitType::Medical;
    } else if (fields[1] == "SURGICAL") {
      rec.benefit_type = BenefitType::Surgical;
    } else {
      row_error(origin, line_no, "benefit_type",
                "expected MEDICAL or SURGICAL, got \"" + fields[1] + "\"");
    }

    rec.days_stayed = parse_days(origin, line_no, fields[2]);
    rec.diagnosis_code = fields[3];
    if (rec.diagnosis_code.empty())
      row_error(origin, line_no, "diagnosis_code", "must not be empty");

    if (fields[4] == "Private") {
      rec.hospital_type = HospitalType::Private;
    } else if (fields[4] == "Public") {
      rec.hospital_type = HospitalType::Public;
    } else {
      row_error(origin, line_no, "hospital_type",
                "expected Private or Public, got \"" + fields[4] + "\"");
    }

    rec.net_amount = parse_amount(origin, line_no, "net_amount", fields[5]);
    rec.provider_id = fields[6];
    if (rec.provider_id.empty())
      row_error(origin, line_no, "provider_id", "must not be empty");
    rec.hospital_district = fields[7];
    if (rec.hospital_district.empty())
      row_error(origin, line_no, "hospital_district", "must not be empty");
    rec.amount_paid_to_hospital =
        parse_amount(origin, line_no, "amount_paid_to_hospital", fields[8]);

    if (fields[9] == "FRAUD") {
      rec.label = Label::Fraud;
    } else if (fields[9] == "NOT_FRAUD") {
      rec.label = Label::NotFraud;
    } else {
      row_error(origin, line_no, "label",
                "expected FRAUD or NOT_FRAUD, got \"" + fields[9] + "\"");
    }

    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open dataset file: " + path);
  return read_dataset(in, path);
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  for (size_t i = 0; i < kDatasetColumnCount; ++i) {
    if (i) out << ',';
    out << kDatasetColumns[i];
  }
  out << '\n';
  for (const auto& r : dataset.records) {
    out << r.claim_id << ',' << to_string(r.benefit_type) << ',' << r.days_stayed
        << ',' << r.diagnosis_code << ',' << to_string(r.hospital_type) << ','
        << format_double(r.net_amount) << ',' << r.provider_id << ','
        << r.hospital_district << ',' << format_double(r.amount_paid_to_hospital)
        << ',' << to_string(r.label) << '\n';
  }
}

void write_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_io("cannot open file for writing: " + path);
  write_dataset(dataset, out);
  out.flush();
  if (!out) throw_io("write failed: " + path);
}

SplitResult split_train_test(const Dataset& dataset, double ratio, uint64_t seed) {
  if (dataset.records.empty()) throw_invalid("split_train_test: dataset is empty");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw_invalid("split_train_test: ratio must be in (0,1), got " + format_double(ratio));

  const size_t n = dataset.records.size();
  std::vector<uint32_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = static_cast<uint32_t>(i);
  Rng rng(seed);
  shuffle(order, rng);

  const size_t n_train = static_cast<size_t>(std::floor(ratio * static_cast<double>(n)));

  SplitResult result;
  result.ratio = ratio;
  result.seed = seed;
  result.train.records.reserve(n_train);
  result.test.records.reserve(n - n_train);
  for (size_t i = 0; i < n; ++i) {
    auto& side = (i < n_train) ? result.train : result.test;
    side.records.push_back(dataset.records[order[i]]);
  }
  std::ostringstream prov;
  prov << dataset.provenance << " [split ratio=" << format_double(ratio)
       << " seed=" << seed;
  result.train.provenance = prov.str() + " part=train]";
  result.test.provenance = prov.str() + " part=test]";
  return result;
}

}  // namespace frauddet
