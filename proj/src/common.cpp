#include "common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace frauddet {

void throw_invalid(std::string message) {
  throw Error(Error::Kind::InvalidArgument, std::move(message));
}

void throw_validation(std::string message) {
  throw Error(Error::Kind::Validation, std::move(message));
}

void throw_io(std::string message) {
  throw Error(Error::Kind::Io, std::move(message));
}

void throw_internal(std::string message) {
  throw Error(Error::Kind::Internal, std::move(message));
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

}  // namespace frauddet
