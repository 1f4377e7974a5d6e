#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace partisan {

/// Base class for every error raised by the library. `kind()` is a stable
/// identifier used in structured CLI error messages.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PARTISAN_ERROR(Name)                                           \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(#Name, what) {}     \
  }

PARTISAN_ERROR(PreconditionError);
PARTISAN_ERROR(SignatureMismatch);
PARTISAN_ERROR(MalformedData);
PARTISAN_ERROR(TransportError);
PARTISAN_ERROR(RangeTooLarge);
PARTISAN_ERROR(EmptySet);
PARTISAN_ERROR(EmptyInput);
PARTISAN_ERROR(UnknownProposal);
PARTISAN_ERROR(UnknownAddress);
PARTISAN_ERROR(IndexOutOfRange);
PARTISAN_ERROR(EmptyActiveSet);
PARTISAN_ERROR(AllZeroDissimilarity);
PARTISAN_ERROR(NonFiniteInput);
PARTISAN_ERROR(TooFewPoints);
PARTISAN_ERROR(SingleCluster);
PARTISAN_ERROR(EmptyRange);
PARTISAN_ERROR(IoError);
PARTISAN_ERROR(InconsistentSeries);
PARTISAN_ERROR(LabelMismatch);
PARTISAN_ERROR(ConfigError);
PARTISAN_ERROR(MissingArtifact);

#undef PARTISAN_ERROR

/// Parse failure in a line-oriented input file.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("ParseError", "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace partisan
