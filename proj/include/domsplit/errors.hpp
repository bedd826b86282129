#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace domsplit {

// Base class for every analysis failure. kind() is a stable tag used in reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define DOMSPLIT_ERROR(Name)                                                  \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& what) : Error(#Name, what) {}            \
  };

DOMSPLIT_ERROR(InvalidArgument)
DOMSPLIT_ERROR(DimensionMismatch)
DOMSPLIT_ERROR(NoGap)
DOMSPLIT_ERROR(NotConverged)
DOMSPLIT_ERROR(RankCollapse)
DOMSPLIT_ERROR(NotFound)
DOMSPLIT_ERROR(NoHits)
DOMSPLIT_ERROR(BudgetExceeded)
DOMSPLIT_ERROR(RankNotRaised)
DOMSPLIT_ERROR(HypothesisViolation)
DOMSPLIT_ERROR(PreconditionFailed)
DOMSPLIT_ERROR(OutOfRange)

#undef DOMSPLIT_ERROR

class BranchUnavailable : public Error {
 public:
  explicit BranchUnavailable(std::ptrdiff_t step)
      : Error("BranchUnavailable", "no preimage found at backward step " + std::to_string(step)), step_(step) {}
  std::ptrdiff_t step() const noexcept { return step_; }

 private:
  std::ptrdiff_t step_;
};

class ChainOverflow : public Error {
 public:
  explicit ChainOverflow(std::size_t index)
      : Error("ChainOverflow", "non-finite product at chain index " + std::to_string(index)), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ConfigError : public Error {
 public:
  ConfigError(int line, std::string field, const std::string& what)
      : Error("ConfigError", format(line, field, what)), line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(int line, const std::string& field, const std::string& what) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += field + ": ";
    return out + what;
  }
  int line_;
  std::string field_;
};

}  // namespace domsplit
