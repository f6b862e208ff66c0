#pragma once

#include <stdexcept>
#include <string>

namespace qpar {

struct OutOfDomain : std::runtime_error {
  explicit OutOfDomain(const std::string& what) : std::runtime_error(what) {}
};

struct ArityMismatch : std::runtime_error {
  explicit ArityMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct TooLarge : std::runtime_error {
  explicit TooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct IndexOutOfRange : std::runtime_error {
  explicit IndexOutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct ConstructionFailed : std::runtime_error {
  explicit ConstructionFailed(const std::string& what) : std::runtime_error(what) {}
};

struct StrategyViolation : std::runtime_error {
  explicit StrategyViolation(const std::string& what) : std::runtime_error(what) {}
};

struct ParallelismTooSmall : std::runtime_error {
  explicit ParallelismTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct LayoutMismatch : std::runtime_error {
  explicit LayoutMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct CapExceeded : std::runtime_error {
  explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct NoConvergence : std::runtime_error {
  NoConvergence(const std::string& what, double residual_)
      : std::runtime_error(what), residual(residual_) {}
  double residual;
};

struct NotNearestNeighbor : std::runtime_error {
  explicit NotNearestNeighbor(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyRelation : std::runtime_error {
  explicit EmptyRelation(const std::string& what) : std::runtime_error(what) {}
};

struct ConstantFunction : std::runtime_error {
  explicit ConstantFunction(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qpar
