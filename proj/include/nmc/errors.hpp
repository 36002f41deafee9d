#pragma once

#include <stdexcept>
#include <string>

namespace nmc {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct NegativeMass : Error {
  explicit NegativeMass(const std::string& what) : Error(what) {}
};

struct NotNormalized : Error {
  explicit NotNormalized(const std::string& what) : Error(what) {}
};

struct RowNotStochastic : Error {
  explicit RowNotStochastic(const std::string& what) : Error(what) {}
};

struct InsufficientDecay : Error {
  explicit InsufficientDecay(const std::string& what) : Error(what) {}
};

struct ZeroInvariantEntry : Error {
  explicit ZeroInvariantEntry(const std::string& what) : Error(what) {}
};

struct NotInvariant : Error {
  explicit NotInvariant(const std::string& what) : Error(what) {}
};

struct FlowTooShort : Error {
  explicit FlowTooShort(const std::string& what) : Error(what) {}
};

struct KernelMismatch : Error {
  explicit KernelMismatch(const std::string& what) : Error(what) {}
};

struct EmptyTrajectory : Error {
  explicit EmptyTrajectory(const std::string& what) : Error(what) {}
};

struct TooLarge : Error {
  explicit TooLarge(const std::string& what) : Error(what) {}
};

struct DegenerateRequiresExactZero : Error {
  explicit DegenerateRequiresExactZero(const std::string& what) : Error(what) {}
};

struct SpecSyntaxError : Error {
  explicit SpecSyntaxError(const std::string& what) : Error(what) {}
};

struct SpecSemanticError : Error {
  explicit SpecSemanticError(const std::string& what) : Error(what) {}
};

}  // namespace nmc
