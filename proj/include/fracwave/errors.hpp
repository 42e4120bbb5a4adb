#pragma once

#include <stdexcept>
#include <string>

namespace fracwave {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidGrid : Error {
  explicit InvalidGrid(const std::string& msg) : Error("InvalidGrid: " + msg) {}
};

struct GridMismatch : Error {
  explicit GridMismatch(const std::string& msg) : Error("GridMismatch: " + msg) {}
};

struct NonFinite : Error {
  explicit NonFinite(const std::string& msg) : Error("NonFinite: " + msg) {}
};

struct InvalidP : Error {
  explicit InvalidP(const std::string& msg) : Error("InvalidP: " + msg) {}
};

struct OrderTooLarge : Error {
  explicit OrderTooLarge(const std::string& msg) : Error("OrderTooLarge: " + msg) {}
};

struct UnderResolved : Error {
  explicit UnderResolved(const std::string& msg) : Error("UnderResolved: " + msg) {}
};

struct EpsilonUnderResolved : Error {
  explicit EpsilonUnderResolved(const std::string& msg)
      : Error("EpsilonUnderResolved: " + msg) {}
};

struct NegativeBase : Error {
  explicit NegativeBase(const std::string& msg) : Error("NegativeBase: " + msg) {}
};

struct NegativeCoefficient : Error {
  explicit NegativeCoefficient(const std::string& msg)
      : Error("NegativeCoefficient: " + msg) {}
};

struct Unstable : Error {
  explicit Unstable(const std::string& msg) : Error("Unstable: " + msg) {}
};

struct QuadratureUnderResolved : Error {
  explicit QuadratureUnderResolved(const std::string& msg)
      : Error("QuadratureUnderResolved: " + msg) {}
};

struct DegenerateFit : Error {
  explicit DegenerateFit(const std::string& msg) : Error("DegenerateFit: " + msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("ConfigError: " + msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("IoError: " + msg) {}
};

}  // namespace fracwave
