#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cartan {

/// Numeric assignment of symbol values.
using Point = std::map<std::string, double, std::less<>>;

enum class ErrorKind {
  DivisionByZero,
  UnboundVariable,
  DomainError,
  ParseError,
  ChartMismatch,
  DegreeMismatch,
  ZeroEta,
  NonConstantRank,
  UnequalGeneratorDegrees,
  NormalFormRequired,
  ImproperPrinciple,
  RankDeficientL,
  NotClosed,
  NonPolynomialCoefficient,
  EvaluationFailure,
  BoxExit,
  TangencyViolation,
  ResidualTooLarge,
  NonTransversalDistribution,
  InvalidArgument,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position, std::size_t line = 0)
      : Error(ErrorKind::ParseError, what), position_(position), line_(line) {}
  std::size_t position() const { return position_; }
  std::size_t line() const { return line_; }

 private:
  std::size_t position_;
  std::size_t line_;
};

class NonConstantRankError : public Error {
 public:
  /// Witnesses pair a sample point with the rank observed there.
  NonConstantRankError(const std::string& what, std::vector<std::pair<Point, int>> witnesses)
      : Error(ErrorKind::NonConstantRank, what), witnesses_(std::move(witnesses)) {}
  const std::vector<std::pair<Point, int>>& witnesses() const { return witnesses_; }

 private:
  std::vector<std::pair<Point, int>> witnesses_;
};

class ResidualTooLargeError : public Error {
 public:
  ResidualTooLargeError(const std::string& what, std::vector<double> node, double value)
      : Error(ErrorKind::ResidualTooLarge, what), node_(std::move(node)), value_(value) {}
  const std::vector<double>& node() const { return node_; }
  double value() const { return value_; }

 private:
  std::vector<double> node_;
  double value_;
};

}  // namespace cartan
