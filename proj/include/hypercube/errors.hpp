#pragma once

#include <stdexcept>
#include <string>

namespace hypercube {

/// Base class for every domain error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A row or column of an operation table is not a permutation of {0..n-1}.
class LatinViolation : public Error {
 public:
  enum class Axis { Row, Column };

  LatinViolation(Axis axis, int index)
      : Error(std::string("Latin violation in ") +
              (axis == Axis::Row ? "row " : "column ") + std::to_string(index)),
        axis(axis),
        index(index) {}

  Axis axis;
  int index;
};

class NotAGroup : public Error {
 public:
  using Error::Error;
  NotAGroup() : Error("table is not a group") {}
};

class NotALoop : public Error {
 public:
  using Error::Error;
  NotALoop() : Error("table has no two-sided identity at element 0") {}
};

/// A factor slice appearing in a supported triple has vanishing norm.
class DegenerateSlice : public Error {
 public:
  DegenerateSlice(char factor, int index)
      : Error(std::string("degenerate slice ") + factor + "[" +
              std::to_string(index) + "]"),
        factor(factor),
        index(index) {}

  char factor;  // 'A', 'B' or 'C'
  int index;
};

/// |T_abc| underflows on a supported triple.
class DegenerateTriple : public Error {
 public:
  DegenerateTriple(int a, int b, int c)
      : Error("degenerate triple (" + std::to_string(a) + "," +
              std::to_string(b) + "," + std::to_string(c) + ")"),
        a(a),
        b(b),
        c(c) {}

  int a, b, c;
};

class NonUnitaryGauge : public Error {
 public:
  using Error::Error;
  NonUnitaryGauge() : Error("gauge matrices are not unitary") {}
};

class NotSynchronizable : public Error {
 public:
  using Error::Error;
};

class EnumRange : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (tables, CSV, config); `line` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}

  int line;
};

/// Persisted results were produced under a different optimizer configuration.
class StaleResults : public Error {
 public:
  using Error::Error;
};

}  // namespace hypercube
