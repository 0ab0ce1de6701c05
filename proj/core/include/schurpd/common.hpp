#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace schurpd {

using Index = int;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Node positions, one row per node; column v holds coordinate v of every node,
// so each column is a right-hand side of the scalar global system.
using Positions = Eigen::MatrixX3d;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class IndefiniteMatrix : public Error {
 public:
  IndefiniteMatrix(const std::string& what, Index column)
      : Error(what), column_(column) {}
  Index column() const { return column_; }

 private:
  Index column_;
};

class StructuralError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace schurpd
