#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

// A gauge whose linear part at some J is singular.
class NotInvertible : public Error {
 public:
  NotInvertible(const std::string& what, std::string subset)
      : Error(what), subset_(std::move(subset)) {}
  const std::string& subset() const { return subset_; }

 private:
  std::string subset_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what), offset_(offset) {}
  std::size_t byte_offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// Invariant violations: invalid atlases, incompatible inputs, failed checks.
class SemanticError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvb
