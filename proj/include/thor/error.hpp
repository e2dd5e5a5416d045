#pragma once

#include <stdexcept>
#include <string>

namespace thor {

// Base of every error the library raises. Callers that only care about
// user-facing failures can catch this; numeric faults are split out so the
// CLI can map them to a distinct exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidPair : public Error {
 public:
  using Error::Error;
};

class UncoverableClass : public Error {
 public:
  UncoverableClass(const std::string& what, int label) : Error(what), label_(label) {}
  int label() const { return label_; }

 private:
  int label_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line) : Error(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class InfeasibleMargin : public Error {
 public:
  using Error::Error;
};

class StaleTape : public Error {
 public:
  using Error::Error;
};

class NumericFault : public Error {
 public:
  using Error::Error;
};

}  // namespace thor
