#pragma once

#include <stdexcept>
#include <string>

namespace fairbook {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable input or an ingest result that cannot be used.
class IngestError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

}  // namespace fairbook
