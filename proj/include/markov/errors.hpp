#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace markov {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed UTF-8 in an input text.
struct DecodeError : Error {
  using Error::Error;
};

// Argument outside the callee's domain: bad order, bad probability,
// unknown state or token id, invalid smoothing parameter.
struct DomainError : Error {
  using Error::Error;
};

// A context was queried that the model has never seen. `position` is set
// when the miss happened at a known step of a walk or evaluation.
struct MissingContextError : Error {
  explicit MissingContextError(const std::string& msg) : Error(msg) {}
  MissingContextError(const std::string& msg, std::size_t pos)
      : Error(msg), position(pos) {}

  std::optional<std::size_t> position;
};

// Input too small for the requested operation (e.g. estimating an order-k
// model from fewer than k+1 observations).
struct InsufficientDataError : Error {
  using Error::Error;
};

// Unparseable or internally inconsistent serialized data.
struct FormatError : Error {
  using Error::Error;
};

}  // namespace markov
