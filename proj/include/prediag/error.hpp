#pragma once

#include <stdexcept>
#include <string>

namespace prediag {

/// Precondition violated by a caller-supplied value.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable or ill-formed input data (files, manifests, model documents).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Training cannot proceed on the supplied data (e.g. a single class).
class TrainingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace prediag
