#pragma once

#include <stdexcept>
#include <string>

namespace pss {

/// Bad caller input: duplicates, unsorted data, schema violations.
class malformed_input : public std::invalid_argument {
public:
  explicit malformed_input(const std::string& what) : std::invalid_argument(what) {}
};

/// Dimension cap smaller than the set's active dimension.
class invalid_cap : public std::invalid_argument {
public:
  explicit invalid_cap(const std::string& what) : std::invalid_argument(what) {}
};

/// A surrogate that was promised monotone non-increasing turned out not to be.
class surrogate_violation : public std::runtime_error {
public:
  explicit surrogate_violation(const std::string& what) : std::runtime_error(what) {}
};

/// Univariate point sequence shorter than a requested exponent.
class sequence_too_short : public std::invalid_argument {
public:
  explicit sequence_too_short(const std::string& what) : std::invalid_argument(what) {}
};

/// The model's dimension truncation cannot satisfy a requested tail bound.
class truncation_insufficient : public std::runtime_error {
public:
  explicit truncation_insufficient(const std::string& what) : std::runtime_error(what) {}
};

/// Run configuration is inconsistent with the requested accuracy.
class configuration_error : public std::invalid_argument {
public:
  explicit configuration_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Breakdown inside a numerical kernel (non-SPD pivot, failed residual check, ...).
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pss
