#pragma once

#include <stdexcept>
#include <string>

namespace p2p {

/// Unknown agent id or index.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Operation called outside its mathematical domain (unmatched agent,
/// degenerate pair, zero welfare, zero traded quantity).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid tuning parameter (gamma, family size, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem too large for an exhaustive routine.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed instance document.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace p2p
