#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace usersim {

/// Malformed input text. Carries the byte offset or 1-based line number of the
/// offending record, whichever the format reports.
class ParseError : public std::runtime_error {
 public:
  enum class Where { ByteOffset, Line };

  ParseError(const std::string& what, Where where, std::size_t position)
      : std::runtime_error(what + (where == Where::ByteOffset ? " (at byte " : " (at line ") +
                           std::to_string(position) + ")"),
        where_(where),
        position_(position) {}

  Where where() const noexcept { return where_; }
  std::size_t position() const noexcept { return position_; }

 private:
  Where where_;
  std::size_t position_;
};

/// Invalid or unresolvable configuration (unknown preset, missing grade, out-of-range parameter).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical domain violation, e.g. a zero probability under a log.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace usersim
