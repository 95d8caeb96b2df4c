#pragma once

#include <stdexcept>
#include <string>

namespace edgecache {

/// Base class for every error raised by the library. The kind maps onto the
/// command-line exit codes (usage = 1, input = 2, internal = 3).
class Error : public std::runtime_error {
  public:
    enum class Kind { Usage = 1, Input = 2, Internal = 3 };

    Error(Kind kind, const std::string& what)
        : std::runtime_error(what)
        , kind_(kind)
    {
    }

    Kind kind() const noexcept { return kind_; }

  private:
    Kind kind_;
};

/// Malformed files, bad configuration values, empty inputs where data is required.
class InputError : public Error {
  public:
    explicit InputError(const std::string& what)
        : Error(Kind::Input, what)
    {
    }
};

/// Precondition violations on library calls (bad arguments).
class UsageError : public Error {
  public:
    explicit UsageError(const std::string& what)
        : Error(Kind::Usage, what)
    {
    }
};

} // namespace edgecache
