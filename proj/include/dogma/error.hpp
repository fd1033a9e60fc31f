#pragma once

#include <stdexcept>
#include <string>

namespace dogma {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user-supplied data: unreadable files, malformed records, missing
// lexicon categories. The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what) {}
};

}  // namespace dogma
