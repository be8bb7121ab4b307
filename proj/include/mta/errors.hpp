#ifndef MTA_ERRORS_HPP
#define MTA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mta {

struct InvalidInput : std::runtime_error {
  explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace mta

#endif  // MTA_ERRORS_HPP
