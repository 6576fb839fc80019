#ifndef CONFKIT_ERROR_HPP
#define CONFKIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace confkit {

// All recoverable failures (bad input files, contract violations) throw Error.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace confkit

#endif  // CONFKIT_ERROR_HPP
