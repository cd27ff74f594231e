#ifndef GRADREC_ERRORS_HPP
#define GRADREC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gradrec {

/// Bad arguments or malformed data supplied by the caller.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Divergence, ill-conditioning or an unexpected complex residue.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gradrec

#endif  // GRADREC_ERRORS_HPP
