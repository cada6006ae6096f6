#ifndef HERGM_ERRORS_HPP
#define HERGM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hergm {

/// Bad input: precondition violations, malformed files, invalid configs.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An estimator or solver could not produce a finite answer.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hergm

#endif
