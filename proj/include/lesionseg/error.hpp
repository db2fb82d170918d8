#pragma once

#include <stdexcept>

namespace lesionseg {

/// Raised when an argument violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace lesionseg
