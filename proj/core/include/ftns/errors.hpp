// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ftns {

/// Out-of-range tuning or model parameter.
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// gamma() evaluated at (numerically) the origin.
class SingularityError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Dimension or symmetry mismatch between operands.
class ShapeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Operation not available for this cost model (e.g. oracles on a black box).
class UnsupportedError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Dither frequency set rejected (duplicate, irrational ratios, ...).
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace ftns
