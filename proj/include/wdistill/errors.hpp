#pragma once

#include <stdexcept>

namespace wdistill {

// Invalid caller input. The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : ValidationError { using ValidationError::ValidationError; };
struct LabelError : ValidationError { using ValidationError::ValidationError; };
struct CoefficientError : ValidationError { using ValidationError::ValidationError; };
struct LocalityError : ValidationError { using ValidationError::ValidationError; };
struct RegistryError : ValidationError { using ValidationError::ValidationError; };
struct TruncationError : ValidationError { using ValidationError::ValidationError; };
struct InputError : ValidationError { using ValidationError::ValidationError; };

// Broken internal assumption; unreachable for valid inputs. CLI exit code 3.
struct SolverError : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace wdistill
