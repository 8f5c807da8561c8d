#pragma once

#include <stdexcept>

namespace plk {

// Error taxonomy shared by all modules. The CLI maps each class to a
// distinct exit code (see tools/).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry
struct InvalidDepthError : Error { using Error::Error; };
struct BehindCameraError : Error { using Error::Error; };
struct DegenerateGeometryError : Error { using Error::Error; };

// shapes / formats / parsing
struct ShapeError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct AlignmentError : Error { using Error::Error; };
struct LookupError : Error { using Error::Error; };

// evaluation
struct EmptyEvaluationError : Error { using Error::Error; };
struct UndefinedRecallError : Error { using Error::Error; };

}  // namespace plk
