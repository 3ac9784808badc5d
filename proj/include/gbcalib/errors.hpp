#pragma once

#include <stdexcept>
#include <string>

namespace gbcalib {

// Shared error taxonomy. Usage/validation failures and numerical
// failures are distinct branches so the CLI can map them to different
// exit codes (2 vs 3).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// -- usage / validation ------------------------------------------------
struct DimensionMismatch : Error { using Error::Error; };
struct BadLevel : Error { using Error::Error; };
struct TooFewGroups : Error { using Error::Error; };
struct TooFewReps : Error { using Error::Error; };
struct EmptyDraws : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };

struct ParseError : Error {
  ParseError(const std::string& what, long line_number)
      : Error(what + " (line " + std::to_string(line_number) + ")"),
        line(line_number) {}
  long line;
};

// -- numerical ---------------------------------------------------------
struct NotPsd : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

}  // namespace gbcalib
