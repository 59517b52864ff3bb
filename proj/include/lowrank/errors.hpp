#pragma once

#include <stdexcept>
#include <string>

namespace lowrank {

// Error taxonomy shared by the library and the CLI. The CLI maps these onto
// exit codes: contract/numeric failures -> 2, I/O failures -> 3 (usage
// problems are caught by the argument parser and exit 1).
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated precondition: bad shapes, out-of-range arguments, unknown tags.
struct contract_error : error {
  using error::error;
};

// Numerical failure: singular systems, dependent bases, non-convergence.
struct numeric_error : error {
  using error::error;
};

// File and format problems.
struct io_error : error {
  using error::error;
};

}  // namespace lowrank
