#pragma once

#include <stdexcept>
#include <string>

namespace desketch {

// Bad arguments: non-finite entries, dimension mismatches, invalid
// probability vectors, non-PSD inputs.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Structurally impossible configuration, e.g. sketch size m <= d_lambda.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejection sampler stalled or produced an out-of-range acceptance ratio.
struct SamplerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Singular systems, failed line searches, infeasible iterates.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& where, std::size_t line, const std::string& what)
      : std::runtime_error(where + ":" + std::to_string(line) + ": " + what) {}
};

struct IoError : std::runtime_error {
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what) {}
};

}  // namespace desketch
