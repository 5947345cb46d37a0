#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace beltrami {

// Sampling hit a non-finite value at a concrete node.
struct sampling_error : std::runtime_error {
  std::complex<double> node;
  sampling_error(std::complex<double> node_, const std::string& msg)
      : std::runtime_error(msg), node(node_) {}
};

// Input field has nonzero entries in the outer safety margin of its window.
struct support_overflow_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed-point solver failed; carries the state it failed in.
struct solver_error : std::runtime_error {
  enum class Kind { divergence, no_convergence };
  Kind kind;
  int level;       // truncation level, or 0 when not applicable
  int iterations;
  double residual; // last relative iteration gap
  solver_error(Kind kind_, int level_, int iterations_, double residual_,
               const std::string& msg)
      : std::runtime_error(msg),
        kind(kind_),
        level(level_),
        iterations(iterations_),
        residual(residual_) {}
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed text input; line is 1-based.
struct parse_error : io_error {
  int line;
  parse_error(int line_, const std::string& msg) : io_error(msg), line(line_) {}
};

}  // namespace beltrami
