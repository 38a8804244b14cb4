#pragma once

#include <stdexcept>
#include <string>

namespace grfmask {

// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad sizes, bad k, zero scale, out-of-range probabilities.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// kNN input with coincident points.
class AmbiguityError : public Error {
 public:
  using Error::Error;
};

// Coefficient series without a real deconvolution (alpha_0 <= 0).
class SeriesError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Iterative method failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A row normalizer below the degeneracy threshold in a path that must not degrade silently.
class DegenerateNormalization : public Error {
 public:
  using Error::Error;
};

// A search exceeded its cap without meeting the target.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Malformed or unreadable files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace grfmask
