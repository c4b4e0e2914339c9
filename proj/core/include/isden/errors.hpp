#pragma once

#include <stdexcept>
#include <string>

namespace isden {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector/matrix lengths disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Parameters violate their invariants (non-SPD scatter, beta <= 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Not enough samples/patches for the requested fit or clustering.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// All samples coincide, so no scatter matrix can be estimated.
class DegenerateScatterError : public InsufficientDataError {
 public:
  using InsufficientDataError::InsufficientDataError;
};

// snis_estimate was handed zero samples.
class EmptySampleError : public Error {
 public:
  using Error::Error;
};

// Image file could not be read or written.
class ImageFormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDepthError : public ImageFormatError {
 public:
  using ImageFormatError::ImageFormatError;
};

// Model container errors. Each failure mode has its own type so callers
// can report them distinctly.
class ModelLoadError : public Error {
 public:
  using Error::Error;
};

class ModelMagicError : public ModelLoadError {
 public:
  using ModelLoadError::ModelLoadError;
};

class ModelVersionError : public ModelLoadError {
 public:
  using ModelLoadError::ModelLoadError;
};

class ModelTruncatedError : public ModelLoadError {
 public:
  using ModelLoadError::ModelLoadError;
};

class ModelChecksumError : public ModelLoadError {
 public:
  using ModelLoadError::ModelLoadError;
};

}  // namespace isden
