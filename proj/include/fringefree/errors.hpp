#pragma once

#include <stdexcept>
#include <string>

namespace fringefree {

// Base class for all library errors. Subclasses are grouped into three
// categories so the CLI can map them onto distinct exit codes:
// configuration, I/O, and numerical/domain failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// geometry
class NonPositiveDepth : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class UndistortDiverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class ParallelRays : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class CoincidentCenters : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class RayMissesVolume : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// phase
class StackSizeMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class BitPlaneCountMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class IndexOutOfRange : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// correspond / unwrap
class NonPositiveVolume : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class DimensionMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// projcal
class EmptyResiduals : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class PointBehindProjector : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class EmptyInput : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class LengthMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// simulate
class SimulationFailed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class DegenerateRig : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class EmptyReference : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace fringefree
