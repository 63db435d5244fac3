#pragma once

#include <stdexcept>
#include <string>

namespace gsmloc
{

// Base class for every error raised by the library. Callers that only care
// about "something went wrong" catch this; the CLI maps the subclasses onto
// exit codes.
class error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by caller-supplied values (bad radius, empty config, ...).
class invalid_argument_error : public error
{
public:
  using error::error;
};

// Tower geometry cannot determine a position (collinear, coplanar, duplicate).
class degenerate_geometry_error : public error
{
public:
  using error::error;
};

// A turn-around time shorter than the fixed internal delay.
class negative_interval_error : public error
{
public:
  using error::error;
};

// Delay calibration produced a negative constant.
class calibration_error : public error
{
public:
  using error::error;
};

// Fewer ranging acknowledgements than the solver needs.
class insufficient_measurements_error : public error
{
public:
  using error::error;
};

// Statistics requested over a set with no valid samples.
class empty_data_error : public error
{
public:
  using error::error;
};

} // namespace gsmloc
