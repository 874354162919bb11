#include "splat4d/common.hpp"

namespace splat4d {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::kDegenerateRotor: return "degenerate rotor";
    case Errc::kDegenerateTimeExtent: return "degenerate time extent";
    case Errc::kDegenerateCovariance: return "degenerate covariance";
    case Errc::kZeroDirection: return "zero direction";
    case Errc::kShapeMismatch: return "shape mismatch";
    case Errc::kInvalidArgument: return "invalid argument";
    case Errc::kSchema: return "schema error";
    case Errc::kIo: return "i/o error";
    case Errc::kFormat: return "format error";
  }
  return "unknown error";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace splat4d
