#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace foliate {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec3i = Eigen::Vector3i;

enum class ErrorKind {
  degree,
  metric,
  degenerate_form,
  tangency,
  singularity,
  parameter,
  parse,
  validation,
  mesh_quality,
  compatibility,
  cycle,
  convergence,
  io,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so the CLI can map it
// to an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace foliate
