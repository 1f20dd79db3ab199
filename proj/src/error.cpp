#include "forge/error.hpp"

namespace forge {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension:
      return "dimension error";
    case ErrorKind::domain:
      return "domain error";
    case ErrorKind::infeasible:
      return "infeasible";
    case ErrorKind::unsupported:
      return "unsupported";
    case ErrorKind::size:
      return "size cap exceeded";
    case ErrorKind::solver:
      return "solver failure";
    case ErrorKind::config:
      return "config error";
  }
  return "error";
}

}  // namespace forge
