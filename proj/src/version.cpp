#include "xdiff/version.hpp"

#include <Eigen/Core>
#include <fftw3.h>

#include "xdiff/diagnostics.hpp"

namespace xdiff {

std::vector<std::pair<std::string, std::string>> build_versions() {
  return {
      {"xdiff", kVersion},
      {"diagnostics_schema", std::to_string(kDiagnosticsSchemaVersion)},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"fftw", fftw_version},
  };
}

}  // namespace xdiff
