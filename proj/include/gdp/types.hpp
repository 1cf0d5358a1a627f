// Project-wide scalar/matrix aliases and the error taxonomy shared by the
// library and the command line tool.
#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace gdp {

// Dense double matrices, row-major so a (r,c) -> (r',c') reshape with
// r*c == r'*c' is a pure metadata change.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

inline constexpr const char* kArtifactVersion = "gdp 0.1.0";

// Error classes map one-to-one onto CLI exit codes (1/2/3).
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& m) : std::runtime_error(m) {}
};
struct DataError : std::runtime_error {
  explicit DataError(const std::string& m) : std::runtime_error(m) {}
};
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace gdp
