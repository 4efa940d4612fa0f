#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>

namespace havana {

using Scalar = double;

using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
using Vec4 = Eigen::Matrix<Scalar, 4, 1>;
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Row-major dense matrix for anything whose rows are per-point records
// (feature tables, embedding batches): row(i) is contiguous.
using MatXR =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A file is syntactically broken or violates its declared layout.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The input data cannot support the requested operation.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values were produced or supplied where finite ones are required.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

constexpr Scalar kPi = 3.14159265358979323846;

constexpr Scalar deg_to_rad(Scalar deg) { return deg * (kPi / 180.0); }

}  // namespace havana
