#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace enclosure {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

// Rank-3 and rank-4 tensors over the 2D chart parameters, stored densely.
struct Tensor3 {
    std::array<double, 8> a{};
    double& operator()(int p, int q, int r) { return a[4 * p + 2 * q + r]; }
    double operator()(int p, int q, int r) const { return a[4 * p + 2 * q + r]; }
    Tensor3 symmetrized() const;
    double max_abs() const;
};

struct Tensor4 {
    std::array<double, 16> a{};
    double& operator()(int p, int q, int r, int s) { return a[8 * p + 4 * q + 2 * r + s]; }
    double operator()(int p, int q, int r, int s) const { return a[8 * p + 4 * q + 2 * r + s]; }
    Tensor4 symmetrized() const;
    double max_abs() const;
};

// Build fully symmetric tensors from their distinct components.
// c3[k] is the component with k indices equal to 2 (k = 0..3), c4 likewise.
Tensor3 tensor3_from_components(const std::array<double, 4>& c3);
Tensor4 tensor4_from_components(const std::array<double, 5>& c4);

// A positive number stored as mantissa * exp(log_scale); keeps e^{-2 tau d}
// style factors representable for large tau.
struct ExpScaled {
    double mantissa = 0.0;
    double log_scale = 0.0;
    double value() const { return mantissa * std::exp(log_scale); }
    double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
};

enum class ErrorCode {
    EmptyObstacle,
    PStrictlyInside,
    DegenerateReflector,
    NonPositiveDistance,
    OutsideChart,
    AmbiguousProjection,
    NonPositiveTau,
    InsideSource,
    CflViolation,
    ContaminationMargin,
    ObstacleTouchesSource,
    TimeTooShort,
    MissingVolumeSamples,
    MissingSphereSamples,
    GammaNotZero,
    NoiseFloorReached,
    InsufficientTauRange,
    QuadratureNonConvergence,
    SingularSystem,
    MultiReflector,
    UnsupportedObstacle,
    SchemaError,
    IoError,
    InvalidArgument,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace enclosure
