#include "enclosure/core.hpp"

#include <algorithm>

namespace enclosure {

namespace {
// permutations of three and four indices, used for symmetrization
constexpr int kPerm3[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
}  // namespace

Tensor3 Tensor3::symmetrized() const {
    Tensor3 out;
    int idx[3];
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
            for (int r = 0; r < 2; ++r) {
                idx[0] = p, idx[1] = q, idx[2] = r;
                double s = 0.0;
                for (const auto& pm : kPerm3) s += (*this)(idx[pm[0]], idx[pm[1]], idx[pm[2]]);
                out(p, q, r) = s / 6.0;
            }
    return out;
}

double Tensor3::max_abs() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

Tensor4 Tensor4::symmetrized() const {
    // a symmetric 2D tensor depends only on how many indices equal 1
    std::array<double, 5> sum{};
    std::array<int, 5> count{};
    for (int i = 0; i < 16; ++i) {
        int k = __builtin_popcount(static_cast<unsigned>(i));
        sum[k] += a[i];
        ++count[k];
    }
    std::array<double, 5> c{};
    for (int k = 0; k < 5; ++k) c[k] = sum[k] / count[k];
    return tensor4_from_components(c);
}

double Tensor4::max_abs() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

Tensor3 tensor3_from_components(const std::array<double, 4>& c3) {
    Tensor3 t;
    for (int i = 0; i < 8; ++i) t.a[i] = c3[__builtin_popcount(static_cast<unsigned>(i))];
    return t;
}

Tensor4 tensor4_from_components(const std::array<double, 5>& c4) {
    Tensor4 t;
    for (int i = 0; i < 16; ++i) t.a[i] = c4[__builtin_popcount(static_cast<unsigned>(i))];
    return t;
}

const char* error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyObstacle: return "EmptyObstacle";
        case ErrorCode::PStrictlyInside: return "PStrictlyInside";
        case ErrorCode::DegenerateReflector: return "DegenerateReflector";
        case ErrorCode::NonPositiveDistance: return "NonPositiveDistance";
        case ErrorCode::OutsideChart: return "OutsideChart";
        case ErrorCode::AmbiguousProjection: return "AmbiguousProjection";
        case ErrorCode::NonPositiveTau: return "NonPositiveTau";
        case ErrorCode::InsideSource: return "InsideSource";
        case ErrorCode::CflViolation: return "CFLViolation";
        case ErrorCode::ContaminationMargin: return "ContaminationMargin";
        case ErrorCode::ObstacleTouchesSource: return "ObstacleTouchesSource";
        case ErrorCode::TimeTooShort: return "TimeTooShort";
        case ErrorCode::MissingVolumeSamples: return "MissingVolumeSamples";
        case ErrorCode::MissingSphereSamples: return "MissingSphereSamples";
        case ErrorCode::GammaNotZero: return "GammaNotZero";
        case ErrorCode::NoiseFloorReached: return "NoiseFloorReached";
        case ErrorCode::InsufficientTauRange: return "InsufficientTauRange";
        case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::MultiReflector: return "MultiReflector";
        case ErrorCode::UnsupportedObstacle: return "UnsupportedObstacle";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

}  // namespace enclosure
