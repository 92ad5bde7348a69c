#pragma once

#include "enclosure/core.hpp"

#include <vector>

namespace enclosure {

struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;
};

// n-point Gauss-Legendre rule on [-1, 1]; cached, safe to call concurrently.
const Rule1D& gauss_legendre(int n);

// Rule mapped to [a, b].
Rule1D gauss_legendre(int n, double a, double b);

// Directions on the unit sphere with weights summing to 4*pi.
struct SphereRule {
    std::vector<Vec3> dir;
    std::vector<double> w;
    std::size_t size() const { return dir.size(); }
};

// Degree-7 Lebedev rule.
SphereRule lebedev26();

// Gauss-Legendre in cos(theta) (n nodes) times 2n uniform azimuths, with the
// polar axis along `pole`. Exact for polynomials of degree 2n - 1.
SphereRule product_sphere_rule(int n, const Vec3& pole = Vec3::UnitZ());

// Any two unit vectors completing n to a right-handed orthonormal frame.
void complete_frame(const Vec3& n, Vec3& e1, Vec3& e2);

}  // namespace enclosure
