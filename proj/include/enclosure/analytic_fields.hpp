#pragma once

#include "enclosure/core.hpp"
#include "enclosure/quadrature.hpp"

#include <functional>

namespace enclosure {

struct BallSource {
    Vec3 p = Vec3::Zero();
    double eta = 1.0;
};

// x cosh x - sinh x; series below |x| = 1.
double varphi(double xi);
// varphi(xi) * exp(-xi), finite for any xi >= 0.
double varphi_scaled(double xi);

// Free modified-Helmholtz field of the ball datum: (tau^2 - Laplacian) v = chi_B.
double v_f(const BallSource& src, const Vec3& x, double tau);
// Exterior gradient.
Vec3 grad_v_f(const BallSource& src, const Vec3& x, double tau);

using Field3 = std::function<double(const Vec3&)>;

struct MeanValueOptions {
    int start_n = 8;       // product rule size on the first pass
    int max_n = 512;
    double rel_tol = 1e-11;  // stop doubling when successive passes agree
    Vec3 pole = Vec3::UnitZ();
};

// tau / (4 pi r sinh(tau r)) times the surface integral of psi over |z - x| = r.
double mean_value_sphere(const Field3& psi, const Vec3& x, double r, double tau,
                         const MeanValueOptions& opt = {});
// tau^3 / (4 pi varphi(tau r)) times the integral of psi over |z - x| < r.
double mean_value_ball(const Field3& psi, const Vec3& x, double r, double tau,
                       const MeanValueOptions& opt = {});

// Plain surface and volume integrals with fixed rules (26-point Lebedev
// directions when n == 0).
double sphere_integral(const Field3& f, const Vec3& x, double r, int n, const Vec3& pole = Vec3::UnitZ());
double ball_integral(const Field3& f, const Vec3& x, double r, int n_radial, int n_sphere,
                     const Vec3& pole = Vec3::UnitZ());

}  // namespace enclosure
