#pragma once

// Obstacle surfaces, first reflectors and local graph charts.
//
// Curvature convention: the shape operator at q is the Hessian of the height
// function h of the tangent-frame chart x(s) = q + s1 e1 + s2 e2 + h(s) nu,
// nu pointing out of the obstacle. With it det(I/d - hess h) equals the
// determinant of the phase Hessian exactly, and a convex body has NEGATIVE
// principal curvatures (unit sphere: k1 = k2 = -1, K = 1, H = -1).

#include "enclosure/core.hpp"

#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace enclosure {

struct HeightJet {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
};

using HeightFunction = std::function<HeightJet(const Vec2&)>;

struct GraphPatch {
    Vec3 q = Vec3::Zero();
    Vec3 e1 = Vec3::UnitX();
    Vec3 e2 = Vec3::UnitY();
    Vec3 nu = Vec3::UnitZ();
    double r_q = 1.0;
    Mat2 hess = Mat2::Zero();
    Tensor3 h3;
    Tensor4 h4;
    // Full height evaluator on |s| < r_q. Empty means the quartic Taylor
    // polynomial of the stored tensors.
    HeightFunction height;

    HeightJet jet(const Vec2& s) const;
    double h(const Vec2& s) const { return jet(s).value; }
    Vec3 embed(const Vec2& s) const;
    Vec2 local_coords(const Vec3& x) const;  // tangential coordinates of x
    // Throws InvalidArgument when a chart invariant fails.
    void validate(double tol = 1e-10) const;
};

// Quartic Taylor chart; the frame is completed from nu when e1 is not given.
GraphPatch make_taylor_patch(const Vec3& q, const Vec3& nu, double r_q, const Mat2& hess,
                             const Tensor3& h3 = {}, const Tensor4& h4 = {});

// Exact chart of a sphere of radius rho at the boundary point q with outward nu.
GraphPatch sphere_chart(double rho, const Vec3& q = Vec3::Zero(), const Vec3& nu = Vec3::UnitZ(),
                        double r_q = -1.0);

struct Sphere {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
};

// Axis-aligned ellipsoid sum (x_i - c_i)^2 / a_i^2 = 1.
struct Ellipsoid {
    Vec3 center = Vec3::Zero();
    Vec3 semi_axes = Vec3::Ones();
};

using Component = std::variant<Sphere, Ellipsoid, GraphPatch>;

enum class Regularity { C3, C5 };

struct Projection {
    Vec3 point = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    double signed_distance = 0.0;
    int component = -1;
    double runner_up = 0.0;  // |distance| to the next closest component
};

struct Obstacle {
    std::vector<Component> components;
    Regularity regularity = Regularity::C5;
    double tube_radius = 0.0;  // 2 delta_0; <= 0 selects the curvature default
    // Optional global signed distance for patch assemblies.
    std::function<double(const Vec3&)> signed_distance_override;

    bool empty() const { return components.empty(); }
    bool closed() const;  // every component bounds a solid
    double signed_distance(const Vec3& x) const;
    Projection project(const Vec3& x) const;
    double tube() const;
    // Axis-aligned bounding box of all components.
    void bounds(Vec3& lo, Vec3& hi) const;
    Obstacle translated(const Vec3& shift) const;
};

// Nearest point on a single component, with outward normal.
Projection project_component(const Component& c, const Vec3& x);

struct Reflector {
    Vec3 q = Vec3::Zero();
    double d = 0.0;
    GraphPatch patch;
    double det_gap = 0.0;
    double K = 0.0;
    double H = 0.0;
    Mat2 Bmat = Mat2::Zero();
    int component = -1;
};

std::vector<Reflector> first_reflector(const Obstacle& obstacle, const Vec3& p, double tol = 1e-6);

struct Curvatures {
    double k1, k2, K, H;
};
Curvatures curvatures(const GraphPatch& patch);

double det_gap(const GraphPatch& patch, double d);

struct PhaseDerivatives {
    Mat2 hess;
    Tensor3 third;
    Tensor4 fourth;
};
PhaseDerivatives phase_derivatives(const GraphPatch& patch, double d);

// Distance |x(s) - p| with p = q + d nu.
double psi(const GraphPatch& patch, double d, const Vec2& s);
// psi(0) - psi(s), evaluated without cancellation.
double phase(const GraphPatch& patch, double d, const Vec2& s);

Vec3 reflect_point(const Obstacle& obstacle, const Vec3& x);

// Contractions used by the second-order coefficient.
double h3_contraction(const Tensor3& t, const Mat2& B);  // t t (B B B / 4 + B B B / 6)
double h4_contraction(const Tensor4& t, const Mat2& B);  // t_pqrs B_pr B_qs

// The printed coefficient, or the one re-derived from the fourth-order phase
// closed form (they differ whenever the chart is curved).
enum class CForm { Printed, Corrected };

double C_coefficient(const Reflector& reflector, double beta_q, CForm form = CForm::Corrected);

// Sum over reflectors of det_gap^{-1/2} and of C / sqrt(det_gap).
double A_sum(const std::vector<Reflector>& reflectors);
double B_sum(const std::vector<Reflector>& reflectors, const std::vector<double>& beta,
             CForm form = CForm::Corrected);

Reflector make_reflector(const GraphPatch& patch, double d, double tol = 1e-6);

}  // namespace enclosure
