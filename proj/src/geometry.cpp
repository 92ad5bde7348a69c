#include "enclosure/geometry.hpp"

#include "enclosure/numdiff.hpp"
#include "enclosure/quadrature.hpp"

#include <algorithm>
#include <limits>

namespace enclosure {

namespace {

double dot3(const Tensor3& t, const Vec2& s, int i) {
    double v = 0.0;
    for (int q = 0; q < 2; ++q)
        for (int r = 0; r < 2; ++r) v += t(i, q, r) * s[q] * s[r];
    return v;
}

double dot4(const Tensor4& t, const Vec2& s, int i) {
    double v = 0.0;
    for (int q = 0; q < 2; ++q)
        for (int r = 0; r < 2; ++r)
            for (int u = 0; u < 2; ++u) v += t(i, q, r, u) * s[q] * s[r] * s[u];
    return v;
}

using Implicit = std::function<double(const Vec3&, Vec3&)>;

// Chart whose height comes from intersecting the normal line with F = 0.
GraphPatch numeric_chart(const Implicit& F, const Vec3& q, const Vec3& nu, double r_q) {
    GraphPatch g;
    g.q = q;
    g.nu = nu.normalized();
    complete_frame(g.nu, g.e1, g.e2);
    g.r_q = r_q;
    const Vec3 e1 = g.e1, e2 = g.e2, n = g.nu;
    g.height = [F, q, e1, e2, n](const Vec2& s) {
        Vec3 base = q + s[0] * e1 + s[1] * e2;
        double t = 0.0;
        Vec3 grad;
        for (int it = 0; it < 60; ++it) {
            double f = F(base + t * n, grad);
            double dt = f / grad.dot(n);
            t -= dt;
            if (std::abs(dt) <= 1e-17 * (1.0 + std::abs(t))) break;
        }
        F(base + t * n, grad);
        HeightJet j;
        j.value = t;
        double gn = grad.dot(n);
        j.grad = Vec2(-grad.dot(e1) / gn, -grad.dot(e2) / gn);
        return j;
    };
    numdiff::Options opt;
    opt.step = 0.1 * std::min(1.0, r_q);
    opt.levels = 4;
    auto hf = [&g](const Vec2& s) { return g.height(s).value; };
    g.hess = numdiff::hessian(hf, Vec2::Zero(), opt);
    g.h3 = numdiff::third(hf, Vec2::Zero(), opt);
    g.h4 = numdiff::fourth(hf, Vec2::Zero(), opt);
    return g;
}

Implicit implicit_of(const Component& c) {
    if (auto* s = std::get_if<Sphere>(&c)) {
        Sphere sp = *s;
        return [sp](const Vec3& x, Vec3& g) {
            Vec3 v = x - sp.center;
            double r = v.norm();
            g = v / r;
            return r - sp.radius;
        };
    }
    if (auto* e = std::get_if<Ellipsoid>(&c)) {
        Ellipsoid el = *e;
        return [el](const Vec3& x, Vec3& g) {
            Vec3 y = x - el.center;
            double f = -1.0;
            for (int i = 0; i < 3; ++i) {
                double a2 = el.semi_axes[i] * el.semi_axes[i];
                f += y[i] * y[i] / a2;
                g[i] = 2.0 * y[i] / a2;
            }
            return 0.5 * f;
        };
    }
    GraphPatch gp = std::get<GraphPatch>(c);
    return [gp](const Vec3& x, Vec3& g) {
        Vec2 s = gp.local_coords(x);
        HeightJet j = gp.jet(s);
        g = gp.nu - j.grad[0] * gp.e1 - j.grad[1] * gp.e2;
        return (x - gp.q).dot(gp.nu) - j.value;
    };
}

Projection project_ellipsoid(const Ellipsoid& el, const Vec3& x) {
    Vec3 a = el.semi_axes;
    Vec3 y = x - el.center;
    double level = 0.0;
    for (int i = 0; i < 3; ++i) level += y[i] * y[i] / (a[i] * a[i]);
    int kmin = 0;
    for (int i = 1; i < 3; ++i)
        if (a[i] < a[kmin]) kmin = i;
    if (level < 1.0 && std::abs(y[kmin]) < 1e-12 * a[kmin]) y[kmin] = 1e-12 * a[kmin];
    auto F = [&](double t) {
        double s = -1.0;
        for (int i = 0; i < 3; ++i) {
            double v = a[i] * y[i] / (t + a[i] * a[i]);
            s += v * v;
        }
        return s;
    };
    double lo, hi;
    if (level >= 1.0) {
        lo = 0.0;
        hi = std::sqrt(a[0] * a[0] * y[0] * y[0] + a[1] * a[1] * y[1] * y[1] + a[2] * a[2] * y[2] * y[2]) + 1e-300;
    } else {
        lo = -a[kmin] * a[kmin];
        hi = 0.0;
    }
    for (int it = 0; it < 300; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (F(mid) > 0.0 ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    Vec3 p, n;
    for (int i = 0; i < 3; ++i) {
        double a2 = a[i] * a[i];
        p[i] = a2 * y[i] / (t + a2);
        n[i] = p[i] / a2;
    }
    Projection pr;
    pr.point = el.center + p;
    pr.normal = n.normalized();
    double dist = (y - p).norm();
    pr.signed_distance = level >= 1.0 ? dist : -dist;
    return pr;
}

struct PatchMin {
    Vec2 s;
    double dist;
};

// Local minima of |x(s) - x| over the chart disc, by coarse sampling and Newton.
std::vector<PatchMin> patch_minima(const GraphPatch& gp, const Vec3& x) {
    const double R = gp.r_q * 0.999;
    auto dist2 = [&](const Vec2& s) { return (gp.embed(s) - x).squaredNorm(); };
    const int nr = 12, na = 32;
    std::vector<std::pair<double, Vec2>> samples;
    samples.push_back({dist2(Vec2::Zero()), Vec2::Zero()});
    for (int i = 1; i <= nr; ++i)
        for (int j = 0; j < na; ++j) {
            double r = R * i / nr, a = 2.0 * kPi * j / na;
            Vec2 s(r * std::cos(a), r * std::sin(a));
            samples.push_back({dist2(s), s});
        }
    std::sort(samples.begin(), samples.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    std::vector<PatchMin> out;
    const double fd = 1e-5 * std::max(gp.r_q, 1e-3);
    for (std::size_t k = 0; k < std::min<std::size_t>(6, samples.size()); ++k) {
        Vec2 s = samples[k].second;
        for (int it = 0; it < 60; ++it) {
            HeightJet j = gp.jet(s);
            Vec3 X = gp.q + s[0] * gp.e1 + s[1] * gp.e2 + j.value * gp.nu;
            Vec3 r = X - x;
            Vec3 t1 = gp.e1 + j.grad[0] * gp.nu, t2 = gp.e2 + j.grad[1] * gp.nu;
            Vec2 g(r.dot(t1), r.dot(t2));
            Mat2 hh;
            for (int c = 0; c < 2; ++c) {
                Vec2 ds = Vec2::Zero();
                ds[c] = fd;
                Vec2 gp_ = gp.jet(s + ds).grad, gm = gp.jet(s - ds).grad;
                hh.col(c) = (gp_ - gm) / (2.0 * fd);
            }
            hh = 0.5 * (hh + hh.transpose()).eval();
            Mat2 Hm;
            Hm << t1.dot(t1), t1.dot(t2), t2.dot(t1), t2.dot(t2);
            Hm += r.dot(gp.nu) * hh;
            Vec2 step = -Hm.ldlt().solve(g);
            if (!step.allFinite()) break;
            Vec2 ns = s + step;
            double shrink = 1.0;
            while (ns.norm() >= R && shrink > 1e-6) {
                shrink *= 0.5;
                ns = s + shrink * step;
            }
            if (ns.norm() >= R) break;
            s = ns;
            if (step.norm() * shrink < 1e-14 * (1.0 + gp.r_q)) break;
        }
        double dd = std::sqrt(dist2(s));
        bool dup = false;
        for (const auto& m : out)
            if ((m.s - s).norm() < 1e-8 * (1.0 + gp.r_q)) dup = true;
        if (!dup) out.push_back({s, dd});
    }
    std::sort(out.begin(), out.end(), [](const PatchMin& l, const PatchMin& r) { return l.dist < r.dist; });
    return out;
}

Projection project_patch(const GraphPatch& gp, const Vec3& x) {
    auto mins = patch_minima(gp, x);
    const PatchMin& m = mins.front();
    HeightJet j = gp.jet(m.s);
    Projection pr;
    pr.point = gp.q + m.s[0] * gp.e1 + m.s[1] * gp.e2 + j.value * gp.nu;
    pr.normal = (gp.nu - j.grad[0] * gp.e1 - j.grad[1] * gp.e2).normalized();
    double sd = (x - pr.point).norm();
    pr.signed_distance = (x - pr.point).dot(pr.normal) >= 0.0 ? sd : -sd;
    return pr;
}

double component_tube(const Component& c) {
    if (auto* s = std::get_if<Sphere>(&c)) return 0.5 * s->radius;
    if (auto* e = std::get_if<Ellipsoid>(&c)) {
        double amin = e->semi_axes.minCoeff(), amax = e->semi_axes.maxCoeff();
        return 0.5 * amin * amin / amax;
    }
    const auto& gp = std::get<GraphPatch>(c);
    double kmax = gp.hess.cwiseAbs().maxCoeff() * 2.0;
    double t = 0.5 * gp.r_q;
    if (kmax > 0.0) t = std::min(t, 0.5 / kmax);
    return t;
}

GraphPatch chart_at(const Component& c, const Vec3& q, const Vec3& nu) {
    if (auto* s = std::get_if<Sphere>(&c)) return sphere_chart(s->radius, q, nu);
    if (auto* e = std::get_if<Ellipsoid>(&c)) {
        double amin = e->semi_axes.minCoeff(), amax = e->semi_axes.maxCoeff();
        return numeric_chart(implicit_of(c), q, nu, 0.5 * amin * amin / amax);
    }
    const auto& gp = std::get<GraphPatch>(c);
    Vec2 sq = gp.local_coords(q);
    if (sq.norm() < 1e-9 * (1.0 + gp.r_q) && (nu - gp.nu).norm() < 1e-9) return gp;
    double r = std::max(gp.r_q - sq.norm(), 1e-3 * gp.r_q);
    return numeric_chart(implicit_of(c), q, nu, r);
}

}  // namespace

HeightJet GraphPatch::jet(const Vec2& s) const {
    if (height) return height(s);
    HeightJet j;
    Vec2 hs = hess * s;
    j.value = 0.5 * s.dot(hs);
    for (int i = 0; i < 2; ++i) {
        double t3 = dot3(h3, s, i), t4 = dot4(h4, s, i);
        j.value += s[i] * (t3 / 6.0 + t4 / 24.0);
        j.grad[i] = hs[i] + 0.5 * t3 + t4 / 6.0;
    }
    return j;
}

Vec3 GraphPatch::embed(const Vec2& s) const { return q + s[0] * e1 + s[1] * e2 + h(s) * nu; }

Vec2 GraphPatch::local_coords(const Vec3& x) const { return {(x - q).dot(e1), (x - q).dot(e2)}; }

void GraphPatch::validate(double tol) const {
    auto fail = [](const char* m) { throw Error(ErrorCode::InvalidArgument, m); };
    if (!(r_q > 0.0)) fail("chart radius must be positive");
    if (std::abs(e1.norm() - 1.0) > tol || std::abs(e2.norm() - 1.0) > tol || std::abs(nu.norm() - 1.0) > tol ||
        std::abs(e1.dot(e2)) > tol || std::abs(e1.dot(nu)) > tol || std::abs(e2.dot(nu)) > tol)
        fail("chart frame is not orthonormal");
    if ((e1.cross(e2) - nu).norm() > tol) fail("chart frame is not right-handed (e1 x e2 != nu)");
    HeightJet j0 = jet(Vec2::Zero());
    if (std::abs(j0.value) > tol || j0.grad.norm() > tol) fail("chart is not tangent at q");
    if (std::abs(hess(0, 1) - hess(1, 0)) > tol) fail("Hessian is not symmetric");
    double s3 = 1.0 + h3.max_abs(), s4 = 1.0 + h4.max_abs();
    Tensor3 t3 = h3.symmetrized();
    Tensor4 t4 = h4.symmetrized();
    for (int i = 0; i < 8; ++i)
        if (std::abs(t3.a[i] - h3.a[i]) > tol * s3) fail("third tensor is not symmetric");
    for (int i = 0; i < 16; ++i)
        if (std::abs(t4.a[i] - h4.a[i]) > tol * s4) fail("fourth tensor is not symmetric");
}

GraphPatch make_taylor_patch(const Vec3& q, const Vec3& nu, double r_q, const Mat2& hess, const Tensor3& h3,
                             const Tensor4& h4) {
    GraphPatch g;
    g.q = q;
    g.nu = nu.normalized();
    complete_frame(g.nu, g.e1, g.e2);
    g.r_q = r_q;
    g.hess = hess;
    g.h3 = h3;
    g.h4 = h4;
    return g;
}

GraphPatch sphere_chart(double rho, const Vec3& q, const Vec3& nu, double r_q) {
    GraphPatch g;
    g.q = q;
    g.nu = nu.normalized();
    complete_frame(g.nu, g.e1, g.e2);
    g.r_q = r_q > 0.0 ? r_q : 0.9 * rho;
    g.hess = -Mat2::Identity() / rho;
    double r3 = rho * rho * rho;
    g.h4 = tensor4_from_components({-3.0 / r3, 0.0, -1.0 / r3, 0.0, -3.0 / r3});
    g.height = [rho](const Vec2& s) {
        double s2 = s.squaredNorm();
        double root = std::sqrt(rho * rho - s2);
        HeightJet j;
        j.value = -s2 / (rho + root);
        j.grad = -s / root;
        return j;
    };
    return g;
}

Projection project_component(const Component& c, const Vec3& x) {
    if (auto* s = std::get_if<Sphere>(&c)) {
        Vec3 v = x - s->center;
        double r = v.norm();
        Projection pr;
        pr.normal = r > 0.0 ? Vec3(v / r) : Vec3::UnitZ();
        pr.point = s->center + s->radius * pr.normal;
        pr.signed_distance = r - s->radius;
        return pr;
    }
    if (auto* e = std::get_if<Ellipsoid>(&c)) return project_ellipsoid(*e, x);
    return project_patch(std::get<GraphPatch>(c), x);
}

bool Obstacle::closed() const {
    for (const auto& c : components)
        if (std::holds_alternative<GraphPatch>(c)) return false;
    return !components.empty();
}

double Obstacle::signed_distance(const Vec3& x) const {
    if (signed_distance_override) return signed_distance_override(x);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : components) {
        if (auto* s = std::get_if<Sphere>(&c)) {
            best = std::min(best, (x - s->center).norm() - s->radius);
            continue;
        }
        best = std::min(best, project_component(c, x).signed_distance);
    }
    return best;
}

Projection Obstacle::project(const Vec3& x) const {
    if (components.empty()) throw Error(ErrorCode::EmptyObstacle, "obstacle has no components");
    Projection best;
    double bd = std::numeric_limits<double>::infinity(), second = bd;
    for (std::size_t i = 0; i < components.size(); ++i) {
        Projection p = project_component(components[i], x);
        double a = std::abs(p.signed_distance);
        if (a < bd) {
            second = bd;
            bd = a;
            best = p;
            best.component = static_cast<int>(i);
        } else if (a < second) {
            second = a;
        }
    }
    best.runner_up = second;
    return best;
}

double Obstacle::tube() const {
    if (tube_radius > 0.0) return tube_radius;
    double t = std::numeric_limits<double>::infinity();
    for (const auto& c : components) t = std::min(t, component_tube(c));
    return t;
}

void Obstacle::bounds(Vec3& lo, Vec3& hi) const {
    lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    hi = -lo;
    for (const auto& c : components) {
        if (auto* s = std::get_if<Sphere>(&c)) {
            lo = lo.cwiseMin(s->center - Vec3::Constant(s->radius));
            hi = hi.cwiseMax(s->center + Vec3::Constant(s->radius));
        } else if (auto* e = std::get_if<Ellipsoid>(&c)) {
            lo = lo.cwiseMin(e->center - e->semi_axes);
            hi = hi.cwiseMax(e->center + e->semi_axes);
        } else {
            const auto& gp = std::get<GraphPatch>(c);
            for (int i = 0; i <= 8; ++i)
                for (int j = 0; j < 16; ++j) {
                    double r = gp.r_q * 0.999 * i / 8.0, a = 2.0 * kPi * j / 16.0;
                    Vec3 x = gp.embed(Vec2(r * std::cos(a), r * std::sin(a)));
                    lo = lo.cwiseMin(x);
                    hi = hi.cwiseMax(x);
                }
        }
    }
}

Obstacle Obstacle::translated(const Vec3& shift) const {
    Obstacle o = *this;
    for (auto& c : o.components) {
        if (auto* s = std::get_if<Sphere>(&c)) s->center += shift;
        else if (auto* e = std::get_if<Ellipsoid>(&c)) e->center += shift;
        else std::get<GraphPatch>(c).q += shift;
    }
    if (signed_distance_override) {
        auto f = signed_distance_override;
        o.signed_distance_override = [f, shift](const Vec3& x) { return f(x - shift); };
    }
    return o;
}

Curvatures curvatures(const GraphPatch& patch) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(patch.hess);
    Curvatures c;
    c.k1 = es.eigenvalues()[0];
    c.k2 = es.eigenvalues()[1];
    c.K = patch.hess.determinant();
    c.H = 0.5 * patch.hess.trace();
    return c;
}

double det_gap(const GraphPatch& patch, double d) {
    if (!(d > 0.0)) throw Error(ErrorCode::NonPositiveDistance, "distance must be positive");
    double lam = 1.0 / d;
    double K = patch.hess.determinant(), H = 0.5 * patch.hess.trace();
    return lam * lam - 2.0 * H * lam + K;
}

PhaseDerivatives phase_derivatives(const GraphPatch& patch, double d) {
    if (!(d > 0.0)) throw Error(ErrorCode::NonPositiveDistance, "distance must be positive");
    PhaseDerivatives pd;
    pd.hess = -(Mat2::Identity() / d - patch.hess);
    pd.third = patch.h3;
    const Mat2& h = patch.hess;
    auto dl = [](int i, int j) { return i == j ? 1.0 : 0.0; };
    const double d2 = d * d, d3 = d2 * d;
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s) {
                    double v = (dl(p, q) * dl(r, s) + dl(q, r) * dl(p, s) + dl(q, s) * dl(p, r)) / d3;
                    v -= (dl(p, q) * h(r, s) + dl(r, s) * h(p, q) + dl(q, r) * h(p, s) + dl(p, s) * h(q, r) +
                          dl(q, s) * h(p, r) + dl(p, r) * h(q, s)) /
                         d2;
                    pd.fourth(p, q, r, s) = v + patch.h4(p, q, r, s);
                }
    return pd;
}

double psi(const GraphPatch& patch, double d, const Vec2& s) {
    if (!(s.norm() < patch.r_q)) throw Error(ErrorCode::OutsideChart, "point outside chart disc");
    double h = patch.h(s);
    return std::sqrt(s.squaredNorm() + (d - h) * (d - h));
}

double phase(const GraphPatch& patch, double d, const Vec2& s) {
    if (!(s.norm() < patch.r_q)) throw Error(ErrorCode::OutsideChart, "point outside chart disc");
    double h = patch.h(s);
    double ps = std::sqrt(s.squaredNorm() + (d - h) * (d - h));
    return (2.0 * d * h - h * h - s.squaredNorm()) / (d + ps);
}

Vec3 reflect_point(const Obstacle& obstacle, const Vec3& x) {
    Projection pr = obstacle.project(x);
    double a = std::abs(pr.signed_distance);
    if (!(a < obstacle.tube()))
        throw Error(ErrorCode::AmbiguousProjection, "point outside the reflection tube");
    if (pr.runner_up - a < 1e-9 * (1.0 + a))
        throw Error(ErrorCode::AmbiguousProjection, "nearest boundary point is not unique");
    return 2.0 * pr.point - x;
}

double h3_contraction(const Tensor3& t, const Mat2& B) {
    double s = 0.0;
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
            for (int r = 0; r < 2; ++r)
                for (int ss = 0; ss < 2; ++ss)
                    for (int tt = 0; tt < 2; ++tt)
                        for (int u = 0; u < 2; ++u)
                            s += t(p, q, r) * t(ss, tt, u) *
                                 (0.25 * B(p, ss) * B(q, r) * B(tt, u) + B(p, ss) * B(q, tt) * B(r, u) / 6.0);
    return s;
}

double h4_contraction(const Tensor4& t, const Mat2& B) {
    double s = 0.0;
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
            for (int r = 0; r < 2; ++r)
                for (int u = 0; u < 2; ++u) s += t(p, q, r, u) * B(p, r) * B(q, u);
    return s;
}

Reflector make_reflector(const GraphPatch& patch, double d, double tol) {
    Reflector R;
    R.q = patch.q;
    R.d = d;
    R.patch = patch;
    R.det_gap = det_gap(patch, d);
    double lam = 1.0 / d;
    if (!(R.det_gap > tol * lam * lam))
        throw Error(ErrorCode::DegenerateReflector, "det(I/d - hess h) is not positive");
    Curvatures c = curvatures(patch);
    R.K = c.K;
    R.H = c.H;
    R.Bmat = -(Mat2::Identity() / d - patch.hess).inverse();
    return R;
}

double C_coefficient(const Reflector& R, double beta_q, CForm form) {
    const double d = R.d, det = R.det_gap, H = R.H, K = R.K;
    if (!(det > 0.0)) throw Error(ErrorCode::DegenerateReflector, "det gap must be positive");
    const double d2 = d * d, d3 = d2 * d, d5 = d3 * d2;
    double middle = form == CForm::Printed ? (11.0 - 12.0 * d * H) / (8.0 * d5 * det)
                                           : (4.0 - 6.0 * d * H - 3.0 * (H * H - K) / det) / (4.0 * d5 * det);
    return -1.0 / d3 + middle - h3_contraction(R.patch.h3, R.Bmat) / (4.0 * d2) +
           h4_contraction(R.patch.h4, R.Bmat) / (16.0 * d2) - beta_q / d2;
}

double A_sum(const std::vector<Reflector>& reflectors) {
    double a = 0.0;
    for (const auto& r : reflectors) a += 1.0 / std::sqrt(r.det_gap);
    return a;
}

double B_sum(const std::vector<Reflector>& reflectors, const std::vector<double>& beta, CForm form) {
    double b = 0.0;
    for (std::size_t i = 0; i < reflectors.size(); ++i) {
        double bq = i < beta.size() ? beta[i] : (beta.empty() ? 0.0 : beta.back());
        b += C_coefficient(reflectors[i], bq, form) / std::sqrt(reflectors[i].det_gap);
    }
    return b;
}

std::vector<Reflector> first_reflector(const Obstacle& obstacle, const Vec3& p, double tol) {
    if (obstacle.empty()) throw Error(ErrorCode::EmptyObstacle, "obstacle has no components");
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
    if (obstacle.signed_distance(p) <= 0.0)
        throw Error(ErrorCode::PStrictlyInside, "p lies in the closed obstacle");

    struct Cand {
        Vec3 q, n;
        double dist;
        int comp;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < obstacle.components.size(); ++i) {
        const Component& c = obstacle.components[i];
        if (auto* gp = std::get_if<GraphPatch>(&c)) {
            for (const auto& m : patch_minima(*gp, p)) {
                HeightJet j = gp->jet(m.s);
                Vec3 q = gp->q + m.s[0] * gp->e1 + m.s[1] * gp->e2 + j.value * gp->nu;
                Vec3 n = (gp->nu - j.grad[0] * gp->e1 - j.grad[1] * gp->e2).normalized();
                cands.push_back({q, n, m.dist, static_cast<int>(i)});
            }
        } else {
            Projection pr = project_component(c, p);
            cands.push_back({pr.point, pr.normal, pr.signed_distance, static_cast<int>(i)});
        }
    }
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) dmin = std::min(dmin, c.dist);
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.dist < b.dist; });

    std::vector<Reflector> out;
    std::vector<Vec3> kept;
    for (const auto& c : cands) {
        if (c.dist > dmin * (1.0 + tol)) break;
        bool dup = false;
        for (const auto& k : kept)
            if ((k - c.q).norm() < 1e-4 * dmin) dup = true;
        if (dup) continue;
        kept.push_back(c.q);
        Vec3 nu = (p - c.q).normalized();
        GraphPatch chart = chart_at(obstacle.components[c.comp], c.q, nu);
        Reflector R = make_reflector(chart, c.dist, tol);
        R.component = c.comp;
        out.push_back(R);
    }
    return out;
}

}  // namespace enclosure
