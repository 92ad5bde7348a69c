#include "enclosure/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace enclosure {

namespace {

Rule1D compute_gauss_legendre(int n) {
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = x;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = r.w[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "gauss_legendre needs n >= 1");
    static std::mutex mtx;
    static std::map<int, std::unique_ptr<Rule1D>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<Rule1D>(compute_gauss_legendre(n))).first;
    return *it->second;
}

Rule1D gauss_legendre(int n, double a, double b) {
    Rule1D r = gauss_legendre(n);
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        r.x[i] = c + h * r.x[i];
        r.w[i] *= h;
    }
    return r;
}

void complete_frame(const Vec3& n, Vec3& e1, Vec3& e2) {
    Vec3 a = std::abs(n.x()) < 0.6 ? Vec3::UnitX() : (std::abs(n.y()) < 0.6 ? Vec3::UnitY() : Vec3::UnitZ());
    e1 = a.cross(n).normalized();
    e2 = n.cross(e1);
}

SphereRule lebedev26() {
    SphereRule s;
    const double a1 = 4.0 * kPi / 21.0, a2 = 4.0 * kPi * 4.0 / 105.0, a3 = 4.0 * kPi * 9.0 / 280.0;
    for (int k = 0; k < 3; ++k)
        for (double sg : {-1.0, 1.0}) {
            Vec3 v = Vec3::Zero();
            v[k] = sg;
            s.dir.push_back(v);
            s.w.push_back(a1);
        }
    const double r2 = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < 3; ++k)
        for (double s1 : {-1.0, 1.0})
            for (double s2 : {-1.0, 1.0}) {
                Vec3 v = Vec3::Zero();
                v[k] = s1 * r2;
                v[(k + 1) % 3] = s2 * r2;
                s.dir.push_back(v);
                s.w.push_back(a2);
            }
    const double r3 = 1.0 / std::sqrt(3.0);
    for (double s1 : {-1.0, 1.0})
        for (double s2 : {-1.0, 1.0})
            for (double s3 : {-1.0, 1.0}) {
                s.dir.emplace_back(s1 * r3, s2 * r3, s3 * r3);
                s.w.push_back(a3);
            }
    return s;
}

SphereRule product_sphere_rule(int n, const Vec3& pole) {
    Vec3 ez = pole.normalized(), ex, ey;
    complete_frame(ez, ex, ey);
    const Rule1D& g = gauss_legendre(n);
    const int m = 2 * n;
    SphereRule s;
    s.dir.reserve(static_cast<std::size_t>(n) * m);
    s.w.reserve(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        double ct = g.x[i], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int j = 0; j < m; ++j) {
            double ph = 2.0 * kPi * (j + 0.5) / m;
            s.dir.push_back(ct * ez + st * (std::cos(ph) * ex + std::sin(ph) * ey));
            s.w.push_back(g.w[i] * 2.0 * kPi / m);
        }
    }
    return s;
}

}  // namespace enclosure
