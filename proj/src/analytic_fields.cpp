#include "enclosure/analytic_fields.hpp"

namespace enclosure {

namespace {

double varphi_series(double xi) {
    // sum_k 2k xi^(2k+1) / (2k+1)!
    double x2 = xi * xi, term = xi, sum = 0.0;
    for (int k = 1; k < 30; ++k) {
        term *= x2 / ((2.0 * k) * (2.0 * k + 1.0));
        double add = 2.0 * k * term;
        sum += add;
        if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// sinh(x)/x
double sinhc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0;
    return std::sinh(x) / x;
}

void check_tau(double tau) {
    if (!(tau > 0.0)) throw Error(ErrorCode::NonPositiveTau, "tau must be positive");
}

}  // namespace

double varphi(double xi) {
    if (std::abs(xi) < 1.0) return varphi_series(xi);
    return xi * std::cosh(xi) - std::sinh(xi);
}

double varphi_scaled(double xi) {
    if (std::abs(xi) < 1.0) return varphi_series(xi) * std::exp(-xi);
    return 0.5 * (xi - 1.0) + 0.5 * (xi + 1.0) * std::exp(-2.0 * xi);
}

double v_f(const BallSource& src, const Vec3& x, double tau) {
    check_tau(tau);
    const double r = (x - src.p).norm(), eta = src.eta;
    const double t3 = tau * tau * tau;
    if (r >= eta) return varphi_scaled(tau * eta) * std::exp(-tau * (r - eta)) / (t3 * r);
    // (1 + tau eta) e^{-tau eta} sinh(tau r) / (tau^3 r)
    double decay;
    if (tau * r < 1e-4) {
        decay = (1.0 + tau * eta) * std::exp(-tau * eta) * sinhc(tau * r) / (tau * tau);
    } else {
        double sh = 0.5 * (std::exp(tau * (r - eta)) - std::exp(-tau * (r + eta)));
        decay = (1.0 + tau * eta) * sh / (t3 * r);
    }
    return 1.0 / (tau * tau) - decay;
}

Vec3 grad_v_f(const BallSource& src, const Vec3& x, double tau) {
    check_tau(tau);
    Vec3 v = src.p - x;
    const double r = v.norm();
    if (!(r > src.eta)) throw Error(ErrorCode::InsideSource, "gradient formula is exterior only");
    double mag = varphi_scaled(tau * src.eta) / (tau * tau) * (1.0 + 1.0 / (tau * r)) *
                 std::exp(-tau * (r - src.eta)) / r;
    return mag * v / r;
}

double sphere_integral(const Field3& f, const Vec3& x, double r, int n, const Vec3& pole) {
    SphereRule rule = n <= 0 ? lebedev26() : product_sphere_rule(n, pole);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.w[i] * f(x + r * rule.dir[i]);
    return s * r * r;
}

double ball_integral(const Field3& f, const Vec3& x, double r, int n_radial, int n_sphere, const Vec3& pole) {
    Rule1D g = gauss_legendre(n_radial, 0.0, r);
    SphereRule rule = n_sphere <= 0 ? lebedev26() : product_sphere_rule(n_sphere, pole);
    double s = 0.0;
    for (int k = 0; k < n_radial; ++k) {
        double shell = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) shell += rule.w[i] * f(x + g.x[k] * rule.dir[i]);
        s += g.w[k] * g.x[k] * g.x[k] * shell;
    }
    return s;
}

double mean_value_sphere(const Field3& psi, const Vec3& x, double r, double tau, const MeanValueOptions& opt) {
    check_tau(tau);
    if (r <= 0.0) return psi(x);
    // tau r / sinh(tau r) / (4 pi), folded into one factor
    const double factor = 1.0 / (4.0 * kPi * r * r * sinhc(tau * r));
    double prev = sphere_integral(psi, x, r, opt.start_n, opt.pole) * factor;
    for (int n = 2 * opt.start_n; n <= opt.max_n; n *= 2) {
        double cur = sphere_integral(psi, x, r, n, opt.pole) * factor;
        if (std::abs(cur - prev) <= opt.rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

double mean_value_ball(const Field3& psi, const Vec3& x, double r, double tau, const MeanValueOptions& opt) {
    check_tau(tau);
    // integral = 4 pi varphi(tau r) / tau^3 * psi(x)
    double scale = std::pow(tau, 3) / (4.0 * kPi * varphi(tau * r));
    double prev = ball_integral(psi, x, r, opt.start_n, opt.start_n, opt.pole);
    for (int n = 2 * opt.start_n; n <= opt.max_n; n *= 2) {
        double cur = ball_integral(psi, x, r, n, n, opt.pole);
        if (std::abs(cur - prev) <= opt.rel_tol * std::abs(cur)) return scale * cur;
        prev = cur;
    }
    return scale * prev;
}

}  // namespace enclosure
