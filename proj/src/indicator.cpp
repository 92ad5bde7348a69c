#include "enclosure/indicator.hpp"

#include "enclosure/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace enclosure {

std::string mode_name(SeriesMode m) {
    switch (m) {
        case SeriesMode::Volume: return "volume";
        case SeriesMode::Sphere: return "sphere";
        case SeriesMode::SphereReduced: return "sphere-reduced";
        case SeriesMode::JMode: return "j-mode";
    }
    return "volume";
}

SeriesMode parse_mode_name(const std::string& s) {
    if (s == "volume") return SeriesMode::Volume;
    if (s == "sphere") return SeriesMode::Sphere;
    if (s == "sphere-reduced") return SeriesMode::SphereReduced;
    if (s == "j-mode") return SeriesMode::JMode;
    throw Error(ErrorCode::SchemaError, "unknown series mode " + s);
}

double IndicatorSeries::value(std::size_t i) const {
    if (sign[i] == 0) return 0.0;
    return sign[i] * std::exp(log_abs[i]);
}

void IndicatorSeries::push(double t, double v) {
    tau.push_back(t);
    sign.push_back(v > 0 ? 1 : (v < 0 ? -1 : 0));
    log_abs.push_back(v == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(v)));
}

void IndicatorSeries::push(double t, const ExpScaled& v) {
    tau.push_back(t);
    sign.push_back(v.mantissa > 0 ? 1 : (v.mantissa < 0 ? -1 : 0));
    log_abs.push_back(v.mantissa == 0.0 ? -std::numeric_limits<double>::infinity() : v.log_abs());
}

void IndicatorSeries::validate() const {
    if (log_abs.size() != tau.size() || sign.size() != tau.size())
        throw Error(ErrorCode::InvalidArgument, "series columns differ in length");
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (!(tau[i] > 0.0) || !std::isfinite(tau[i]) || (i && !(tau[i] > tau[i - 1])))
            throw Error(ErrorCode::InvalidArgument, "tau must be positive and strictly increasing");
        if (std::isnan(log_abs[i]) || log_abs[i] == std::numeric_limits<double>::infinity())
            throw Error(ErrorCode::InvalidArgument, "non-finite indicator value");
    }
}

namespace {

// Integrals over [0, h] of e^{-tau s}(1 - s/h) and e^{-tau s} s/h, divided by h.
void hat_weights(double x, double& a, double& b) {
    if (x < 0.05) {
        // sum (-x)^k / (k+2)!  and  sum (k+1) (-x)^k / (k+2)!
        a = b = 0.0;
        double term = 0.5;
        for (int k = 0; k < 10; ++k) {
            a += term;
            b += (k + 1) * term;
            term *= -x / (k + 3);
        }
        return;
    }
    double em = std::expm1(-x), e = std::exp(-x);
    a = (x + em) / (x * x);
    b = (-em - x * e) / (x * x);
}

std::vector<double> level_weights(double dt, int steps, double tau) {
    double a, b;
    hat_weights(tau * dt, a, b);
    std::vector<double> W(steps + 1, 0.0);
    for (int n = 0; n < steps; ++n) {
        double e = std::exp(-tau * n * dt) * dt;
        W[n] += e * a;
        W[n + 1] += e * b;
    }
    return W;
}

double transformed_sum(const std::vector<double>& u, const std::vector<double>* ref, const std::vector<double>& w,
                       double dt, int steps, double tau) {
    std::size_t count = w.size();
    auto W = level_weights(dt, steps, tau);
    std::vector<double> acc(count, 0.0);
    for (int n = 0; n <= steps; ++n) {
        const double* un = u.data() + n * count;
        const double* rn = ref ? ref->data() + n * count : nullptr;
        for (std::size_t i = 0; i < count; ++i) acc[i] += W[n] * (rn ? un[i] - rn[i] : un[i]);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += w[i] * acc[i];
    return s;
}

}  // namespace

std::vector<double> laplace_transform(const std::vector<double>& u, std::size_t count, double dt, int steps,
                                      double tau) {
    if (u.size() != count * (steps + 1)) throw Error(ErrorCode::InvalidArgument, "recording block has wrong size");
    auto W = level_weights(dt, steps, tau);
    std::vector<double> out(count, 0.0);
    for (int n = 0; n <= steps; ++n)
        for (std::size_t i = 0; i < count; ++i) out[i] += W[n] * u[n * count + i];
    return out;
}

double indicator_volume(const WaveRecording& rec, double tau, Reference ref) {
    std::size_t count = rec.volume_nodes.size();
    if (!count || rec.volume_u.size() != count * rec.times())
        throw Error(ErrorCode::MissingVolumeSamples, "recording has no samples over B");
    if (!(tau > 0.0)) throw Error(ErrorCode::NonPositiveTau, "tau must be positive");
    if (ref == Reference::Twin && rec.volume_ref.size() == rec.volume_u.size())
        return transformed_sum(rec.volume_u, &rec.volume_ref, rec.volume_weights, rec.dt, rec.steps, tau);
    double s = transformed_sum(rec.volume_u, nullptr, rec.volume_weights, rec.dt, rec.steps, tau);
    for (std::size_t i = 0; i < count; ++i) s -= rec.volume_weights[i] * v_f(rec.source, rec.volume_nodes[i], tau);
    return s;
}

double indicator_sphere(const WaveRecording& rec, double tau, Reference ref) {
    std::size_t count = rec.sphere_nodes.size();
    if (!count || rec.sphere_u.size() != count * rec.times())
        throw Error(ErrorCode::MissingSphereSamples, "recording has no samples on the observation sphere");
    if (!(tau > 0.0)) throw Error(ErrorCode::NonPositiveTau, "tau must be positive");
    if (ref == Reference::Twin && rec.sphere_ref.size() == rec.sphere_u.size())
        return transformed_sum(rec.sphere_u, &rec.sphere_ref, rec.sphere_weights, rec.dt, rec.steps, tau);
    double s = transformed_sum(rec.sphere_u, nullptr, rec.sphere_weights, rec.dt, rec.steps, tau);
    for (std::size_t i = 0; i < count; ++i) s -= rec.sphere_weights[i] * v_f(rec.source, rec.sphere_nodes[i], tau);
    return s;
}

double log_reduce_factor(double tau, double R, double eta) {
    if (!(tau > 0.0) || !(R > eta) || !(eta > 0.0))
        throw Error(ErrorCode::InvalidArgument, "reduce_sphere needs tau > 0 and R > eta > 0");
    double xe = tau * eta, xr = tau * R;
    // log varphi(xe) - log(tau^2 R sinh(xr))
    double lv = std::log(varphi_scaled(xe)) + xe;
    double lsinh = xr + std::log(-std::expm1(-2.0 * xr)) - std::log(2.0);
    return lv - 2.0 * std::log(tau) - std::log(R) - lsinh;
}

double reduce_sphere(double I_sphere, double tau, double R, double eta) {
    return I_sphere * std::exp(log_reduce_factor(tau, R, eta));
}

namespace {

// Panel edges 0, w, 3w, 7w, ... clipped at len.
std::vector<double> graded_edges(double w, double len) {
    std::vector<double> e{0.0};
    double width = w;
    while (e.back() < len) {
        e.push_back(std::min(len, e.back() + width));
        width *= 2.0;
    }
    return e;
}

struct JTerm {
    const Vec3& p;
    double tau, dmin, beta;
    // e^{-2 tau (r - dmin)} / r^2 [ (tau + 1/r) (p - x).n / r - beta |n| ], n = area-weighted normal
    double operator()(const Vec3& x, const Vec3& n_area) const {
        Vec3 v = p - x;
        double r = v.norm();
        double e = std::exp(-2.0 * tau * (r - dmin)) / (r * r);
        return e * ((tau + 1.0 / r) * v.dot(n_area) / r - beta * n_area.norm());
    }
};

double quadric_pass(const Vec3& c, const Vec3& a, const Vec3& q, const JTerm& f, double d, int gl, int nps) {
    Vec3 u0 = q - c;
    u0 = u0.cwiseQuotient(a).normalized();
    Vec3 e1, e2;
    complete_frame(u0, e1, e2);
    double amax = a.maxCoeff();
    double w = std::min(0.25, std::sqrt(d / f.tau) / amax);
    auto edges = graded_edges(w, kPi);
    double det = a.prod(), dpsi = 2.0 * kPi / nps, sum = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        Rule1D r = gauss_legendre(gl, edges[k], edges[k + 1]);
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            double th = r.x[i], st = std::sin(th), ct = std::cos(th);
            double ring = 0.0;
            for (int j = 0; j < nps; ++j) {
                double ps = j * dpsi;
                Vec3 u = ct * u0 + st * (std::cos(ps) * e1 + std::sin(ps) * e2);
                Vec3 x = c + a.cwiseProduct(u);
                Vec3 n = u.cwiseQuotient(a) * det;  // |n| = area factor of the unit-sphere map
                ring += f(x, n);
            }
            sum += r.w[i] * st * ring * dpsi;
        }
    }
    return sum;
}

double patch_pass(const GraphPatch& g, const Vec3& q, const JTerm& f, double d, int gl, int nps) {
    Vec2 s0 = g.local_coords(q);
    double dpsi = 2.0 * kPi / nps, sum = 0.0;
    for (int j = 0; j < nps; ++j) {
        double ps = j * dpsi;
        Vec2 e(std::cos(ps), std::sin(ps));
        double se = s0.dot(e);
        double len = -se + std::sqrt(std::max(0.0, se * se + g.r_q * g.r_q - s0.squaredNorm()));
        if (len <= 0.0) continue;
        double w = std::min(len / 4.0, std::sqrt(d / f.tau));
        auto edges = graded_edges(w, len);
        double ray = 0.0;
        for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
            Rule1D r = gauss_legendre(gl, edges[k], edges[k + 1]);
            for (std::size_t i = 0; i < r.x.size(); ++i) {
                Vec2 s = s0 + r.x[i] * e;
                HeightJet jt = g.jet(s);
                Vec3 x = g.q + s(0) * g.e1 + s(1) * g.e2 + jt.value * g.nu;
                Vec3 n = g.nu - jt.grad(0) * g.e1 - jt.grad(1) * g.e2;
                ray += r.w[i] * r.x[i] * f(x, n);
            }
        }
        sum += ray * dpsi;
    }
    return sum;
}

}  // namespace

ExpScaled j_surface(const Obstacle& obstacle, const BallSource& src, const RobinFields& robin, double tau,
                    const JOptions& opt) {
    if (obstacle.empty()) throw Error(ErrorCode::EmptyObstacle, "J needs an obstacle");
    if (!robin.gamma_zero()) throw Error(ErrorCode::GammaNotZero, "J is defined for gamma = 0 only");
    if (!(tau > 0.0)) throw Error(ErrorCode::NonPositiveTau, "tau must be positive");
    std::vector<Projection> proj;
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& c : obstacle.components) {
        proj.push_back(project_component(c, src.p));
        dmin = std::min(dmin, proj.back().signed_distance);
    }
    if (!(dmin > src.eta)) throw Error(ErrorCode::ObstacleTouchesSource, "source ball meets the obstacle");
    double total = 0.0;
    for (std::size_t ci = 0; ci < obstacle.components.size(); ++ci) {
        const Component& comp = obstacle.components[ci];
        JTerm f{src.p, tau, dmin, robin.beta_on(static_cast<int>(ci))};
        double d = proj[ci].signed_distance;
        auto pass = [&](int level) {
            int gl = opt.gl_points << level, nps = opt.azimuths << level;
            if (auto* s = std::get_if<Sphere>(&comp))
                return quadric_pass(s->center, Vec3::Constant(s->radius), proj[ci].point, f, d, gl, 1);
            if (auto* e = std::get_if<Ellipsoid>(&comp))
                return quadric_pass(e->center, e->semi_axes, proj[ci].point, f, d, gl, nps);
            return patch_pass(std::get<GraphPatch>(comp), proj[ci].point, f, d, gl, nps);
        };
        // a sphere viewed from its pole is axisymmetric: one azimuth is exact
        double prev = pass(0), cur = prev;
        bool ok = false;
        for (int level = 1; level <= opt.max_levels; ++level) {
            cur = pass(level);
            if (std::abs(cur - prev) <= opt.rel_tol * std::abs(cur) + 1e-300) {
                ok = true;
                break;
            }
            prev = cur;
        }
        if (!ok)
            throw Error(ErrorCode::QuadratureNonConvergence,
                        "surface quadrature did not settle at tau = " + std::to_string(tau));
        total += cur;
    }
    double st = varphi_scaled(tau * src.eta) / std::pow(tau, 3);
    return {st * st * total, -2.0 * tau * (dmin - src.eta)};
}

IndicatorSeries j_mode_series(const Scenario& sc, const std::vector<double>& taus, const JOptions& opt) {
    std::vector<ExpScaled> vals(taus.size());
    std::vector<std::string> err(taus.size());
    std::vector<int> code(taus.size(), -1);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(taus.size()); ++i) {
        try {
            vals[i] = j_surface(sc.obstacle, sc.source, sc.robin, taus[i], opt);
            vals[i].mantissa *= 2.0;
        } catch (const Error& e) {
            code[i] = static_cast<int>(e.code());
            err[i] = e.what();
        }
    }
    for (std::size_t i = 0; i < taus.size(); ++i)
        if (code[i] >= 0) throw Error(static_cast<ErrorCode>(code[i]), err[i]);
    IndicatorSeries s;
    s.mode = SeriesMode::JMode;
    s.hash = sc.hash();
    for (std::size_t i = 0; i < taus.size(); ++i) s.push(taus[i], vals[i]);
    s.validate();
    return s;
}

IndicatorSeries solver_series(const WaveRecording& rec, const std::vector<double>& taus, SeriesMode mode,
                              Reference ref) {
    IndicatorSeries s;
    s.mode = mode;
    s.hash = rec.scenario_hash;
    std::vector<double> v(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        switch (mode) {
            case SeriesMode::Volume: v[i] = indicator_volume(rec, taus[i], ref); break;
            case SeriesMode::Sphere: v[i] = indicator_sphere(rec, taus[i], ref); break;
            case SeriesMode::SphereReduced:
                v[i] = reduce_sphere(indicator_sphere(rec, taus[i], ref), taus[i], rec.R, rec.source.eta);
                break;
            case SeriesMode::JMode: throw Error(ErrorCode::InvalidArgument, "J-mode series need no recording");
        }
    }
    for (std::size_t i = 0; i < taus.size(); ++i) s.push(taus[i], v[i]);
    s.validate();
    return s;
}

namespace {

// dist from log|I| = -2 tau dist + k log tau + c through the given points
Eigen::VectorXd log_fit(const IndicatorSeries& s, const std::vector<std::size_t>& idx, bool free_power,
                        double* rms = nullptr, double* dist_err = nullptr) {
    int cols = free_power ? 3 : 2;
    Eigen::MatrixXd A(idx.size(), cols);
    Eigen::VectorXd y(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        double t = s.tau[idx[r]];
        A(r, 0) = -2.0 * t;
        A(r, cols - 1) = 1.0;
        if (free_power) A(r, 1) = std::log(t);
        y(r) = s.log_abs[idx[r]];
    }
    Eigen::VectorXd x = A.colPivHouseholderQr().solve(y);
    if (rms || dist_err) {
        Eigen::VectorXd res = A * x - y;
        int dof = static_cast<int>(idx.size()) - cols;
        double s2 = dof > 0 ? res.squaredNorm() / dof : 0.0;
        if (rms) *rms = std::sqrt(res.squaredNorm() / idx.size());
        if (dist_err) {
            Eigen::MatrixXd cov = (A.transpose() * A).inverse() * s2;
            *dist_err = std::sqrt(std::max(0.0, cov(0, 0)));
        }
    }
    return x;
}

}  // namespace

DistFit fit_dist(const IndicatorSeries& s, const DistFitOptions& opt) {
    s.validate();
    double floor_log = opt.noise_floor > 0.0 ? std::log(opt.noise_floor) : -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.sign[i] != 0 && std::isfinite(s.log_abs[i]) && s.log_abs[i] > floor_log) ok.push_back(i);
    const std::size_t span = opt.free_power ? 3 : 2;
    if (ok.size() < 4) throw Error(ErrorCode::NoiseFloorReached, "fewer than 4 points above the noise floor");
    // local estimates over consecutive usable points, all of one sign
    std::vector<double> est;
    for (std::size_t j = 0; j + span <= ok.size(); ++j) {
        std::vector<std::size_t> w(ok.begin() + j, ok.begin() + j + span);
        bool same = true;
        for (auto i : w) same = same && s.sign[i] == s.sign[w[0]];
        est.push_back(same ? log_fit(s, w, opt.free_power)(0) : std::numeric_limits<double>::quiet_NaN());
    }
    // longest run of neighbouring estimates that agree
    std::size_t best_a = 0, best_len = 0, a = 0, len = 0;
    for (std::size_t j = 0; j + 1 < est.size(); ++j) {
        double e0 = est[j], e1 = est[j + 1];
        bool stable = e0 > 0 && e1 > 0 && std::abs(e0 - e1) <= opt.stability * std::max(e0, e1);
        if (stable) {
            if (!len) a = j;
            ++len;
            if (len > best_len) best_len = len, best_a = a;
        } else {
            len = 0;
        }
    }
    if (!best_len) throw Error(ErrorCode::NoiseFloorReached, "no stretch of stable decay rate");
    std::size_t lo = best_a, hi = best_a + best_len + span;  // positions in ok, [lo, hi)
    std::size_t n = hi - lo;
    if (n < 4) throw Error(ErrorCode::NoiseFloorReached, "usable window has fewer than 4 points");
    std::size_t m = std::max<std::size_t>(4, (n + 1) / 2);
    std::vector<std::size_t> fit(ok.begin() + (hi - m), ok.begin() + hi);
    DistFit r;
    Eigen::VectorXd x = log_fit(s, fit, opt.free_power, &r.residual, &r.dist_err);
    r.dist = x(0);
    r.k = opt.free_power ? x(1) : 0.0;
    r.c = x(x.size() - 1);
    r.window_lo = ok[lo];
    r.window_hi = ok[hi - 1] + 1;
    r.fit_lo = ok[hi - m];
    if (!(r.dist > 0.0)) throw Error(ErrorCode::NoiseFloorReached, "fitted decay rate is not positive");
    return r;
}

double moment(const IndicatorSeries& s, std::size_t i, double dist) {
    if (s.sign[i] == 0) return 0.0;
    double t = s.tau[i];
    return s.sign[i] * std::exp(s.log_abs[i] + 2.0 * t * dist + 4.0 * std::log(t));
}

MomentFit fit_moments(const IndicatorSeries& s, double dist, int order, int points) {
    s.validate();
    if (order < 1 || order > 3) throw Error(ErrorCode::InvalidArgument, "order must be 1, 2 or 3");
    if (!(dist > 0.0)) throw Error(ErrorCode::NonPositiveDistance, "dist must be positive");
    int n = points > 0 ? points : order + 3;
    n = std::min<int>(n, static_cast<int>(s.size()));
    if (n < order + 1 || s.size() < 4)
        throw Error(ErrorCode::InsufficientTauRange, "not enough tau points for the moment fit");
    Eigen::MatrixXd A(n, order);
    Eigen::VectorXd y(n);
    for (int r = 0; r < n; ++r) {
        std::size_t i = s.size() - n + r;
        double inv = 1.0 / s.tau[i];
        for (int c = 0; c < order; ++c) A(r, c) = std::pow(inv, c);
        y(r) = moment(s, i, dist);
    }
    Eigen::VectorXd x = A.colPivHouseholderQr().solve(y);
    MomentFit m;
    m.a = x(0);
    m.second = order > 1 ? x(1) : 0.0;
    m.third = order > 2 ? x(2) : 0.0;
    m.points = n;
    if (n > order) {
        double s2 = (A * x - y).squaredNorm() / (n - order);
        Eigen::MatrixXd cov = (A.transpose() * A).inverse() * s2;
        m.a_err = std::sqrt(std::max(0.0, cov(0, 0)));
        m.second_err = order > 1 ? std::sqrt(std::max(0.0, cov(1, 1))) : 0.0;
    }
    return m;
}

IndicatorTable make_table(const IndicatorSeries& s, double dist) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    IndicatorTable t;
    t.hash = s.hash;
    t.mode = mode_name(s.mode);
    std::size_t n = s.size();
    t.tau = s.tau;
    t.log_abs = s.log_abs;
    t.sign = s.sign;
    t.I_volume.assign(n, nan);
    t.I_sphere.assign(n, nan);
    t.I_reduced.assign(n, nan);
    t.J_mode.assign(n, nan);
    t.M.assign(n, nan);
    std::vector<double>* col = nullptr;
    switch (s.mode) {
        case SeriesMode::Volume: col = &t.I_volume; break;
        case SeriesMode::Sphere: col = &t.I_sphere; break;
        case SeriesMode::SphereReduced: col = &t.I_reduced; break;
        case SeriesMode::JMode: col = &t.J_mode; break;
    }
    for (std::size_t i = 0; i < n; ++i) {
        (*col)[i] = s.value(i);
        if (dist > 0.0) t.M[i] = moment(s, i, dist);
    }
    return t;
}

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

double parse_cell(const std::string& c) {
    if (c == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (c == "inf") return std::numeric_limits<double>::infinity();
    if (c == "-inf") return -std::numeric_limits<double>::infinity();
    std::istringstream in(c);
    in.imbue(std::locale::classic());
    double v;
    in >> v;
    if (in.fail()) throw Error(ErrorCode::SchemaError, "bad CSV number '" + c + "'");
    return v;
}

const char* kHeader = "tau,I_volume,I_sphere,I_reduced,J_mode,M,log_abs_I,sign_I";

}  // namespace

void write_table(std::ostream& out, const IndicatorTable& t) {
    out << "# scenario=" << t.hash << " mode=" << t.mode << "\n" << kHeader << "\n";
    for (std::size_t i = 0; i < t.tau.size(); ++i) {
        out << fmt(t.tau[i]) << ',' << fmt(t.I_volume[i]) << ',' << fmt(t.I_sphere[i]) << ',' << fmt(t.I_reduced[i])
            << ',' << fmt(t.J_mode[i]) << ',' << fmt(t.M[i]) << ',' << fmt(t.log_abs[i]) << ',' << t.sign[i] << "\n";
    }
}

IndicatorTable read_table(std::istream& in) {
    IndicatorTable t;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream h(line.substr(1));
            std::string tok;
            while (h >> tok) {
                if (tok.rfind("scenario=", 0) == 0) t.hash = tok.substr(9);
                if (tok.rfind("mode=", 0) == 0) t.mode = tok.substr(5);
            }
            continue;
        }
        if (!header) {
            if (line != kHeader) throw Error(ErrorCode::SchemaError, "unexpected CSV header");
            header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        if (cells.size() != 8) throw Error(ErrorCode::SchemaError, "CSV row needs 8 columns");
        t.tau.push_back(parse_cell(cells[0]));
        t.I_volume.push_back(parse_cell(cells[1]));
        t.I_sphere.push_back(parse_cell(cells[2]));
        t.I_reduced.push_back(parse_cell(cells[3]));
        t.J_mode.push_back(parse_cell(cells[4]));
        t.M.push_back(parse_cell(cells[5]));
        t.log_abs.push_back(parse_cell(cells[6]));
        t.sign.push_back(static_cast<int>(parse_cell(cells[7])));
    }
    if (!header) throw Error(ErrorCode::SchemaError, "CSV has no header");
    return t;
}

IndicatorSeries series_from_table(const IndicatorTable& t) {
    IndicatorSeries s;
    s.mode = parse_mode_name(t.mode.empty() ? "volume" : t.mode);
    s.hash = t.hash;
    s.tau = t.tau;
    s.log_abs = t.log_abs;
    s.sign = t.sign;
    s.validate();
    return s;
}

}  // namespace enclosure
