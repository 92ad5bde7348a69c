#include "enclosure/recovery.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace enclosure {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

double opt_num(const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); }

double to_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::istringstream in(s);
    in.imbue(std::locale::classic());
    double v;
    in >> v;
    if (in.fail()) throw Error(ErrorCode::SchemaError, "bad number '" + s + "'");
    return v;
}

}  // namespace

std::string RecoveryResult::to_text() const {
    std::ostringstream o;
    o << "scenario = " << hash << "\n" << "mode = " << mode << "\n";
    o << "eta = " << num(eta) << "\n";
    o << "dist_est = " << num(dist_est) << "\n" << "dist_err = " << num(dist_err) << "\n";
    o << "d_est = " << num(d_est) << "\n";
    o << "A_est = " << num(A_est) << "\n" << "A_err = " << num(A_err) << "\n";
    o << "second_est = " << num(second_est) << "\n" << "second_err = " << num(second_err) << "\n";
    o << "reflectors = " << reflectors << "\n";
    if (K_est) o << "K_est = " << num(*K_est) << "\nK_err = " << num(opt_num(K_err)) << "\n";
    if (H_est) o << "H_est = " << num(*H_est) << "\nH_err = " << num(opt_num(H_err)) << "\n";
    if (beta_est) o << "beta_est = " << num(*beta_est) << "\nbeta_err = " << num(opt_num(beta_err)) << "\n";
    if (!gamma_sign.empty()) o << "gamma_sign = " << gamma_sign << "\n";
    for (const auto& [k, v] : truth) o << "truth." << k << " = " << num(v) << "\n";
    return o.str();
}

RecoveryResult RecoveryResult::from_text(const std::string& text) {
    RecoveryResult r;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find(" = ");
        if (line.empty() || line[0] == '#') continue;
        if (eq == std::string::npos) throw Error(ErrorCode::SchemaError, "expected key = value in result");
        std::string k = line.substr(0, eq), v = line.substr(eq + 3);
        if (k == "scenario") r.hash = v;
        else if (k == "mode") r.mode = v;
        else if (k == "eta") r.eta = to_double(v);
        else if (k == "dist_est") r.dist_est = to_double(v);
        else if (k == "dist_err") r.dist_err = to_double(v);
        else if (k == "d_est") r.d_est = to_double(v);
        else if (k == "A_est") r.A_est = to_double(v);
        else if (k == "A_err") r.A_err = to_double(v);
        else if (k == "second_est") r.second_est = to_double(v);
        else if (k == "second_err") r.second_err = to_double(v);
        else if (k == "reflectors") r.reflectors = static_cast<int>(to_double(v));
        else if (k == "K_est") r.K_est = to_double(v);
        else if (k == "K_err") r.K_err = to_double(v);
        else if (k == "H_est") r.H_est = to_double(v);
        else if (k == "H_err") r.H_err = to_double(v);
        else if (k == "beta_est") r.beta_est = to_double(v);
        else if (k == "beta_err") r.beta_err = to_double(v);
        else if (k == "gamma_sign") r.gamma_sign = v;
        else if (k.rfind("truth.", 0) == 0) r.truth[k.substr(6)] = to_double(v);
        else throw Error(ErrorCode::SchemaError, "unknown result key " + k);
    }
    return r;
}

std::string RecoveryResult::csv_header() {
    return "scenario,mode,dist_est,dist_err,d_est,A_est,A_err,second_est,second_err,K_est,H_est,beta_est";
}

std::string RecoveryResult::csv_row() const {
    return hash + "," + mode + "," + num(dist_est) + "," + num(dist_err) + "," + num(d_est) + "," + num(A_est) +
           "," + num(A_err) + "," + num(second_est) + "," + num(second_err) + "," + num(opt_num(K_est)) + "," +
           num(opt_num(H_est)) + "," + num(opt_num(beta_est));
}

DistRecovery recover_dist(const IndicatorSeries& s, double eta, const DistFitOptions& opt) {
    DistRecovery r;
    r.fit = fit_dist(s, opt);
    r.dist = r.fit.dist;
    r.d = r.dist + eta;
    return r;
}

double recover_A(const MomentFit& m, double eta, double d) {
    if (!(eta > 0.0) || !(d > eta)) throw Error(ErrorCode::InvalidArgument, "need d > eta > 0");
    return m.a * (2.0 / kPi) * (d / eta) * (d / eta);
}

CurvatureEstimate curvatures_from_Q(double Q1, double s1, double Q2, double s2, double d, double Q1_err,
                                    double Q2_err) {
    if (!(s1 >= 0.0 && s1 < d && s2 >= 0.0 && s2 < d))
        throw Error(ErrorCode::InvalidArgument, "shifts must lie in [0, d)");
    double l1 = 1.0 / (d - s1), l2 = 1.0 / (d - s2);
    if (std::abs(l1 - l2) < 1e-9 * std::max(l1, l2))
        throw Error(ErrorCode::SingularSystem, "the two shifts give the same equation");
    // [1 -2 l_j] [K H]^T = Q_j - l_j^2
    double r1 = Q1 - l1 * l1, r2 = Q2 - l2 * l2;
    double H = (r1 - r2) / (2.0 * (l2 - l1));
    double K = r1 + 2.0 * l1 * H;
    CurvatureEstimate c;
    c.K = K;
    c.H = H;
    double dH1 = 1.0 / (2.0 * (l2 - l1)), dH2 = -dH1;
    c.H_err = std::hypot(dH1 * Q1_err, dH2 * Q2_err);
    c.K_err = std::hypot((1.0 + 2.0 * l1 * dH1) * Q1_err, 2.0 * l1 * dH2 * Q2_err);
    return c;
}

CurvatureEstimate recover_curvatures(const RecoveryResult& r1, double s1, const RecoveryResult& r2, double s2,
                                     double d) {
    if (r1.reflectors != 1 || r2.reflectors != 1)
        throw Error(ErrorCode::MultiReflector, "curvatures need a single reflector");
    if (!(r1.A_est > 0.0) || !(r2.A_est > 0.0))
        throw Error(ErrorCode::InvalidArgument, "A estimates must be positive");
    double Q1 = 1.0 / (r1.A_est * r1.A_est), Q2 = 1.0 / (r2.A_est * r2.A_est);
    return curvatures_from_Q(Q1, s1, Q2, s2, d, 2.0 * Q1 * r1.A_err / r1.A_est, 2.0 * Q2 * r2.A_err / r2.A_est);
}

double recover_beta(const RecoveryResult& r, const Reflector& refl, double* err) {
    if (r.reflectors != 1) throw Error(ErrorCode::MultiReflector, "beta needs a single reflector");
    if (!(refl.det_gap > 0.0)) throw Error(ErrorCode::DegenerateReflector, "det gap is not positive");
    double d = refl.d, eta = r.eta, sq = std::sqrt(refl.det_gap);
    double A = 1.0 / sq;
    // second = -(pi eta / d^2) A + (pi/2) eta^2 C / sqrt(det), C = C(0) - beta / d^2
    double C = (r.second_est + kPi * eta * A / (d * d)) * sq * 2.0 / (kPi * eta * eta);
    double C0 = C_coefficient(refl, 0.0, CForm::Corrected);
    if (err) *err = r.second_err * sq * 2.0 / (kPi * eta * eta) * d * d;
    return (C0 - C) * d * d;
}

std::string gamma_sign_name(GammaSign g) {
    switch (g) {
        case GammaSign::BelowOne: return "gamma_below_one";
        case GammaSign::AboveOne: return "gamma_above_one";
        case GammaSign::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

GammaSign gamma_sign_test(const IndicatorSeries& s, double noise_floor) {
    double floor_log = noise_floor > 0.0 ? std::log(noise_floor) : -std::numeric_limits<double>::infinity();
    std::vector<int> signs;
    for (std::size_t i = 0; i < s.size(); ++i)
        signs.push_back(s.sign[i] != 0 && s.log_abs[i] > floor_log ? s.sign[i] : 0);
    // upper half of the points above the floor, which must be contiguous from the bottom
    std::size_t last = 0;
    while (last < signs.size() && signs[last] != 0) ++last;
    if (last < 4) return GammaSign::Inconclusive;
    std::size_t from = last / 2;
    int first = signs[from];
    for (std::size_t i = from; i < last; ++i)
        if (signs[i] != first) return GammaSign::Inconclusive;
    return first > 0 ? GammaSign::BelowOne : GammaSign::AboveOne;
}

std::vector<double> solver_tau_grid(const Scenario& sc, const WaveRecording& rec, double factor) {
    if (sc.tau.tau_max > 0.0) return sc.tau_grid();
    const double dist = sc.obstacle.empty() ? 1.0 : sc.dist();
    const double lo = sc.tau.tau_min > 0.0 ? sc.tau.tau_min : 8.0 / dist, hi = 24.0 / dist;
    const int trial_n = 32;
    std::vector<double> trial;
    for (int i = 0; i < trial_n; ++i) trial.push_back(lo * std::pow(hi / lo, double(i) / (trial_n - 1)));

    Scenario coarse = sc;
    coarse.grid.dx = 1.5 * rec.dx;
    WaveRecording rc = run_forward(coarse, make_grid(coarse, coarse.grid.dx, sc.grid.dt_factor));
    double cut = 0.0;
    for (double t : trial) {
        double f = indicator_volume(rec, t), c = indicator_volume(rc, t);
        if (!(std::abs(f) > factor * std::abs(f - c))) break;
        cut = t;
    }
    if (!(cut > lo)) throw Error(ErrorCode::NoiseFloorReached, "indicator is below the discretisation floor at tau_min");
    Scenario g = sc;
    g.tau.tau_min = lo;
    g.tau.tau_max = cut;
    return g.tau_grid();
}

IndicatorSeries scenario_series(const Scenario& sc) {
    if (sc.mode == Mode::JMode) return j_mode_series(sc, sc.tau_grid());
    SimGrid g = make_grid(sc, sc.grid.dx, sc.grid.dt_factor);
    WaveRecording rec = run_forward(sc, g);
    return solver_series(rec, solver_tau_grid(sc, rec), SeriesMode::Volume);
}

DirectionProbe direction_probe(const Scenario& base, const Vec3& omega, double s, double rel_tol) {
    if (!(s > 0.0 && s < base.source.eta)) throw Error(ErrorCode::InvalidArgument, "shift must lie in (0, eta)");
    Scenario sh = base;
    sh.source.p = base.source.p + s * omega.normalized();
    sh.source.eta = base.source.eta - s;
    sh.validate();
    auto rb = recover_dist(scenario_series(base), base.source.eta);
    auto rs = recover_dist(scenario_series(sh), sh.source.eta);
    DirectionProbe p;
    p.d_base = rb.d;
    p.d_shift = rs.d;
    p.expected = rb.d - s;
    double fit_tol = std::max({rb.fit.dist_err, rs.fit.dist_err, rel_tol * rb.d});
    p.tolerance = 2.0 * fit_tol;
    p.on_reflector = std::abs(p.d_shift - p.expected) <= p.tolerance;
    return p;
}

}  // namespace enclosure
