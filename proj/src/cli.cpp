#include "enclosure/cli.hpp"

#include "enclosure/indicator.hpp"
#include "enclosure/laplace_oracle.hpp"
#include "enclosure/recovery.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace fs = std::filesystem;

namespace enclosure {

namespace {

struct TauFlags {
    double tau_min = 0.0, tau_max = 0.0;
    int points = 0;
    void apply(Scenario& sc) const {
        if (tau_min > 0.0) sc.tau.tau_min = tau_min;
        if (tau_max > 0.0) sc.tau.tau_max = tau_max;
        if (points > 0) sc.tau.points = points;
    }
};

std::string num(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream o(p);
    if (!o) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    return o;
}

std::vector<double> geometric(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw Error(ErrorCode::InvalidArgument, "bad tau range");
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

Scenario load_with_mode(const std::string& path, const std::string& mode, const TauFlags& tf) {
    Scenario sc = load_scenario(path);
    if (mode == "solver") sc.mode = Mode::Solver;
    else if (mode == "j-mode") sc.mode = Mode::JMode;
    else if (!mode.empty()) throw Error(ErrorCode::InvalidArgument, "--mode must be solver or j-mode here");
    tf.apply(sc);
    sc.validate();
    return sc;
}

// Side data and ground truth from the scenario geometry.
void attach_truth(RecoveryResult& r, const Scenario& sc) {
    auto refl = first_reflector(sc.obstacle, sc.source.p);
    r.reflectors = static_cast<int>(refl.size());
    double d = refl.front().d, eta = sc.source.eta;
    double A = A_sum(refl);
    std::vector<double> beta;
    for (const auto& q : refl) beta.push_back(sc.robin.beta_on(q.component));
    r.truth["dist"] = d - eta;
    r.truth["d"] = d;
    r.truth["A"] = A;
    r.truth["second"] = -kPi * eta / (d * d) * A + 0.5 * kPi * eta * eta * B_sum(refl, beta);
    if (refl.size() == 1) {
        r.truth["K"] = refl[0].K;
        r.truth["H"] = refl[0].H;
        r.truth["beta"] = beta[0];
    }
}

RecoveryResult recover_jmode(const Scenario& sc, const IndicatorSeries& s, int order) {
    RecoveryResult r;
    r.hash = s.hash;
    r.mode = mode_name(s.mode);
    r.eta = sc.source.eta;
    auto dr = recover_dist(s, sc.source.eta);
    r.dist_est = dr.dist;
    r.dist_err = dr.fit.dist_err;
    r.d_est = dr.d;
    attach_truth(r, sc);
    // moments use the geometric distance; the fitted one is reported above
    double dist = r.truth["dist"], d = r.truth["d"];
    MomentFit m = fit_moments(s, dist, order);
    r.A_est = recover_A(m, sc.source.eta, d);
    r.A_err = m.a_err * r.A_est / std::max(std::abs(m.a), 1e-300);
    r.second_est = m.second;
    r.second_err = m.second_err;
    return r;
}

Scenario shifted_toward_reflector(const Scenario& sc, double s) {
    auto refl = first_reflector(sc.obstacle, sc.source.p);
    if (refl.size() != 1) throw Error(ErrorCode::MultiReflector, "curvatures need a single reflector");
    Scenario sh = sc;
    sh.curvature_shifts.clear();
    sh.source.p = sc.source.p - s * refl[0].patch.nu;
    sh.tau = sc.tau;
    sh.tau.tau_min = sc.tau.tau_min > 0.0 ? sc.tau.tau_min : 0.0;
    sh.validate();
    return sh;
}

void add_curvatures(RecoveryResult& r, const Scenario& sc, int order) {
    if (sc.curvature_shifts.size() != 2) return;
    if (r.reflectors != 1) throw Error(ErrorCode::MultiReflector, "curvatures need a single reflector");
    double d = r.truth["d"];
    RecoveryResult rs[2];
    for (int j = 0; j < 2; ++j) {
        Scenario sh = shifted_toward_reflector(sc, sc.curvature_shifts[j]);
        auto s = j_mode_series(sh, sh.tau_grid());
        rs[j] = recover_jmode(sh, s, order);
    }
    auto c = recover_curvatures(rs[0], sc.curvature_shifts[0], rs[1], sc.curvature_shifts[1], d);
    r.K_est = c.K;
    r.H_est = c.H;
    r.K_err = c.K_err;
    r.H_err = c.H_err;
}

void add_beta(RecoveryResult& r, const Scenario& sc) {
    if (r.reflectors != 1) return;
    auto refl = first_reflector(sc.obstacle, sc.source.p);
    double e = 0.0;
    r.beta_est = recover_beta(r, refl[0], &e);
    r.beta_err = e;
}

int cmd_run(const std::string& path, const std::string& mode, const TauFlags& tf, const std::string& out_dir,
            bool csv, std::ostream& out) {
    Scenario sc = load_with_mode(path, mode, tf);
    fs::path dir(out_dir);
    if (sc.mode == Mode::JMode) {
        auto s = j_mode_series(sc, sc.tau_grid());
        auto o = open_out(dir / "series.csv");
        write_table(o, make_table(s, sc.dist()));
        out << "series " << (dir / "series.csv").string() << " points " << s.size() << "\n";
        return 0;
    }
    SimGrid g = make_grid(sc, sc.grid.dx, sc.grid.dt_factor);
    WaveRecording rec = run_forward(sc, g);
    save_recording(rec, (dir / "recording").string(), csv);
    out << "recording " << (dir / "recording").string() << " steps " << rec.steps << " volume_nodes "
        << rec.volume_nodes.size() << " sphere_nodes " << rec.sphere_nodes.size() << "\n";
    return 0;
}

IndicatorTable solver_table(const WaveRecording& rec, const std::vector<double>& taus, SeriesMode primary,
                            Reference ref, double dist_for_M) {
    auto ps = solver_series(rec, taus, primary, ref);
    IndicatorTable t = make_table(ps, dist_for_M);
    if (!rec.volume_nodes.empty())
        for (std::size_t i = 0; i < taus.size(); ++i) t.I_volume[i] = indicator_volume(rec, taus[i], ref);
    if (!rec.sphere_nodes.empty() && rec.R > 0.0)
        for (std::size_t i = 0; i < taus.size(); ++i) {
            t.I_sphere[i] = indicator_sphere(rec, taus[i], ref);
            t.I_reduced[i] = reduce_sphere(t.I_sphere[i], taus[i], rec.R, rec.source.eta);
        }
    return t;
}

int cmd_indicator(const std::string& input, const std::string& mode, const TauFlags& tf, const std::string& out_dir,
                  const std::string& reference, std::ostream& out) {
    fs::path dir(out_dir);
    IndicatorTable t;
    if (fs::is_directory(input)) {
        WaveRecording rec = load_recording(input);
        SeriesMode m = parse_mode_name(mode.empty() ? "volume" : mode);
        if (m == SeriesMode::JMode) throw Error(ErrorCode::InvalidArgument, "a recording has no J-mode series");
        Reference ref = reference == "analytic" ? Reference::Analytic : Reference::Twin;
        // T > 2 dist gives dist < T/2, so 8/(T/2) is a safe lower end
        double lo = tf.tau_min > 0.0 ? tf.tau_min : 16.0 / rec.T();
        double hi = tf.tau_max > 0.0 ? tf.tau_max : 3.0 * lo;
        auto taus = geometric(lo, hi, tf.points > 0 ? tf.points : 16);
        auto ps = solver_series(rec, taus, m, ref);
        double dist = std::numeric_limits<double>::quiet_NaN();
        try {
            dist = fit_dist(ps).dist;
        } catch (const Error&) {
        }
        t = solver_table(rec, taus, m, ref, std::isnan(dist) ? 0.0 : dist);
        out << "dist_fit " << (std::isnan(dist) ? std::string("nan") : num(dist)) << "\n";
    } else {
        Scenario sc = load_with_mode(input, "j-mode", tf);
        auto s = j_mode_series(sc, sc.tau_grid());
        t = make_table(s, sc.dist());
    }
    auto o = open_out(dir / "indicator.csv");
    write_table(o, t);
    out << "indicator " << (dir / "indicator.csv").string() << " points " << t.tau.size() << "\n";
    return 0;
}

IndicatorSeries read_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return series_from_table(read_table(in));
}

int cmd_recover(const std::string& csv, const std::string& scenario_path, const std::vector<std::string>& shifted,
                const std::string& out_dir, std::ostream& out) {
    IndicatorSeries s = read_series(csv);
    Scenario sc = load_scenario(scenario_path);
    RecoveryResult r;
    if (s.mode == SeriesMode::JMode) {
        r = recover_jmode(sc, s, sc.fit.richardson_order > 0 ? sc.fit.richardson_order : 3);
        add_beta(r, sc);
        if (shifted.size() == 2 && sc.curvature_shifts.size() == 2) {
            RecoveryResult rs[2];
            for (int j = 0; j < 2; ++j)
                rs[j] = recover_jmode(shifted_toward_reflector(sc, sc.curvature_shifts[j]), read_series(shifted[j]),
                                      sc.fit.richardson_order > 0 ? sc.fit.richardson_order : 3);
            auto c = recover_curvatures(rs[0], sc.curvature_shifts[0], rs[1], sc.curvature_shifts[1], r.truth["d"]);
            r.K_est = c.K;
            r.H_est = c.H;
            r.K_err = c.K_err;
            r.H_err = c.H_err;
        }
    } else {
        r.hash = s.hash;
        r.mode = mode_name(s.mode);
        r.eta = sc.source.eta;
        DistFitOptions o;
        o.noise_floor = sc.fit.noise_floor;
        auto dr = recover_dist(s, sc.source.eta, o);
        r.dist_est = dr.dist;
        r.dist_err = dr.fit.dist_err;
        r.d_est = dr.d;
        if (!sc.obstacle.empty()) attach_truth(r, sc);
        if (s.mode != SeriesMode::Volume) r.gamma_sign = gamma_sign_name(gamma_sign_test(s, sc.fit.noise_floor));
    }
    fs::path dir(out_dir);
    auto o = open_out(dir / "recovery.txt");
    o << r.to_text();
    auto c = open_out(dir / "recovery.csv");
    c << RecoveryResult::csv_header() << "\n" << r.csv_row() << "\n";
    out << r.to_text();
    return 0;
}

int cmd_oracle(const std::string& battery, std::uint64_t seed, int count, const std::string& out_dir,
               std::ostream& out) {
    fs::path path = fs::path(out_dir) / ("oracle_" + battery + ".csv");
    std::ostringstream body;
    std::mt19937_64 rng(seed);
    const double d = 2.0;
    double worst = 0.0, worst_printed = 0.0;
    auto charts = [&] {
        std::vector<GraphPatch> c{sphere_chart(1.0)};
        for (int i = 0; i < count; ++i) c.push_back(random_quartic_chart(rng, d));
        return c;
    };
    if (battery == "lemma31") {
        body << "chart_hash,identity,residual,as_printed\n";
        for (const auto& g : charts()) {
            auto rep = lemma31_check(g, d);
            char h[20];
            std::snprintf(h, sizeof h, "%016llx", static_cast<unsigned long long>(chart_hash(g)));
            for (const auto& c : rep.checks) {
                body << h << ',' << c.id << ',' << num(c.residual) << ',' << (c.as_printed ? 1 : 0) << "\n";
                bool printed_variant = rep.find(c.id + "/rederived") != nullptr;
                if (!printed_variant) worst = std::max(worst, c.residual);
                if (c.as_printed) worst_printed = std::max(worst_printed, c.residual);
            }
        }
        out << "lemma31 max_residual_printed " << num(worst_printed) << " max_residual_rederived " << num(worst)
            << "\n";
    } else if (battery == "dualpath") {
        body << "chart_hash,expansion,corrected,printed,residual_corrected,residual_printed\n";
        for (const auto& g : charts()) {
            double e = G0_laplacian(g, d, G0Route::Expansion);
            double c = G0_laplacian(g, d, G0Route::Corrected);
            double p = G0_laplacian(g, d, G0Route::Printed);
            double rc = std::abs(e - c) / std::max(1.0, std::abs(e)), rp = std::abs(e - p) / std::max(1.0, std::abs(e));
            worst = std::max(worst, rc);
            worst_printed = std::max(worst_printed, rp);
            char h[20];
            std::snprintf(h, sizeof h, "%016llx", static_cast<unsigned long long>(chart_hash(g)));
            body << h << ',' << num(e) << ',' << num(c) << ',' << num(p) << ',' << num(rc) << ',' << num(rp) << "\n";
        }
        out << "dualpath max_residual_corrected " << num(worst) << " max_residual_printed " << num(worst_printed)
            << "\n";
    } else if (battery == "laplace") {
        body << "integrand,c1,c1_expected,c2,c2_expected_corrected,c2_expected_printed\n";
        GraphPatch g = sphere_chart(1.0);
        Reflector r = make_reflector(g, d);
        std::vector<double> taus{50, 100, 200, 400};
        LaplaceIntegrand f0{g, d, Amplitude::G0, 0.0};
        auto t0 = two_term_fit(f0, taus);
        double e1 = kPi / (d * d);
        body << "g0," << num(t0.c1) << ',' << num(e1) << ',' << num(t0.c2) << ','
             << num(0.25 * kPi * G0_laplacian(g, d, G0Route::Corrected)) << ','
             << num(0.25 * kPi * G0_laplacian(g, d, G0Route::Printed)) << "\n";
        LaplaceIntegrand f1{g, d, Amplitude::G1, 0.5};
        auto t1 = two_term_fit(f1, taus);
        body << "g1_beta0.5," << num(t1.c1) << ',' << num(kPi * (1 / (d * d * d) - 0.5 / (d * d))) << ','
             << num(t1.c2) << ",nan,nan\n";
        (void)r;
        out << "laplace c1 " << num(t0.c1) << " c2 " << num(t0.c2) << "\n";
    } else if (battery == "meanvalue") {
        body << "tau,r,mean_sphere,mean_ball,point,residual_sphere,residual_ball\n";
        Vec3 c(0.0, 0.0, 3.0), x = Vec3::Zero();
        for (double tau : {1.0, 10.0, 100.0}) {
            Field3 psi = [&](const Vec3& z) {
                double r = (z - c).norm();
                return std::exp(-tau * (r - 3.0)) / r;
            };
            for (double r : {0.1, 0.3, 1.0, 2.0}) {
                if (tau * r > 30.0) continue;
                double ms = mean_value_sphere(psi, x, r, tau), mb = mean_value_ball(psi, x, r, tau), pv = psi(x);
                double rs = std::abs(ms - pv) / std::abs(pv), rb = std::abs(mb - pv) / std::abs(pv);
                worst = std::max({worst, rs, rb});
                body << num(tau) << ',' << num(r) << ',' << num(ms) << ',' << num(mb) << ',' << num(pv) << ','
                     << num(rs) << ',' << num(rb) << "\n";
            }
        }
        out << "meanvalue max_residual " << num(worst) << "\n";
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown battery " + battery);
    }
    auto o = open_out(path);
    o << body.str();
    out << "report " << path.string() << "\n";
    return 0;
}

int cmd_pipeline(const std::string& path, const std::string& mode, const TauFlags& tf, const std::string& out_dir,
                 bool save, std::ostream& out) {
    Scenario sc = load_with_mode(path, mode, tf);
    fs::path dir(out_dir);
    RecoveryResult r;
    if (sc.mode == Mode::JMode) {
        auto s = j_mode_series(sc, sc.tau_grid());
        int order = sc.fit.richardson_order > 0 ? sc.fit.richardson_order : 3;
        r = recover_jmode(sc, s, order);
        if (r.reflectors == 1) {
            add_beta(r, sc);
            add_curvatures(r, sc, order);
        }
        auto o = open_out(dir / "series.csv");
        write_table(o, make_table(s, sc.dist()));
    } else {
        SimGrid g = make_grid(sc, sc.grid.dx, sc.grid.dt_factor);
        WaveRecording rec = run_forward(sc, g);
        if (save) save_recording(rec, (dir / "recording").string());
        auto taus = solver_tau_grid(sc, rec);
        IndicatorSeries vol = solver_series(rec, taus, SeriesMode::Volume);
        r.hash = vol.hash;
        r.mode = "volume";
        r.eta = sc.source.eta;
        DistFitOptions o;
        o.noise_floor = sc.fit.noise_floor;
        if (!sc.obstacle.empty()) attach_truth(r, sc);
        IndicatorTable t = solver_table(rec, taus, SeriesMode::Volume, Reference::Twin,
                                        sc.obstacle.empty() ? 0.0 : sc.dist());
        auto of = open_out(dir / "series.csv");
        write_table(of, t);
        if (sc.R) r.gamma_sign = gamma_sign_name(gamma_sign_test(solver_series(rec, taus, SeriesMode::Sphere), o.noise_floor));
        auto dr = recover_dist(vol, sc.source.eta, o);
        r.dist_est = dr.dist;
        r.dist_err = dr.fit.dist_err;
        r.d_est = dr.d;
        if (!sc.obstacle.empty() && sc.robin.gamma_zero()) {
            MomentFit m = fit_moments(vol, sc.dist(), sc.fit.richardson_order > 0 ? sc.fit.richardson_order : 2);
            r.A_est = recover_A(m, sc.source.eta, sc.d());
            r.second_est = m.second;
        }
    }
    auto o = open_out(dir / "recovery.txt");
    o << r.to_text();
    auto c = open_out(dir / "recovery.csv");
    c << RecoveryResult::csv_header() << "\n" << r.csv_row() << "\n";
    out << r.to_text();
    return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Enclosure-method experiments for a Robin obstacle"};
    app.require_subcommand(1);
    TauFlags tf;
    std::string mode, out_dir = ".", input, scenario, battery, reference = "twin";
    std::vector<std::string> shifted;
    std::uint64_t seed = 1;
    int count = 50;
    bool csv = false, save = false;
    auto tau_flags = [&](CLI::App* s) {
        s->add_option("--tau-min", tf.tau_min, "smallest tau");
        s->add_option("--tau-max", tf.tau_max, "largest tau");
        s->add_option("--tau-points", tf.points, "number of tau points");
        s->add_option("--out-dir", out_dir, "output directory");
    };
    auto* run = app.add_subcommand("run", "forward run or J-mode series");
    run->add_option("scenario", input)->required();
    run->add_option("--mode", mode, "solver | j-mode");
    run->add_flag("--csv", csv, "also write samples.csv");
    tau_flags(run);
    auto* ind = app.add_subcommand("indicator", "indicator table from a recording or a J-mode scenario");
    ind->add_option("input", input)->required();
    ind->add_option("--mode", mode, "volume | sphere | sphere-reduced");
    ind->add_option("--reference", reference, "twin | analytic");
    tau_flags(ind);
    auto* rec = app.add_subcommand("recover", "recovery from an indicator table");
    rec->add_option("series", input)->required();
    rec->add_option("--scenario", scenario, "scenario file for side data")->required();
    rec->add_option("--shifted", shifted, "tables of the two shifted-ball runs")->expected(2);
    rec->add_option("--out-dir", out_dir, "output directory");
    auto* orc = app.add_subcommand("oracle", "oracle batteries");
    orc->add_option("battery", battery, "lemma31 | dualpath | laplace | meanvalue")->required();
    orc->add_option("--seed", seed, "random chart seed");
    orc->add_option("--count", count, "random charts");
    orc->add_option("--out-dir", out_dir, "output directory");
    auto* pip = app.add_subcommand("pipeline", "end-to-end run and recovery");
    pip->add_option("scenario", input)->required();
    pip->add_option("--mode", mode, "solver | j-mode");
    pip->add_flag("--save-recording", save, "keep the recording archive");
    tau_flags(pip);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();  // program name
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error code=InvalidArgument message=\"" << e.what() << "\"\n";
        return 2;
    }
    try {
        if (*run) return cmd_run(input, mode, tf, out_dir, csv, out);
        if (*ind) return cmd_indicator(input, mode, tf, out_dir, reference, out);
        if (*rec) return cmd_recover(input, scenario, shifted, out_dir, out);
        if (*orc) return cmd_oracle(battery, seed, count, out_dir, out);
        if (*pip) return cmd_pipeline(input, mode, tf, out_dir, save, out);
    } catch (const Error& e) {
        std::string msg = e.what();
        auto colon = msg.find(": ");
        if (colon != std::string::npos) msg = msg.substr(colon + 2);
        err << "error code=" << error_name(e.code()) << " message=\"" << msg << "\"\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error code=IoError message=\"" << e.what() << "\"\n";
        return 4;
    }
    return 1;
}

}  // namespace enclosure
