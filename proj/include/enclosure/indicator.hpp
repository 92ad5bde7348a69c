#pragma once

#include "enclosure/recording.hpp"
#include "enclosure/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace enclosure {

enum class SeriesMode { Volume, Sphere, SphereReduced, JMode };
std::string mode_name(SeriesMode m);
SeriesMode parse_mode_name(const std::string& s);

// Values are kept as log|I| and sign: at large tau they underflow doubles.
struct IndicatorSeries {
    std::vector<double> tau;
    std::vector<double> log_abs;
    std::vector<int> sign;
    SeriesMode mode = SeriesMode::Volume;
    std::string hash;

    std::size_t size() const { return tau.size(); }
    double value(std::size_t i) const;
    void push(double t, double v);
    void push(double t, const ExpScaled& v);
    void validate() const;  // ascending positive tau, finite entries
};

// Per-node transform of a time-major block (times x count) with the exact
// exponential weight against the piecewise linear interpolant of u.
std::vector<double> laplace_transform(const std::vector<double>& u, std::size_t count, double dt, int steps,
                                      double tau);

enum class Reference { Twin, Analytic };

double indicator_volume(const WaveRecording& rec, double tau, Reference ref = Reference::Twin);
double indicator_sphere(const WaveRecording& rec, double tau, Reference ref = Reference::Twin);

// Factor (tau eta cosh - sinh)(tau eta) / (tau^2 R sinh(tau R)) as a log.
double log_reduce_factor(double tau, double R, double eta);
double reduce_sphere(double I_sphere, double tau, double R, double eta);

struct JOptions {
    int gl_points = 12;  // per panel, doubled on refinement
    int azimuths = 32;
    double rel_tol = 1e-11;
    int max_levels = 5;
};

// J(tau) over every component of the obstacle; value = mantissa * e^{log_scale}
// with log_scale = -2 tau dist.
ExpScaled j_surface(const Obstacle& obstacle, const BallSource& src, const RobinFields& robin, double tau,
                    const JOptions& opt = {});

// 2 J on the scenario's tau grid.
IndicatorSeries j_mode_series(const Scenario& sc, const std::vector<double>& taus, const JOptions& opt = {});
IndicatorSeries solver_series(const WaveRecording& rec, const std::vector<double>& taus, SeriesMode mode,
                              Reference ref = Reference::Twin);

struct DistFit {
    double dist = 0.0;
    double k = 0.0;  // algebraic prefactor exponent
    double c = 0.0;
    double residual = 0.0;  // rms of log misfit
    double dist_err = 0.0;
    std::size_t window_lo = 0, window_hi = 0;  // usable points [lo, hi)
    std::size_t fit_lo = 0;                   // fit uses [fit_lo, hi)
};

struct DistFitOptions {
    double noise_floor = 0.0;   // |I| at or below is discarded
    double stability = 0.01;    // relative spread of local estimates
    bool free_power = true;     // false: pure exponential slope
};

DistFit fit_dist(const IndicatorSeries& s, const DistFitOptions& opt = {});

struct MomentFit {
    double a = 0.0;
    double second = 0.0;
    double third = 0.0;
    double a_err = 0.0;
    double second_err = 0.0;
    int points = 0;
};

// M = tau^4 e^{2 tau dist} I fitted as a + b/tau (+ c/tau^2) over the top points.
MomentFit fit_moments(const IndicatorSeries& s, double dist, int order = 3, int points = 0);
double moment(const IndicatorSeries& s, std::size_t i, double dist);

// CSV table for a tau sweep; missing columns hold nan.
struct IndicatorTable {
    std::string hash;
    std::string mode;
    std::vector<double> tau, I_volume, I_sphere, I_reduced, J_mode, M, log_abs;
    std::vector<int> sign;
};

IndicatorTable make_table(const IndicatorSeries& primary, double dist_for_M);
void write_table(std::ostream& out, const IndicatorTable& t);
IndicatorTable read_table(std::istream& in);
IndicatorSeries series_from_table(const IndicatorTable& t);

}  // namespace enclosure
