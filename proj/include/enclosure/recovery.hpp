#pragma once

#include "enclosure/forward_solver.hpp"
#include "enclosure/indicator.hpp"

#include <map>
#include <optional>
#include <string>

namespace enclosure {

struct RecoveryResult {
    std::string hash;
    std::string mode;
    double eta = 0.0;
    double dist_est = 0.0, dist_err = 0.0;
    double d_est = 0.0;
    double A_est = 0.0, A_err = 0.0;
    double second_est = 0.0, second_err = 0.0;
    int reflectors = 1;  // from side data; curvature and beta need a singleton
    std::optional<double> K_est, H_est, K_err, H_err;
    std::optional<double> beta_est, beta_err;
    std::string gamma_sign;  // empty when not tested
    std::map<std::string, double> truth;  // optional ground truth, same keys

    std::string to_text() const;
    static RecoveryResult from_text(const std::string& text);
    static std::string csv_header();
    std::string csv_row() const;
};

struct DistRecovery {
    DistFit fit;
    double dist = 0.0;
    double d = 0.0;
};
DistRecovery recover_dist(const IndicatorSeries& s, double eta, const DistFitOptions& opt = {});

// A = a (2/pi) (d/eta)^2
double recover_A(const MomentFit& m, double eta, double d);

struct CurvatureEstimate {
    double K = 0.0, H = 0.0;
    double K_err = 0.0, H_err = 0.0;
};

// Q(s) = (d - s)^-2 - 2 H (d - s)^-1 + K at two shifts.
CurvatureEstimate curvatures_from_Q(double Q1, double s1, double Q2, double s2, double d, double Q1_err = 0.0,
                                    double Q2_err = 0.0);
// Q = A^-2 from the two shifted recoveries.
CurvatureEstimate recover_curvatures(const RecoveryResult& r1, double s1, const RecoveryResult& r2, double s2,
                                     double d);

// beta(q) from the second coefficient, with the reflector's own geometry.
double recover_beta(const RecoveryResult& r, const Reflector& reflector, double* err = nullptr);

enum class GammaSign { BelowOne, AboveOne, Inconclusive };
std::string gamma_sign_name(GammaSign g);
GammaSign gamma_sign_test(const IndicatorSeries& s, double noise_floor = 0.0);

// Default tau grid for a solver recording. Without an explicit tau.max the top
// end is cut where |I| drops below `factor` times |I(dx) - I(1.5 dx)|, the gap
// to a companion run on a coarser grid.
std::vector<double> solver_tau_grid(const Scenario& sc, const WaveRecording& rec, double factor = 10.0);

// Indicator series of a scenario in its own mode (the solver runs when needed).
IndicatorSeries scenario_series(const Scenario& sc);

struct DirectionProbe {
    double d_base = 0.0, d_shift = 0.0, expected = 0.0, tolerance = 0.0;
    bool on_reflector = false;
};
// Shrinks B to the ball of radius eta - s centred at p + s omega and compares
// distances.
DirectionProbe direction_probe(const Scenario& base, const Vec3& omega, double s, double rel_tol = 1e-3);

}  // namespace enclosure
