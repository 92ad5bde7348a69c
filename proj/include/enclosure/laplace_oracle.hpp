#pragma once

// Brute-force checks of the Laplace-method coefficients of the boundary
// integral near a first reflector.

#include "enclosure/geometry.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace enclosure {

double g0_eval(const GraphPatch& patch, double d, const Vec2& s);
double g1_eval(const GraphPatch& patch, double d, double beta, const Vec2& s);

enum class Amplitude { G0, G1 };

struct LaplaceIntegrand {
    GraphPatch patch;
    double d = 1.0;
    Amplitude kind = Amplitude::G0;
    double beta = 0.0;  // used by G1
};

struct TildeOptions {
    double cut = 36.0;  // integrate while 2 tau phi > -cut
    double rel_tol = 1e-13;
    int max_levels = 7;
};

// Integral over the chart disc of g(s) exp(2 tau phase(s)); no e^{-2 tau dist} factor.
double tilde_integral(const LaplaceIntegrand& f, double tau, const TildeOptions& opt = {});

// Value and first derivative at x = 0 of the polynomial through (x_i, y_i).
struct PolyLimit {
    double value;
    double slope;
};
PolyLimit extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y);

struct TwoTerm {
    double c1;
    double c2;
};
// sqrt(det_gap) * tilde_integral = c1 / tau + c2 / tau^2 + ...
TwoTerm two_term_fit(const LaplaceIntegrand& f, const std::vector<double>& taus, const TildeOptions& opt = {});

enum class G0Route {
    Expansion,         // general expansion with the closed-form tensors
    ExpansionNumeric,  // same expansion, tensors from finite differences
    Printed,           // simplified closed form as printed
    Corrected,         // simplified closed form re-derived
};

// Laplacian of the expansion amplitude at 0 times sqrt(det_gap).
double G0_laplacian(const GraphPatch& patch, double d, G0Route route = G0Route::Expansion);

struct IdentityCheck {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  // relative
    bool as_printed = true; // false for re-derived variants
};

struct Lemma31Report {
    std::vector<IdentityCheck> checks;
    double max_residual(bool printed_only) const;
    const IdentityCheck* find(const std::string& id) const;
};

Lemma31Report lemma31_check(const GraphPatch& patch, double d);

// Random quartic charts with coefficients uniform in [-amp, amp], rejected
// until det(I/d - hess) > margin / d^2.
GraphPatch random_quartic_chart(std::mt19937_64& rng, double d, double amp = 0.3, double margin = 0.2,
                                double r_q = 0.5);

double uniform01(std::mt19937_64& rng);

std::uint64_t chart_hash(const GraphPatch& patch);

}  // namespace enclosure
