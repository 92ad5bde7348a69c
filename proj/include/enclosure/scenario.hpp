#pragma once

#include "enclosure/analytic_fields.hpp"
#include "enclosure/geometry.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace enclosure {

// Robin data on the obstacle: constants, optionally overridden per component.
struct RobinFields {
    double gamma = 0.0;
    double beta = 0.0;
    std::vector<std::optional<double>> gamma_by_component;
    std::vector<std::optional<double>> beta_by_component;

    double gamma_on(int component) const;
    double beta_on(int component) const;
    bool gamma_zero() const;
};

enum class Mode { Solver, JMode };

struct TauGridSpec {
    double tau_min = 0.0;  // 0: 8 / dist
    double tau_max = 0.0;  // 0: mode default
    int points = 16;
    bool geometric = true;
};

struct GridSpec {
    double dx = 0.0;          // 0: eta / 12
    double dt_factor = 0.45;  // dt = dt_factor * dx (rounded down to hit T)
    int sphere_nodes = 16;    // Gauss nodes in cos(theta) on the observation sphere
};

struct FitSpec {
    int richardson_order = 0;  // 0: mode default (2 solver, 3 J-mode)
    double noise_floor = 0.0;  // |I| below this is unusable
};

struct Scenario {
    std::string name;
    Mode mode = Mode::JMode;
    Obstacle obstacle;
    BallSource source;
    std::optional<double> R;  // observation sphere radius
    double T = 0.0;
    RobinFields robin;
    TauGridSpec tau;
    GridSpec grid;
    FitSpec fit;
    std::vector<double> curvature_shifts;  // s_1 < s_2 for the two-ball system

    // min over the boundary of |x - p|
    double d() const;
    double dist() const { return d() - source.eta; }
    // Checks the problem hypotheses; throws a named error on violation.
    void validate() const;
    std::string canonical() const;
    std::string hash() const;  // 16 hex digits of FNV-1a over canonical()
    std::vector<double> tau_grid() const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

std::uint64_t fnv1a(const std::string& s);

}  // namespace enclosure
