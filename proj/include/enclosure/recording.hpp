#pragma once

#include "enclosure/analytic_fields.hpp"

#include <string>
#include <vector>

namespace enclosure {

// Samples u(x_i, t_n), t_n = n dt, n = 0..steps. Arrays are time-major:
// entry [n * count + i].
struct WaveRecording {
    double dt = 0.0;
    int steps = 0;
    double dx = 0.0;
    std::string scenario_hash;
    BallSource source;
    double R = 0.0;
    double gamma = 0.0;
    double beta = 0.0;

    std::vector<Vec3> volume_nodes;
    std::vector<double> volume_weights;
    std::vector<Vec3> sphere_nodes;
    std::vector<double> sphere_weights;

    std::vector<double> volume_u, sphere_u;
    std::vector<double> volume_ref, sphere_ref;  // obstacle-free twin, may be empty
    std::vector<double> energy;                  // per step, optional

    double T() const { return dt * steps; }
    int times() const { return steps + 1; }
    bool has_reference() const { return !volume_ref.empty() || !sphere_ref.empty(); }
};

// Directory with metadata.json, samples.bin, reference.bin (when present) and
// optionally samples.csv.
void save_recording(const WaveRecording& rec, const std::string& dir, bool csv = false);
WaveRecording load_recording(const std::string& dir);

}  // namespace enclosure
