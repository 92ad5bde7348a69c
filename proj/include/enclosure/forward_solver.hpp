#pragma once

// Leapfrog solver for the exterior wave equation with a Robin obstacle,
// ghost-point immersed boundary on a Cartesian grid.

#include "enclosure/recording.hpp"
#include "enclosure/scenario.hpp"

#include <cstdint>
#include <vector>

namespace enclosure {

struct SimGrid {
    double dx = 0.0;
    double dt = 0.0;
    int steps = 0;
    Vec3 center = Vec3::Zero();
    Vec3 half = Vec3::Zero();  // box is center +- half
};

// Box from the margin rule: every recorded point, the obstacle and B stay
// farther than (T + 2 eta)/2 from the walls.
SimGrid make_grid(const Scenario& sc, double dx = 0.0, double dt_factor = 0.45);

// Free-space solution for zero displacement and chi_B velocity.
double free_space_reference(const BallSource& src, const Vec3& x, double t);

struct SolverOptions {
    bool with_obstacle = true;
    bool with_reference = true;  // also run the obstacle-free twin on the same grid
    bool record_energy = false;
    double probe_factor = 1.01;  // first probe at probe_factor * sqrt(3) * dx
};

class WaveSolver {
public:
    WaveSolver(const Scenario& sc, const SimGrid& grid, bool with_obstacle, double probe_factor = 1.01);

    void start();  // levels 0 and 1
    void step();   // advance one level
    void reverse();  // swap the two stored levels (time reversal)
    int level() const { return level_; }
    double time() const { return level_ * grid_.dt; }

    double energy() const;  // staggered energy between the two stored levels
    double value(const Vec3& x) const;  // trilinear, current level
    double node_value(std::size_t idx) const { return cur_[idx]; }
    Vec3 node(std::size_t idx) const;
    std::size_t index(int i, int j, int k) const { return i + nx_ * (j + ny_ * static_cast<std::size_t>(k)); }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    std::size_t ghost_count() const { return ghosts_.size(); }
    const std::vector<double>& data_fraction() const { return frac_; }
    std::vector<double> snapshot() const { return cur_; }
    std::vector<double> previous() const { return prev_; }

    // lattice nodes carrying part of B, with weights fraction * dx^3
    void volume_nodes(std::vector<std::size_t>& idx, std::vector<double>& w) const;

private:
    struct Ghost {
        std::size_t idx;
        std::array<std::size_t, 8> c1, c2;
        std::array<double, 8> w1, w2;
        double ag, a1, a2, bg, b1, b2;
        double beta, gamma;
        double u0_n = 0.0, u0_nm1 = 0.0;
    };

    void build_masks(bool with_obstacle, double probe_factor);
    void build_source();
    void update_ghosts(std::vector<double>& u, bool first);
    bool probe(const Vec3& x, std::array<std::size_t, 8>& c, std::array<double, 8>& w) const;

    Scenario sc_;
    SimGrid grid_;
    int nx_, ny_, nz_;
    int wall_ = 1;  // wall layers
    Vec3 lo_;
    std::vector<std::uint8_t> mask_;  // 0 solid, 1 fluid, 2 ghost, 3 wall
    std::vector<double> frac_;        // chi_B cell fractions
    std::vector<std::size_t> src_idx_;
    std::vector<double> prev_, cur_;
    std::vector<Ghost> ghosts_;
    int level_ = 0;
};

WaveRecording run_forward(const Scenario& sc, const SimGrid& grid, const SolverOptions& opt = {});

}  // namespace enclosure
