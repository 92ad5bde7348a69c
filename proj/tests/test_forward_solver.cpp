#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "enclosure/forward_solver.hpp"

#include <filesystem>
#include <random>

using namespace enclosure;

namespace {

Scenario empty_scenario(double T = 1.5) {
    return parse_scenario(R"(
name = "empty"
mode = solver
obstacle.kind = none
source.center = [0, 0, 0]
source.radius = 0.5
observation.radius = 0.75
time.final = )" + std::to_string(T) + "\n");
}

Scenario sphere_scenario(double gamma = 0.0, double T = 4.0) {
    return parse_scenario(R"(
name = "sphere"
mode = solver
obstacle.kind = sphere
obstacle.center = [0, 0, 0]
obstacle.radius = 1
source.center = [0, 0, 3]
source.radius = 0.5
observation.radius = 0.75
time.final = )" + std::to_string(T) + "\nrobin.gamma = " + std::to_string(gamma) + "\n");
}

// weighted relative L2 misfit of every recorded sample against the free solution
double empty_error(const Scenario& sc, double dx) {
    SolverOptions o;
    o.with_reference = false;
    WaveRecording rec = run_forward(sc, make_grid(sc, dx), o);
    double num = 0.0, den = 0.0;
    auto acc = [&](const std::vector<Vec3>& x, const std::vector<double>& w, const std::vector<double>& u) {
        for (int n = 0; n < rec.times(); ++n)
            for (std::size_t i = 0; i < x.size(); ++i) {
                double e = free_space_reference(sc.source, x[i], n * rec.dt);
                double a = u[n * x.size() + i];
                num += w[i] * (a - e) * (a - e);
                den += w[i] * e * e;
            }
    };
    acc(rec.volume_nodes, rec.volume_weights, rec.volume_u);
    acc(rec.sphere_nodes, rec.sphere_weights, rec.sphere_u);
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("free-space reference: closed-form values") {
    BallSource b{Vec3(0.1, 0.2, 0.3), 0.5};
    CHECK(free_space_reference(b, b.p + Vec3(0.2, 0, 0), 0.0) == 0.0);
    CHECK(free_space_reference(b, b.p, 0.3) == doctest::Approx(0.3));
    CHECK(free_space_reference(b, b.p + Vec3(0.1, 0.05, 0), 0.2) == doctest::Approx(0.2));
    CHECK(free_space_reference(b, b.p + Vec3(0, 0.7, 0), 0.7 + 0.5 + 1e-9) == 0.0);
    CHECK(free_space_reference(b, b.p + Vec3(0, 0.7, 0), 0.1) == 0.0);
}

TEST_CASE("free-space reference against Monte Carlo spherical means") {
    // u(x, t) = t * (fraction of the sphere |y - x| = t inside B)
    BallSource b{Vec3::Zero(), 0.5};
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    const int n = 200000;
    std::vector<Vec3> dirs(n);
    for (auto& d : dirs) d = Vec3(g(rng), g(rng), g(rng)).normalized();
    const std::pair<double, double> cases[] = {{0.3, 0.4}, {0.3, 0.7}, {0.8, 0.5}, {0.1, 0.55}, {1.0, 1.2}};
    for (auto [r, t] : cases) {
        Vec3 x(0, r, 0);
        int in = 0;
        for (const auto& d : dirs) in += (x + t * d).norm() < b.eta;
        double mc = t * in / double(n);
        CHECK(std::abs(free_space_reference(b, x, t) - mc) < 4e-3 * t);
    }
}

TEST_CASE("margin rule sizes the box and rejects short boxes") {
    Scenario sc = sphere_scenario();
    SimGrid g = make_grid(sc, 1.0 / 16);
    CHECK(g.dt <= 0.45 * g.dx + 1e-15);
    CHECK(g.steps * g.dt == doctest::Approx(4.0));
    Vec3 lo, hi;
    sc.obstacle.bounds(lo, hi);
    for (int a = 0; a < 3; ++a) CHECK(g.center[a] - g.half[a] < lo[a] - (sc.T + 2 * sc.source.eta) / 2);
    SimGrid small = g;
    small.half *= 0.7;
    CHECK_THROWS_AS(WaveSolver(sc, small, true), Error);
    try {
        WaveSolver s(sc, small, true);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ContaminationMargin);
    }
}

TEST_CASE("solver errors") {
    Scenario sc = sphere_scenario();
    SimGrid g = make_grid(sc, 1.0 / 16);
    SimGrid fast = g;
    fast.steps = static_cast<int>(g.steps * 0.45 / 0.6);
    fast.dt = sc.T / fast.steps;
    try {
        WaveSolver s(sc, fast, true);
        FAIL("expected CflViolation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CflViolation);
    }
    Scenario touch = sc;
    touch.source.p = Vec3(0, 0, 1.4);
    try {
        WaveSolver s(touch, make_grid(touch, 1.0 / 16), true);
        FAIL("expected ObstacleTouchesSource");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ObstacleTouchesSource);
    }
}

TEST_CASE("empty obstacle: recording matches the free solution at eta/12") {
    double e = empty_error(empty_scenario(), 0.5 / 12);
    MESSAGE("relative L2 error " << e);
    CHECK(e < 0.02);
}

TEST_CASE("empty obstacle: grid convergence when dx halves") {
    Scenario sc = empty_scenario(1.0);
    double e1 = empty_error(sc, 0.5 / 8), e2 = empty_error(sc, 0.5 / 16);
    MESSAGE("errors " << e1 << " " << e2 << " factor " << e1 / e2);
    CHECK(e1 / e2 >= 1.5);
    CHECK(e1 / e2 <= 4.5);
}

TEST_CASE("energy: conserved for Neumann, non-increasing with damping") {
    {
        Scenario sc = sphere_scenario(0.0);
        SolverOptions o;
        o.with_reference = false;
        o.record_energy = true;
        WaveRecording rec = run_forward(sc, make_grid(sc, 1.0 / 16), o);
        // level 0 has no stored previous level; start from level 1
        double e0 = rec.energy[1], worst = 0.0;
        for (std::size_t n = 1; n < rec.energy.size(); ++n) worst = std::max(worst, std::abs(rec.energy[n] / e0 - 1));
        MESSAGE("max drift " << worst);
        CHECK(worst < 5e-3);
    }
    {
        Scenario sc = sphere_scenario(0.5);
        SimGrid g = make_grid(sc, 0.5 / 12);
        WaveSolver s(sc, g, true);
        s.start();
        double prev = s.energy(), e0 = prev, worst = 0.0;
        while (s.level() < g.steps) {
            s.step();
            double e = s.energy();
            worst = std::max(worst, (e - prev) / e0);
            prev = e;
        }
        MESSAGE("largest step increase " << worst << ", final/initial " << prev / e0);
        CHECK(worst < 1e-12);
        CHECK(prev < 0.99 * e0);
    }
}

TEST_CASE("finite propagation: recordings are zero before t = rho - eta") {
    Scenario sc = sphere_scenario(0.0, 3.2);
    SolverOptions o;
    o.with_reference = false;
    WaveRecording rec = run_forward(sc, make_grid(sc, 0.5 / 12), o);
    const std::size_t ns = rec.sphere_nodes.size();
    double worst = 0.0;
    for (int n = 0; n < rec.times(); ++n)
        for (std::size_t i = 0; i < ns; ++i)
            if (n * rec.dt < (rec.sphere_nodes[i] - sc.source.p).norm() - sc.source.eta)
                worst = std::max(worst, std::abs(rec.sphere_u[n * ns + i]));
    MESSAGE("largest early sphere sample " << worst);
    CHECK(worst < 1e-12);
}

TEST_CASE("finite propagation: exact zeros outside the lattice cone") {
    // a 7-point leapfrog step reaches one more lattice node in L1 distance
    Scenario sc = empty_scenario(1.0);
    SimGrid g = make_grid(sc, 0.5 / 8);
    WaveSolver s(sc, g, true);
    std::vector<std::size_t> src;
    std::vector<double> w;
    s.volume_nodes(src, w);
    auto ijk = [&](std::size_t id) {
        long i = id % s.nx(), j = (id / s.nx()) % s.ny(), k = id / (static_cast<std::size_t>(s.nx()) * s.ny());
        return std::array<long, 3>{i, j, k};
    };
    std::vector<std::pair<std::size_t, long>> probes;
    for (std::size_t id = 0; id < static_cast<std::size_t>(s.nx()) * s.ny() * s.nz(); id += 31) {
        auto a = ijk(id);
        long best = 1L << 40;
        for (std::size_t q : src) {
            auto b = ijk(q);
            best = std::min(best, std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]));
        }
        if (best > 0) probes.push_back({id, best});
    }
    s.start();
    int nonzero_outside = 0, nonzero_inside = 0;
    while (s.level() < g.steps) {
        s.step();
        for (auto [id, l1] : probes) {
            if (s.node_value(id) == 0.0) continue;
            if (l1 > s.level()) ++nonzero_outside;
            else ++nonzero_inside;
        }
    }
    CHECK(nonzero_inside > 0);
    CHECK(nonzero_outside == 0);
}

TEST_CASE("time reversal returns to the initial levels") {
    Scenario sc = sphere_scenario(0.0, 3.0);
    SimGrid g = make_grid(sc, 0.5 / 6);
    WaveSolver s(sc, g, true);
    s.start();
    auto u1 = s.snapshot();
    const int n = 40;
    for (int i = 0; i < n; ++i) s.step();
    s.reverse();
    for (int i = 0; i < n; ++i) s.step();
    auto back = s.snapshot(), prev = s.previous();
    double scale = 0.0, e0 = 0.0, e1 = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i) {
        scale = std::max(scale, std::abs(u1[i]));
        e0 = std::max(e0, std::abs(back[i]));
        e1 = std::max(e1, std::abs(prev[i] - u1[i]));
    }
    CHECK(e0 < 1e-12 * scale);
    CHECK(e1 < 1e-12 * scale);
}

TEST_CASE("walls beyond the margin do not reach the recording") {
    Scenario sc = sphere_scenario(0.0, 3.2);
    SimGrid g = make_grid(sc, 0.5 / 6);
    SimGrid big = g;
    big.half += Vec3::Constant(6 * g.dx);
    SolverOptions o;
    o.with_reference = false;
    WaveRecording a = run_forward(sc, g, o), b = run_forward(sc, big, o);
    REQUIRE(a.volume_u.size() == b.volume_u.size());
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.volume_u.size(); ++i) {
        worst = std::max(worst, std::abs(a.volume_u[i] - b.volume_u[i]));
        scale = std::max(scale, std::abs(a.volume_u[i]));
    }
    for (std::size_t i = 0; i < a.sphere_u.size(); ++i) worst = std::max(worst, std::abs(a.sphere_u[i] - b.sphere_u[i]));
    CHECK(worst < 1e-12 * scale);
}

TEST_CASE("recording round trip") {
    Scenario sc = sphere_scenario(0.0, 3.2);
    WaveRecording rec = run_forward(sc, make_grid(sc, 0.5 / 6));
    CHECK(rec.volume_u.size() == rec.volume_nodes.size() * rec.times());
    for (std::size_t i = 0; i < rec.volume_nodes.size(); ++i) CHECK(rec.volume_u[i] == 0.0);
    auto dir = std::filesystem::temp_directory_path() / "enclosure_rec_test";
    save_recording(rec, dir.string(), true);
    CHECK(std::filesystem::exists(dir / "samples.csv"));
    WaveRecording back = load_recording(dir.string());
    CHECK(back.scenario_hash == sc.hash());
    CHECK(back.dt == rec.dt);
    CHECK(back.steps == rec.steps);
    CHECK(back.volume_u == rec.volume_u);
    CHECK(back.sphere_ref == rec.sphere_ref);
    CHECK(back.volume_weights == rec.volume_weights);
    std::filesystem::remove_all(dir);
}
