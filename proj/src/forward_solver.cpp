#include "enclosure/forward_solver.hpp"

#include "enclosure/quadrature.hpp"

#include <algorithm>
#include <limits>

namespace enclosure {

namespace {

// bounding box of everything that is recorded or scatters
void region_bounds(const Scenario& sc, Vec3& lo, Vec3& hi) {
    double reach = sc.source.eta;
    if (sc.R) reach = std::max(reach, *sc.R);
    lo = sc.source.p - Vec3::Constant(reach);
    hi = sc.source.p + Vec3::Constant(reach);
    if (!sc.obstacle.empty()) {
        Vec3 olo, ohi;
        sc.obstacle.bounds(olo, ohi);
        lo = lo.cwiseMin(olo);
        hi = hi.cwiseMax(ohi);
    }
}

double cell_fraction(const Vec3& c, double dx, const BallSource& src) {
    const double r = (c - src.p).norm(), hd = 0.5 * std::sqrt(3.0) * dx;
    if (r + hd <= src.eta) return 1.0;
    if (r - hd >= src.eta) return 0.0;
    const int m = 16;
    int inside = 0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int e = 0; e < m; ++e) {
                Vec3 x = c + dx * Vec3((a + 0.5) / m - 0.5, (b + 0.5) / m - 0.5, (e + 0.5) / m - 0.5);
                if ((x - src.p).squaredNorm() < src.eta * src.eta) ++inside;
            }
    return static_cast<double>(inside) / (m * m * m);
}

}  // namespace

SimGrid make_grid(const Scenario& sc, double dx, double dt_factor) {
    SimGrid g;
    g.dx = dx > 0.0 ? dx : (sc.grid.dx > 0.0 ? sc.grid.dx : sc.source.eta / 12.0);
    if (!(sc.T > 0.0)) throw Error(ErrorCode::SchemaError, "final time must be positive for the solver");
    Vec3 lo, hi;
    region_bounds(sc, lo, hi);
    const double margin = 0.5 * (sc.T + 2.0 * sc.source.eta) + 2.0 * g.dx;
    g.center = 0.5 * (lo + hi);
    g.half = 0.5 * (hi - lo) + Vec3::Constant(margin);
    // whole number of cells per axis
    for (int a = 0; a < 3; ++a) g.half[a] = std::ceil(g.half[a] / g.dx) * g.dx;
    g.steps = static_cast<int>(std::ceil(sc.T / (dt_factor * g.dx) - 1e-9));
    g.dt = sc.T / g.steps;
    return g;
}

double free_space_reference(const BallSource& src, const Vec3& x, double t) {
    const double r = (x - src.p).norm(), eta = src.eta;
    if (t <= 0.0) return 0.0;
    if (r + t <= eta) return t;
    if (t > r + eta || t <= std::abs(r - eta)) {
        // inside the ball and sphere of radius t still inside: handled above
        return 0.0;
    }
    if (r <= 0.0) return 0.0;
    return (eta * eta - (t - r) * (t - r)) / (4.0 * r);
}

WaveSolver::WaveSolver(const Scenario& sc, const SimGrid& grid, bool with_obstacle, double probe_factor)
    : sc_(sc), grid_(grid) {
    if (!(grid.dx > 0.0) || !(grid.dt > 0.0) || grid.steps <= 0)
        throw Error(ErrorCode::InvalidArgument, "grid is not initialised");
    if (grid.dt > 0.9 * grid.dx / std::sqrt(3.0) * (1.0 + 1e-12))
        throw Error(ErrorCode::CflViolation, "dt exceeds 0.9 dx / sqrt(3)");
    if (with_obstacle && !sc.obstacle.empty() && !sc.obstacle.closed())
        throw Error(ErrorCode::UnsupportedObstacle, "the solver needs closed obstacle components");
    if (with_obstacle && !sc.obstacle.empty() && sc.obstacle.signed_distance(sc.source.p) <= sc.source.eta)
        throw Error(ErrorCode::ObstacleTouchesSource, "obstacle meets the closed source ball");
    // margin rule
    Vec3 lo, hi;
    region_bounds(sc, lo, hi);
    const double need = 0.5 * (sc.T + 2.0 * sc.source.eta);
    const double T = grid.dt * grid.steps;
    for (int a = 0; a < 3; ++a) {
        double room = std::min(lo[a] - (grid.center[a] - grid.half[a]), grid.center[a] + grid.half[a] - hi[a]);
        if (!(room > need) || T > sc.T * (1.0 + 1e-9) + 1e-12)
            throw Error(ErrorCode::ContaminationMargin, "box too small for the final time");
    }
    nx_ = static_cast<int>(std::llround(2.0 * grid.half[0] / grid.dx)) + 1;
    ny_ = static_cast<int>(std::llround(2.0 * grid.half[1] / grid.dx)) + 1;
    nz_ = static_cast<int>(std::llround(2.0 * grid.half[2] / grid.dx)) + 1;
    lo_ = grid.center - grid.half;
    const std::size_t n = static_cast<std::size_t>(nx_) * ny_ * nz_;
    mask_.assign(n, 1);
    frac_.assign(n, 0.0);
    prev_.assign(n, 0.0);
    cur_.assign(n, 0.0);
    build_masks(with_obstacle, probe_factor);
    build_source();
}

Vec3 WaveSolver::node(std::size_t idx) const {
    std::size_t i = idx % nx_, j = (idx / nx_) % ny_, k = idx / (static_cast<std::size_t>(nx_) * ny_);
    return lo_ + grid_.dx * Vec3(double(i), double(j), double(k));
}

void WaveSolver::build_masks(bool with_obstacle, double probe_factor) {
    const double dx = grid_.dx;
    for (int k = 0; k < nz_; ++k)
        for (int j = 0; j < ny_; ++j)
            for (int i = 0; i < nx_; ++i)
                if (std::min({i, j, k}) < wall_ || i > nx_ - 1 - wall_ || j > ny_ - 1 - wall_ || k > nz_ - 1 - wall_)
                    mask_[index(i, j, k)] = 3;
    if (!with_obstacle || sc_.obstacle.empty()) return;

    // candidate nodes: inside the obstacle bounding box
    Vec3 olo, ohi;
    sc_.obstacle.bounds(olo, ohi);
    auto clampi = [](long v, int lo, int hi) { return static_cast<int>(std::clamp<long>(v, lo, hi)); };
    const int w = wall_;
    int i0 = clampi(std::lround(std::floor((olo.x() - lo_.x()) / dx)) - 1, w, nx_ - 1 - w);
    int i1 = clampi(std::lround(std::ceil((ohi.x() - lo_.x()) / dx)) + 1, w, nx_ - 1 - w);
    int j0 = clampi(std::lround(std::floor((olo.y() - lo_.y()) / dx)) - 1, w, ny_ - 1 - w);
    int j1 = clampi(std::lround(std::ceil((ohi.y() - lo_.y()) / dx)) + 1, w, ny_ - 1 - w);
    int k0 = clampi(std::lround(std::floor((olo.z() - lo_.z()) / dx)) - 1, w, nz_ - 1 - w);
    int k1 = clampi(std::lround(std::ceil((ohi.z() - lo_.z()) / dx)) + 1, w, nz_ - 1 - w);
    for (int k = k0; k <= k1; ++k)
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                std::size_t id = index(i, j, k);
                if (sc_.obstacle.signed_distance(node(id)) < 0.0) mask_[id] = 0;
            }
    const std::size_t sx = 1, sy = nx_, sz = static_cast<std::size_t>(nx_) * ny_;
    std::vector<std::size_t> ghost_ids;
    for (int k = k0; k <= k1; ++k)
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                std::size_t id = index(i, j, k);
                if (mask_[id] != 0) continue;
                bool near = false;
                for (int r = 1; r <= w && !near; ++r)
                    near = mask_[id - r * sx] == 1 || mask_[id + r * sx] == 1 || mask_[id - r * sy] == 1 ||
                           mask_[id + r * sy] == 1 || mask_[id - r * sz] == 1 || mask_[id + r * sz] == 1;
                if (near) ghost_ids.push_back(id);
            }
    for (std::size_t id : ghost_ids) mask_[id] = 2;

    const double s1 = probe_factor * std::sqrt(3.0) * dx, s2 = 2.0 * s1;
    for (std::size_t id : ghost_ids) {
        Ghost g{};
        g.idx = id;
        Vec3 x = node(id);
        Projection pr = sc_.obstacle.project(x);
        const double l = -pr.signed_distance;
        if (!probe(pr.point + s1 * pr.normal, g.c1, g.w1) || !probe(pr.point + s2 * pr.normal, g.c2, g.w2))
            throw Error(ErrorCode::UnsupportedObstacle, "normal probe leaves the fluid; refine the grid");
        // quadratic through s = -l, s1, s2
        const double xg = -l;
        g.bg = (0 - s1) * (0 - s2) / ((xg - s1) * (xg - s2));
        g.b1 = (0 - xg) * (0 - s2) / ((s1 - xg) * (s1 - s2));
        g.b2 = (0 - xg) * (0 - s1) / ((s2 - xg) * (s2 - s1));
        g.ag = ((0 - s1) + (0 - s2)) / ((xg - s1) * (xg - s2));
        g.a1 = ((0 - xg) + (0 - s2)) / ((s1 - xg) * (s1 - s2));
        g.a2 = ((0 - xg) + (0 - s1)) / ((s2 - xg) * (s2 - s1));
        g.beta = sc_.robin.beta_on(pr.component);
        g.gamma = sc_.robin.gamma_on(pr.component);
        ghosts_.push_back(g);
    }
}

bool WaveSolver::probe(const Vec3& x, std::array<std::size_t, 8>& c, std::array<double, 8>& w) const {
    Vec3 r = (x - lo_) / grid_.dx;
    int i = static_cast<int>(std::floor(r.x())), j = static_cast<int>(std::floor(r.y())),
        k = static_cast<int>(std::floor(r.z()));
    if (i < 0 || j < 0 || k < 0 || i >= nx_ - 1 || j >= ny_ - 1 || k >= nz_ - 1) return false;
    double fx = r.x() - i, fy = r.y() - j, fz = r.z() - k;
    int n = 0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
                c[n] = index(i + di, j + dj, k + dk);
                w[n] = (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) * (dk ? fz : 1 - fz);
                if (mask_[c[n]] != 1 && w[n] > 0.0) return false;
                ++n;
            }
    return true;
}

void WaveSolver::build_source() {
    const double dx = grid_.dx;
    const BallSource& s = sc_.source;
    Vec3 a = (s.p - lo_) / dx;
    const int pad = static_cast<int>(std::ceil(s.eta / dx)) + 2;
    for (int k = static_cast<int>(a.z()) - pad; k <= static_cast<int>(a.z()) + pad + 1; ++k)
        for (int j = static_cast<int>(a.y()) - pad; j <= static_cast<int>(a.y()) + pad + 1; ++j)
            for (int i = static_cast<int>(a.x()) - pad; i <= static_cast<int>(a.x()) + pad + 1; ++i) {
                if (std::min({i, j, k}) < wall_ || i > nx_ - 1 - wall_ || j > ny_ - 1 - wall_ || k > nz_ - 1 - wall_)
                    continue;
                std::size_t id = index(i, j, k);
                double f = cell_fraction(node(id), dx, s);
                if (f > 0.0) {
                    if (mask_[id] != 1) throw Error(ErrorCode::ObstacleTouchesSource, "source cell is not fluid");
                    frac_[id] = f;
                    src_idx_.push_back(id);
                }
            }
}

void WaveSolver::volume_nodes(std::vector<std::size_t>& idx, std::vector<double>& w) const {
    idx = src_idx_;
    w.clear();
    const double v = grid_.dx * grid_.dx * grid_.dx;
    for (std::size_t id : src_idx_) w.push_back(frac_[id] * v);
}

void WaveSolver::update_ghosts(std::vector<double>& u, bool first) {
    const double dt = grid_.dt;
    for (auto& g : ghosts_) {
        double u1 = 0.0, u2 = 0.0;
        for (int m = 0; m < 8; ++m) {
            u1 += g.w1[m] * u[g.c1[m]];
            u2 += g.w2[m] * u[g.c2[m]];
        }
        // d/ds u - gamma d/dt u - beta u = 0 at s = 0, BDF2 in time
        double kap = first ? g.gamma / dt : 1.5 * g.gamma / dt;
        double hist = first ? -g.gamma * g.u0_n / dt : g.gamma * (-2.0 * g.u0_n + 0.5 * g.u0_nm1) / dt;
        double cg = g.ag - (g.beta + kap) * g.bg;
        double rest = (g.a1 - (g.beta + kap) * g.b1) * u1 + (g.a2 - (g.beta + kap) * g.b2) * u2 - hist;
        double ug = -rest / cg;
        u[g.idx] = ug;
        g.u0_nm1 = g.u0_n;
        g.u0_n = g.bg * ug + g.b1 * u1 + g.b2 * u2;
    }
}

void WaveSolver::start() {
    std::fill(prev_.begin(), prev_.end(), 0.0);
    std::fill(cur_.begin(), cur_.end(), 0.0);
    for (auto& g : ghosts_) g.u0_n = g.u0_nm1 = 0.0;
    const double dt = grid_.dt, dx = grid_.dx;
    const std::size_t sx = 1, sy = nx_, sz = static_cast<std::size_t>(nx_) * ny_;
    // u^1 = dt f + dt^3/6 Lap_h f
    const double c6 = dt * dt * dt / 6.0 / (dx * dx);
    for (std::size_t id : src_idx_) {
        double f = frac_[id];
        cur_[id] += dt * f - 6.0 * c6 * f;
        for (std::size_t s : {sx, sy, sz}) {
            if (mask_[id - s] == 1) cur_[id - s] += c6 * f;
            if (mask_[id + s] == 1) cur_[id + s] += c6 * f;
        }
    }
    update_ghosts(cur_, true);
    level_ = 1;
}

void WaveSolver::step() {
    const double c2 = (grid_.dt / grid_.dx) * (grid_.dt / grid_.dx);
    const std::size_t sx = 1, sy = nx_, sz = static_cast<std::size_t>(nx_) * ny_;
    const double* u = cur_.data();
    double* up = prev_.data();
    const std::uint8_t* mk = mask_.data();
    const int nx = nx_, ny = ny_, nz = nz_;
#pragma omp parallel for schedule(static)
    for (int k = 1; k < nz - 1; ++k)
        for (int j = 1; j < ny - 1; ++j) {
            std::size_t base = static_cast<std::size_t>(nx) * (j + static_cast<std::size_t>(ny) * k);
            for (int i = 1; i < nx - 1; ++i) {
                std::size_t id = base + i;
                double lap = u[id - sx] + u[id + sx] + u[id - sy] + u[id + sy] + u[id - sz] + u[id + sz] - 6.0 * u[id];
                double f = mk[id] == 1 ? 1.0 : 0.0;
                up[id] = f * (2.0 * u[id] - up[id] + c2 * lap);
            }
        }
    update_ghosts(prev_, false);
    std::swap(prev_, cur_);
    ++level_;
}

void WaveSolver::reverse() {
    std::swap(prev_, cur_);
    // boundary history runs backwards as well
    for (auto& g : ghosts_) std::swap(g.u0_n, g.u0_nm1);
}

double WaveSolver::energy() const {
    const double dt = grid_.dt, dx = grid_.dx;
    const std::size_t sx = 1, sy = nx_, sz = static_cast<std::size_t>(nx_) * ny_;
    const int w = wall_;
    auto lap = [&](const std::vector<double>& u, std::size_t id) {
        return u[id - sx] + u[id + sx] + u[id - sy] + u[id + sy] + u[id - sz] + u[id + sz] - 6.0 * u[id];
    };
    // leapfrog invariant: |v|^2 + <u^n, A u^(n-1)> over fluid nodes, A = -Lap_h
    double kin = 0.0, pot = 0.0;
#pragma omp parallel for reduction(+ : kin, pot) schedule(static)
    for (int k = w; k < nz_ - w; ++k)
        for (int j = w; j < ny_ - w; ++j)
            for (int i = w; i < nx_ - w; ++i) {
                std::size_t id = index(i, j, k);
                if (mask_[id] != 1) continue;
                double v = (cur_[id] - prev_[id]) / dt;
                kin += v * v;
                pot -= 0.5 * (cur_[id] * lap(prev_, id) + prev_[id] * lap(cur_, id));
            }
    return 0.5 * dx * dx * dx * (kin + pot / (dx * dx));
}

double WaveSolver::value(const Vec3& x) const {
    Vec3 r = (x - lo_) / grid_.dx;
    int i = std::clamp(static_cast<int>(std::floor(r.x())), 0, nx_ - 2);
    int j = std::clamp(static_cast<int>(std::floor(r.y())), 0, ny_ - 2);
    int k = std::clamp(static_cast<int>(std::floor(r.z())), 0, nz_ - 2);
    double fx = r.x() - i, fy = r.y() - j, fz = r.z() - k;
    double v = 0.0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di)
                v += (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) * (dk ? fz : 1 - fz) * cur_[index(i + di, j + dj, k + dk)];
    return v;
}

namespace {

struct Sampler {
    std::vector<std::size_t> vol;
    std::vector<std::array<std::size_t, 8>> sc;
    std::vector<std::array<double, 8>> sw;
};

void record(const WaveSolver& s, const Sampler& sm, std::vector<double>& vu, std::vector<double>& su) {
    for (std::size_t id : sm.vol) vu.push_back(s.node_value(id));
    for (std::size_t k = 0; k < sm.sc.size(); ++k) {
        double v = 0.0;
        for (int m = 0; m < 8; ++m) v += sm.sw[k][m] * s.node_value(sm.sc[k][m]);
        su.push_back(v);
    }
}

void run_one(const Scenario& sc, const SimGrid& grid, bool obstacle, const SolverOptions& opt, WaveRecording& rec,
             std::vector<double>& vu, std::vector<double>& su, bool fill_nodes) {
    WaveSolver s(sc, grid, obstacle, opt.probe_factor);
    Sampler sm;
    std::vector<double> w;
    s.volume_nodes(sm.vol, w);
    if (fill_nodes) {
        rec.volume_nodes.clear();
        for (std::size_t id : sm.vol) rec.volume_nodes.push_back(s.node(id));
        rec.volume_weights = w;
    }
    if (sc.R) {
        if (fill_nodes) {
            SphereRule rule = product_sphere_rule(sc.grid.sphere_nodes);
            rec.sphere_nodes.clear();
            rec.sphere_weights.clear();
            for (std::size_t k = 0; k < rule.size(); ++k) {
                rec.sphere_nodes.push_back(sc.source.p + *sc.R * rule.dir[k]);
                rec.sphere_weights.push_back(rule.w[k] * *sc.R * *sc.R);
            }
        }
        Vec3 lo = grid.center - grid.half;
        for (const Vec3& x : rec.sphere_nodes) {
            Vec3 r = (x - lo) / grid.dx;
            int i = static_cast<int>(std::floor(r.x())), j = static_cast<int>(std::floor(r.y())),
                k = static_cast<int>(std::floor(r.z()));
            std::array<std::size_t, 8> c;
            std::array<double, 8> ww;
            double fx = r.x() - i, fy = r.y() - j, fz = r.z() - k;
            int n = 0;
            for (int dk = 0; dk < 2; ++dk)
                for (int dj = 0; dj < 2; ++dj)
                    for (int di = 0; di < 2; ++di) {
                        c[n] = s.index(i + di, j + dj, k + dk);
                        ww[n] = (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) * (dk ? fz : 1 - fz);
                        ++n;
                    }
            sm.sc.push_back(c);
            sm.sw.push_back(ww);
        }
    }
    const std::size_t per = sm.vol.size() + 0;
    vu.reserve(per * (grid.steps + 1));
    su.reserve(sm.sc.size() * (grid.steps + 1));
    for (std::size_t i = 0; i < sm.vol.size(); ++i) vu.push_back(0.0);
    for (std::size_t i = 0; i < sm.sc.size(); ++i) su.push_back(0.0);
    s.start();
    record(s, sm, vu, su);
    if (fill_nodes && opt.record_energy) rec.energy.push_back(s.energy());
    while (s.level() < grid.steps) {
        s.step();
        record(s, sm, vu, su);
        if (fill_nodes && opt.record_energy) rec.energy.push_back(s.energy());
    }
}

}  // namespace

WaveRecording run_forward(const Scenario& sc, const SimGrid& grid, const SolverOptions& opt) {
    WaveRecording rec;
    rec.dt = grid.dt;
    rec.steps = grid.steps;
    rec.dx = grid.dx;
    rec.scenario_hash = sc.hash();
    rec.source = sc.source;
    rec.R = sc.R ? *sc.R : 0.0;
    rec.gamma = sc.robin.gamma;
    rec.beta = sc.robin.beta;
    run_one(sc, grid, opt.with_obstacle, opt, rec, rec.volume_u, rec.sphere_u, true);
    if (opt.with_reference) run_one(sc, grid, false, opt, rec, rec.volume_ref, rec.sphere_ref, false);
    return rec;
}

}  // namespace enclosure
