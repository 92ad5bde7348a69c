#include "enclosure/laplace_oracle.hpp"

#include "enclosure/numdiff.hpp"
#include "enclosure/quadrature.hpp"

#include <algorithm>
#include <cstring>

namespace enclosure {

double g0_eval(const GraphPatch& patch, double d, const Vec2& s) {
    if (!(s.norm() < patch.r_q)) throw Error(ErrorCode::OutsideChart, "point outside chart disc");
    HeightJet j = patch.jet(s);
    double P = std::sqrt(s.squaredNorm() + (d - j.value) * (d - j.value));
    return (j.grad.dot(s) + d - j.value) / (P * P * P);
}

double g1_eval(const GraphPatch& patch, double d, double beta, const Vec2& s) {
    if (!(s.norm() < patch.r_q)) throw Error(ErrorCode::OutsideChart, "point outside chart disc");
    HeightJet j = patch.jet(s);
    double P = std::sqrt(s.squaredNorm() + (d - j.value) * (d - j.value));
    double g0 = (j.grad.dot(s) + d - j.value) / (P * P * P);
    return g0 / P - beta / (P * P) * std::sqrt(1.0 + j.grad.squaredNorm());
}

namespace {

double amplitude(const LaplaceIntegrand& f, const Vec2& s) {
    return f.kind == Amplitude::G0 ? g0_eval(f.patch, f.d, s) : g1_eval(f.patch, f.d, f.beta, s);
}

double polar_rule(const LaplaceIntegrand& f, double tau, double R, int panels, int nang) {
    const Rule1D& g = gauss_legendre(16);
    double total = 0.0;
    for (int a = 0; a < nang; ++a) {
        double ang = 2.0 * kPi * (a + 0.5) / nang;
        Vec2 dir(std::cos(ang), std::sin(ang));
        double ray = 0.0;
        for (int k = 0; k < panels; ++k) {
            double lo = R * k / panels, hi = R * (k + 1) / panels;
            double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
            for (std::size_t i = 0; i < g.x.size(); ++i) {
                double rho = c + h * g.x[i];
                Vec2 s = rho * dir;
                ray += h * g.w[i] * rho * amplitude(f, s) * std::exp(2.0 * tau * phase(f.patch, f.d, s));
            }
        }
        total += ray;
    }
    return total * 2.0 * kPi / nang;
}

}  // namespace

double tilde_integral(const LaplaceIntegrand& f, double tau, const TildeOptions& opt) {
    if (!(tau > 0.0)) throw Error(ErrorCode::NonPositiveTau, "tau must be positive");
    const GraphPatch& P = f.patch;
    PhaseDerivatives pd = phase_derivatives(P, f.d);
    Eigen::SelfAdjointEigenSolver<Mat2> es(-pd.hess);
    double lmin = es.eigenvalues()[0];
    if (!(lmin > 0.0)) throw Error(ErrorCode::DegenerateReflector, "phase maximum is degenerate");
    const double rmax = P.r_q * (1.0 - 1e-12);
    double R = std::min(rmax, std::sqrt(opt.cut / (tau * lmin)) * 1.2);
    // widen until every ray has decayed past the cut, or the chart ends
    for (int it = 0; it < 40 && R < rmax; ++it) {
        bool ok = true;
        for (int a = 0; a < 64 && ok; ++a) {
            double ang = 2.0 * kPi * a / 64;
            if (2.0 * tau * phase(P, f.d, R * Vec2(std::cos(ang), std::sin(ang))) > -opt.cut) ok = false;
        }
        if (ok) break;
        R = std::min(rmax, R * 1.25);
    }
    int panels = 4, nang = 32;
    double prev = polar_rule(f, tau, R, panels, nang);
    for (int lev = 0; lev < opt.max_levels; ++lev) {
        panels *= 2;
        nang *= 2;
        double cur = polar_rule(f, tau, R, panels, nang);
        if (std::abs(cur - prev) <= opt.rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
    throw Error(ErrorCode::QuadratureNonConvergence, "polar quadrature did not settle");
}

PolyLimit extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    if (n < 2 || y.size() != x.size()) throw Error(ErrorCode::InsufficientTauRange, "need at least two points");
    Eigen::MatrixXd V(n, n);
    Eigen::VectorXd b(n);
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < n; ++i) {
        double xi = x[i] / scale;
        V(i, 0) = 1.0;
        for (int k = 1; k < n; ++k) V(i, k) = V(i, k - 1) * xi;
        b[i] = y[i];
    }
    Eigen::VectorXd c = V.colPivHouseholderQr().solve(b);
    return {c[0], c[1] / scale};
}

TwoTerm two_term_fit(const LaplaceIntegrand& f, const std::vector<double>& taus, const TildeOptions& opt) {
    if (taus.size() < 4) throw Error(ErrorCode::InsufficientTauRange, "two_term_fit needs four tau values");
    double sq = std::sqrt(det_gap(f.patch, f.d));
    std::vector<double> x, y;
    for (double t : taus) {
        x.push_back(1.0 / t);
        y.push_back(t * sq * tilde_integral(f, t, opt));
    }
    PolyLimit L = extrapolate_to_zero(x, y);
    return {L.value, L.slope};
}

double G0_laplacian(const GraphPatch& patch, double d, G0Route route) {
    const double gap = det_gap(patch, d);
    if (!(gap > 0.0)) throw Error(ErrorCode::DegenerateReflector, "det gap must be positive");
    const Mat2 B = -(Mat2::Identity() / d - patch.hess).inverse();
    const double d2 = d * d, d3 = d2 * d, d5 = d3 * d2;
    Curvatures cv = curvatures(patch);
    const double H = cv.H, K = cv.K;
    if (route == G0Route::Printed)
        return -8.0 / d3 + (11.0 - 12.0 * d * H) / (2.0 * d5 * gap) - h3_contraction(patch.h3, B) / d2 +
               h4_contraction(patch.h4, B) / (4.0 * d2);
    if (route == G0Route::Corrected)
        return -8.0 / d3 + (4.0 - 6.0 * d * H - 3.0 * (H * H - K) / gap) / (d5 * gap) -
               h3_contraction(patch.h3, B) / d2 + h4_contraction(patch.h4, B) / (4.0 * d2);

    Tensor3 phi3;
    Tensor4 phi4;
    Vec2 g0p;
    Mat2 C;
    double g00;
    if (route == G0Route::Expansion) {
        PhaseDerivatives pd = phase_derivatives(patch, d);
        phi3 = pd.third;
        phi4 = pd.fourth;
        g0p = Vec2::Zero();
        C = (4.0 * patch.hess - 3.0 / d * Mat2::Identity()) / d3;
        g00 = 1.0 / d2;
    } else {
        numdiff::Options opt;
        opt.step = 0.1 * std::min(1.0, patch.r_q);
        auto ph = [&](const Vec2& s) { return phase(patch, d, s); };
        auto g0 = [&](const Vec2& s) { return g0_eval(patch, d, s); };
        phi3 = numdiff::third(ph, Vec2::Zero(), opt);
        phi4 = numdiff::fourth(ph, Vec2::Zero(), opt);
        g0p = numdiff::gradient(g0, Vec2::Zero(), opt);
        C = numdiff::hessian(g0, Vec2::Zero(), opt);
        g00 = g0(Vec2::Zero());
    }
    double first = 0.0;
    for (int s = 0; s < 2; ++s)
        for (int r = 0; r < 2; ++r)
            for (int q = 0; q < 2; ++q)
                for (int p = 0; p < 2; ++p) first += phi3(s, r, q) * B(s, q) * B(r, p) * g0p[p];
    double trCB = (C * B).trace();
    double brace = h3_contraction(phi3, B) - 0.25 * h4_contraction(phi4, B);
    return first - trCB - g00 * brace;
}

double Lemma31Report::max_residual(bool printed_only) const {
    double m = 0.0;
    for (const auto& c : checks)
        if (!printed_only || c.as_printed) m = std::max(m, c.residual);
    return m;
}

const IdentityCheck* Lemma31Report::find(const std::string& id) const {
    for (const auto& c : checks)
        if (c.id == id) return &c;
    return nullptr;
}

Lemma31Report lemma31_check(const GraphPatch& patch, double d) {
    const double gap = det_gap(patch, d);
    if (!(gap > 0.0)) throw Error(ErrorCode::DegenerateReflector, "det gap must be positive");
    Lemma31Report rep;
    numdiff::Options opt;
    opt.step = 0.1 * std::min(1.0, patch.r_q);
    opt.levels = 4;

    const Mat2 h = patch.hess;
    const Mat2 B = -(Mat2::Identity() / d - h).inverse();
    const Curvatures cv = curvatures(patch);
    const double H = cv.H, K = cv.K;
    const double d2 = d * d, d3 = d2 * d, d5 = d3 * d2;
    const double nB2 = B.squaredNorm(), trB = B.trace();

    auto ph = [&](const Vec2& s) { return phase(patch, d, s); };
    auto ps = [&](const Vec2& s) { return psi(patch, d, s); };
    auto g0 = [&](const Vec2& s) { return g0_eval(patch, d, s); };
    auto hf = [&](const Vec2& s) { return patch.h(s); };

    auto add = [&](const std::string& id, double lhs, double rhs, double scale, bool printed = true) {
        double den = std::max({std::abs(lhs), std::abs(rhs), scale});
        rep.checks.push_back({id, lhs, rhs, std::abs(lhs - rhs) / den, printed});
    };

    // first derivatives of the amplitude vanish
    Vec2 g0p = numdiff::gradient(g0, Vec2::Zero(), opt);
    add("amp_grad_zero", g0p.cwiseAbs().maxCoeff(), 0.0, 1.0 / d3);

    // third phase derivatives equal those of h
    Tensor3 phi3 = numdiff::third(ph, Vec2::Zero(), opt);
    {
        double worst = 0.0, wl = 0.0, wr = 0.0;
        for (int i = 0; i < 8; ++i) {
            double e = std::abs(phi3.a[i] - patch.h3.a[i]);
            if (e >= worst) worst = e, wl = phi3.a[i], wr = patch.h3.a[i];
        }
        add("phase3_equals_h3", wl, wr, std::max(patch.h3.max_abs(), 1.0 / d2));
    }

    Tensor4 phi4 = numdiff::fourth(ph, Vec2::Zero(), opt);
    const double phi4BB = h4_contraction(phi4, B), h4BB = h4_contraction(patch.h4, B);
    const double scale4 = std::abs(h4BB) + (2.0 * nB2 + trB * trB) / d3 + 1e-300;
    add("phase4_contraction", phi4BB, h4BB + (14.0 - 16.0 * d * H) / (d3 * gap), scale4);
    add("phase4_contraction/rederived", phi4BB, h4BB + (8.0 - 16.0 * d * H - 12.0 * (H * H - K) / gap) / (d3 * gap), scale4,
        false);

    Mat2 C = numdiff::hessian(g0, Vec2::Zero(), opt);
    add("amp_hessian_trace", (C * B).trace(), 8.0 / d3 - 2.0 * (1.0 - d * H) / (d5 * gap), 8.0 / d3);

    // phase Hessian against gradients of h, at the origin and interior points
    {
        double worst = 0.0, wl = 0.0, wr = 0.0;
        const double rr = 0.3 * patch.r_q;
        const Vec2 pts[] = {Vec2::Zero(), Vec2(rr, 0.0), Vec2(-0.5 * rr, 0.7 * rr), Vec2(0.2 * rr, -0.9 * rr)};
        numdiff::Options o2 = opt;
        o2.step = 0.25 * opt.step;
        for (const Vec2& s : pts) {
            Mat2 phh = numdiff::hessian(ph, s, o2);
            Vec2 php = numdiff::gradient(ph, s, o2);
            Mat2 hh = numdiff::hessian(hf, s, o2);
            HeightJet j = patch.jet(s);
            double P = ps(s);
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) {
                    double lhs = P * phh(p, q);
                    double rhs = php[p] * php[q] -
                                 ((p == q ? 1.0 : 0.0) + hh(p, q) * (j.value - d) + j.grad[p] * j.grad[q]);
                    double e = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1.0});
                    if (e >= worst) worst = e, wl = lhs, wr = rhs;
                }
        }
        add("phase_hessian_relation", wl, wr, 1.0);
    }

    // fourth phase derivatives entrywise against the closed form
    {
        PhaseDerivatives pd = phase_derivatives(patch, d);
        double worst = -1.0, wl = 0.0, wr = 0.0;
        for (int i = 0; i < 16; ++i) {
            double e = std::abs(phi4.a[i] - pd.fourth.a[i]);
            if (e >= worst) worst = e, wl = phi4.a[i], wr = pd.fourth.a[i];
        }
        add("phase4_entries", wl, wr, std::max(pd.fourth.max_abs(), 1.0 / d3));
    }

    // symmetrised delta sum contracted with B twice
    {
        double lhs = 0.0;
        auto dl = [](int i, int j) { return i == j ? 1.0 : 0.0; };
        for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q)
                for (int r = 0; r < 2; ++r)
                    for (int s = 0; s < 2; ++s)
                        lhs += (dl(p, q) * dl(r, s) + dl(q, r) * dl(p, s) + dl(q, s) * dl(p, r)) * B(p, r) * B(q, s);
        add("delta_sum_contraction", lhs, 2.0 * nB2 + trB * trB, 1.0);
    }

    // fourth-order contraction expanded in h and B
    {
        double rhs = (2.0 * nB2 + trB * trB) / d3 -
                     ((B * h * B).trace() + 3.0 * (h * B * B).trace() + 2.0 * trB * (h * B).trace()) / d2 + h4BB;
        add("phase4_contraction_expanded", phi4BB, rhs, scale4);
    }

    // B against h, four relations
    {
        Mat2 hB = B.inverse() + Mat2::Identity() / d;
        add("inverse_relation_a", (h - hB).cwiseAbs().maxCoeff(), 0.0, h.cwiseAbs().maxCoeff() + 1.0 / d);
        Mat2 r2 = B + B * B / d;
        double e = std::max((B * h * B - r2).cwiseAbs().maxCoeff(), (h * B * B - r2).cwiseAbs().maxCoeff());
        add("inverse_relation_b", e, 0.0, std::max(r2.cwiseAbs().maxCoeff(), B.cwiseAbs().maxCoeff()));
        add("inverse_relation_c", (h * B).trace(), 2.0 + trB / d, 2.0);
        add("inverse_relation_d", (B * h * B).trace(), trB + nB2 / d, std::abs(trB) + nB2 / d);
    }

    // contraction gap, printed and re-derived
    add("phase4_gap", d3 * (phi4BB - h4BB), nB2 - trB * trB - 8.0 * d * trB, d3 * scale4);
    add("phase4_gap/rederived", d3 * (phi4BB - h4BB), -2.0 * nB2 - trB * trB - 8.0 * d * trB, d3 * scale4, false);

    // norms of B through the det gap
    {
        double a = 1.0 / d - h(0, 0), b = 1.0 / d - h(1, 1), c = h(0, 1);
        add("gap_norms_a", nB2, (a * a + b * b + 2.0 * c * c) / (gap * gap), 1.0);
        add("gap_norms_b", trB, -(a + b) / gap, 1.0);
        add("gap_norms_c", gap * (nB2 - trB * trB), -2.0, 2.0);
    }

    // amplitude Hessian, with the Hessian of psi taken numerically
    {
        Mat2 psih = numdiff::hessian(ps, Vec2::Zero(), opt);
        Mat2 rhs = (h - 3.0 * psih) / d3;
        add("amp_hessian_matrix", (C - rhs).cwiseAbs().maxCoeff(), 0.0, rhs.cwiseAbs().maxCoeff() + 1.0 / d3);
    }

    // determinant identity for the phase Hessian
    {
        Mat2 phh = numdiff::hessian(ph, Vec2::Zero(), opt);
        add("phase_det_gap", phh.determinant(), gap, gap);
    }
    return rep;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

GraphPatch random_quartic_chart(std::mt19937_64& rng, double d, double amp, double margin, double r_q) {
    auto u = [&] { return amp * (2.0 * uniform01(rng) - 1.0); };
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Mat2 hs;
        hs(0, 0) = u();
        hs(0, 1) = hs(1, 0) = u();
        hs(1, 1) = u();
        std::array<double, 4> c3{u(), u(), u(), u()};
        std::array<double, 5> c4{u(), u(), u(), u(), u()};
        GraphPatch g = make_taylor_patch(Vec3::Zero(), Vec3::UnitZ(), r_q, hs, tensor3_from_components(c3),
                                         tensor4_from_components(c4));
        if (det_gap(g, d) > margin / (d * d)) return g;
    }
    throw Error(ErrorCode::DegenerateReflector, "no admissible random chart found");
}

std::uint64_t chart_hash(const GraphPatch& patch) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](double v) {
        unsigned char b[sizeof(double)];
        std::memcpy(b, &v, sizeof(double));
        for (unsigned char c : b) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    mix(patch.hess(0, 0));
    mix(patch.hess(0, 1));
    mix(patch.hess(1, 1));
    for (double v : patch.h3.a) mix(v);
    for (double v : patch.h4.a) mix(v);
    return h;
}

}  // namespace enclosure
