#include "enclosure/numdiff.hpp"

#include <array>

namespace enclosure::numdiff {

namespace {

// central stencils on offsets -2..2, scaled by h^-k later
constexpr std::array<std::array<double, 5>, 5> kStencil = {{
    {0.0, 0.0, 1.0, 0.0, 0.0},
    {0.0, -0.5, 0.0, 0.5, 0.0},
    {0.0, 1.0, -2.0, 1.0, 0.0},
    {-0.5, 1.0, 0.0, -1.0, 0.5},
    {1.0, -4.0, 6.0, -4.0, 1.0},
}};

double mixed_at_step(const Field2& f, const Vec2& x, int a, int b, double h) {
    double s = 0.0;
    for (int i = 0; i < 5; ++i) {
        double wi = kStencil[a][i];
        if (wi == 0.0) continue;
        for (int j = 0; j < 5; ++j) {
            double wj = kStencil[b][j];
            if (wj == 0.0) continue;
            s += wi * wj * f(x + Vec2((i - 2) * h, (j - 2) * h));
        }
    }
    return s / std::pow(h, a + b);
}

}  // namespace

double richardson_even(const std::vector<double>& seq) {
    std::vector<double> t = seq;
    for (std::size_t j = 1; j < t.size(); ++j) {
        double f = std::pow(4.0, static_cast<double>(j));
        for (std::size_t i = t.size() - 1; i >= j; --i) t[i] = t[i] + (t[i] - t[i - 1]) / (f - 1.0);
    }
    return t.back();
}

double mixed_partial(const Field2& f, const Vec2& x, int a, int b, const Options& opt) {
    if (a < 0 || b < 0 || a > 4 || b > 4 || a + b > 4)
        throw Error(ErrorCode::InvalidArgument, "mixed_partial order out of range");
    std::vector<double> seq;
    double h = opt.step;
    for (int l = 0; l < opt.levels; ++l, h *= 0.5) seq.push_back(mixed_at_step(f, x, a, b, h));
    return richardson_even(seq);
}

Vec2 gradient(const Field2& f, const Vec2& x, const Options& opt) {
    return {mixed_partial(f, x, 1, 0, opt), mixed_partial(f, x, 0, 1, opt)};
}

Mat2 hessian(const Field2& f, const Vec2& x, const Options& opt) {
    Mat2 m;
    m(0, 0) = mixed_partial(f, x, 2, 0, opt);
    m(1, 1) = mixed_partial(f, x, 0, 2, opt);
    m(0, 1) = m(1, 0) = mixed_partial(f, x, 1, 1, opt);
    return m;
}

Tensor3 third(const Field2& f, const Vec2& x, const Options& opt) {
    std::array<double, 4> c{};
    for (int k = 0; k < 4; ++k) c[k] = mixed_partial(f, x, 3 - k, k, opt);
    return tensor3_from_components(c);
}

Tensor4 fourth(const Field2& f, const Vec2& x, const Options& opt) {
    std::array<double, 5> c{};
    for (int k = 0; k < 5; ++k) c[k] = mixed_partial(f, x, 4 - k, k, opt);
    return tensor4_from_components(c);
}

double derivative(const std::function<double(double)>& f, double x, int k, const Options& opt) {
    if (k < 1 || k > 4) throw Error(ErrorCode::InvalidArgument, "derivative order out of range");
    std::vector<double> seq;
    double h = opt.step;
    for (int l = 0; l < opt.levels; ++l, h *= 0.5) {
        double s = 0.0;
        for (int i = 0; i < 5; ++i)
            if (kStencil[k][i] != 0.0) s += kStencil[k][i] * f(x + (i - 2) * h);
        seq.push_back(s / std::pow(h, k));
    }
    return richardson_even(seq);
}

}  // namespace enclosure::numdiff
