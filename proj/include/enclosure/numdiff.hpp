#pragma once

#include "enclosure/core.hpp"

#include <functional>
#include <vector>

namespace enclosure::numdiff {

using Field2 = std::function<double(const Vec2&)>;

struct Options {
    double step = 0.1;  // coarsest step of the Richardson table
    int levels = 4;     // steps h, h/2, ..., h/2^(levels-1)
};

// Extrapolates a sequence D(h), D(h/2), ... whose error expands in h^2, h^4, ...
double richardson_even(const std::vector<double>& seq);

// d^{a+b} f / d sigma_1^a d sigma_2^b at x, a + b <= 4, from tensor products of
// central difference stencils.
double mixed_partial(const Field2& f, const Vec2& x, int a, int b, const Options& opt = {});

Vec2 gradient(const Field2& f, const Vec2& x, const Options& opt = {});
Mat2 hessian(const Field2& f, const Vec2& x, const Options& opt = {});
Tensor3 third(const Field2& f, const Vec2& x, const Options& opt = {});
Tensor4 fourth(const Field2& f, const Vec2& x, const Options& opt = {});

// Univariate derivative of order k (1..4).
double derivative(const std::function<double(double)>& f, double x, int k, const Options& opt = {});

}  // namespace enclosure::numdiff
