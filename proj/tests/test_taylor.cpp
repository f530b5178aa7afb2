#include <gtest/gtest.h>

#include <cmath>

#include "gardner/taylor.hpp"

using namespace gardner::ad;

namespace {

// Coefficient k of a Taylor<double,K> is f^(k)/k!.
double factorial(int k) { return k <= 1 ? 1.0 : k * factorial(k - 1); }

}  // namespace

TEST(Taylor, ExpCoefficientsAreExpOverFactorial) {
    using S = Taylor<double, 6>;
    const double x0 = 0.37;
    const S e = exp(S::variable(x0));
    for (int k = 0; k <= 6; ++k) EXPECT_NEAR(e[k], std::exp(x0) / factorial(k), 1e-14);
}

TEST(Taylor, LogInvertsExp) {
    using S = Taylor<double, 5>;
    const S x = S::variable(0.8);
    const S r = log(exp(x));
    EXPECT_NEAR(r[0], 0.8, 1e-15);
    EXPECT_NEAR(r[1], 1.0, 1e-14);
    for (int k = 2; k <= 5; ++k) EXPECT_NEAR(r[k], 0.0, 1e-13);
}

TEST(Taylor, SinCosDerivativesCycle) {
    using S = Taylor<double, 4>;
    const double x0 = 1.1;
    const S s = sin(S::variable(x0));
    const S c = cos(S::variable(x0));
    EXPECT_NEAR(s[1], std::cos(x0), 1e-15);
    EXPECT_NEAR(2.0 * s[2], -std::sin(x0), 1e-15);
    EXPECT_NEAR(6.0 * s[3], -std::cos(x0), 1e-14);
    EXPECT_NEAR(24.0 * c[4], std::cos(x0), 1e-14);
}

TEST(Taylor, HyperbolicIdentity) {
    using S = Taylor<double, 5>;
    const S x = S::variable(-0.6);
    const S id = cosh(x) * cosh(x) - sinh(x) * sinh(x);
    EXPECT_NEAR(id[0], 1.0, 1e-14);
    for (int k = 1; k <= 5; ++k) EXPECT_NEAR(id[k], 0.0, 1e-13);
}

TEST(Taylor, SqrtSquaresBack) {
    using S = Taylor<double, 4>;
    const S x = S::variable(2.3);
    const S r = sqrt(x) * sqrt(x);
    EXPECT_NEAR(r[0], 2.3, 1e-14);
    EXPECT_NEAR(r[1], 1.0, 1e-14);
    for (int k = 2; k <= 4; ++k) EXPECT_NEAR(r[k], 0.0, 1e-13);
}

TEST(Taylor, Atan2DerivativeMatchesClosedForm) {
    using S = Taylor<double, 3>;
    // theta(x) = atan2(sin 2x, 1 + x^2); compare against a centered difference.
    auto theta = [](double x) { return std::atan2(std::sin(2 * x), 1 + x * x); };
    const double x0 = 0.4, h1 = 1e-5, h = 1e-4;
    const S x = S::variable(x0);
    const S th = atan2(sin(2.0 * x), 1.0 + x * x);
    EXPECT_NEAR(th[0], theta(x0), 1e-15);
    EXPECT_NEAR(th[1], (theta(x0 + h1) - theta(x0 - h1)) / (2 * h1), 1e-8);
    EXPECT_NEAR(2.0 * th[2], (theta(x0 + h) - 2 * theta(x0) + theta(x0 - h)) / (h * h), 1e-5);
}

TEST(Taylor, NestedSeriesGiveMixedPartials) {
    using Inner = Taylor<double, 2>;
    using Outer = Taylor<Inner, 2>;
    // f(x, y) = exp(x y): d2f/dxdy at (x0, y0) = (1 + x0 y0) exp(x0 y0).
    const double x0 = 0.3, y0 = -0.7;
    const Outer x(Inner::variable(x0));
    Outer y = Outer::variable(Inner(y0));
    const Outer f = exp(x * y);
    EXPECT_NEAR(f[1][1], (1 + x0 * y0) * std::exp(x0 * y0), 1e-14);
    EXPECT_NEAR(f[0][0], std::exp(x0 * y0), 1e-15);
}
