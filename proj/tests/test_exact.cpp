#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gardner/exact.hpp"

using namespace gardner;

namespace {

// Gardner residual w_t + w_xxx + 6 mu w w_x + 3 w^2 w_x from a jet.
double gardner_residual(const Jet& j, double mu) {
    return j.dt + j.dx3 + 6.0 * mu * j.value * j.dx1 + 3.0 * j.value * j.value * j.dx1;
}

// mKdV residual u_t + u_xxx + 3 u^2 u_x.
double mkdv_residual(const Jet& j) { return j.dt + j.dx3 + 3.0 * j.value * j.value * j.dx1; }

const BreatherParams kPoints[] = {
    {1.0, 1.0, 0.5, 0.0, 0.0},  {0.5, 2.0, 0.9, 0.3, -1.1}, {2.0, 0.5, 0.3, 0.4, -0.7},
    {1.0, 1.0, 0.0, 0.0, 0.0},  {0.5, 0.5, 0.45, -0.2, 0.6},
};

}  // namespace

TEST(BreatherParams, Admissibility) {
    EXPECT_NO_THROW((BreatherParams{1, 1, 0.99, 0, 0}.validate()));
    EXPECT_THROW((BreatherParams{1, 1, 1.0, 0, 0}.validate()), ParameterDomainError);
    EXPECT_THROW((BreatherParams{0, 1, 0.1, 0, 0}.validate()), ParameterDomainError);
    EXPECT_THROW((BreatherParams{1, 1, NAN, 0, 0}.validate()), ParameterDomainError);
    EXPECT_DOUBLE_EQ((BreatherParams{1, 1, 0, 0, 0}.mu_max()), 1.0);
}

// Values of 2 sqrt2 d/dx atan(G/F) from 20-digit arithmetic on the explicit formula.
TEST(Breather, MatchesHighPrecisionOracle) {
    const BreatherParams p{1.0, 1.0, 0.5, 0.0, 0.0};
    EXPECT_NEAR(gardner_breather(p, 0.0, 0.3).value, 2.4737131931386742555, 1e-13);
    EXPECT_NEAR(gardner_breather(p, 0.0, -1.7).value, -1.6282752571520503782, 1e-13);
    EXPECT_NEAR(gardner_breather(p, 0.2, 0.4).value, 2.0998523757928889681, 1e-13);
    const BreatherParams q{2.0, 0.5, 0.3, 0.4, -0.7};
    EXPECT_NEAR(gardner_breather(q, 0.1, 1.3).value, -0.53094563971926838374, 1e-13);
}

TEST(Breather, SolvesGardnerEquation) {
    for (const auto& p : kPoints)
        for (double t : {0.0, 0.37, 1.9})
            for (double x = -12.0; x <= 12.0; x += 0.731) {
                const Jet j = gardner_breather(p, t, x);
                const double scale = std::abs(j.dt) + std::abs(j.dx3) + 1.0;
                EXPECT_LT(std::abs(gardner_residual(j, p.mu)) / scale, 1e-11)
                    << "alpha=" << p.alpha << " beta=" << p.beta << " mu=" << p.mu << " t=" << t
                    << " x=" << x;
            }
}

TEST(Breather, NvbcProfileSolvesMkdv) {
    for (const auto& p : kPoints)
        for (double x = -10.0; x <= 10.0; x += 0.913) {
            const Jet j = mkdv_nvbc_breather(p, 0.6, x);
            EXPECT_LT(std::abs(mkdv_residual(j)) / (std::abs(j.dt) + std::abs(j.dx3) + 1.0), 1e-11);
            // Galilean relation to the Gardner profile.
            const double g = gardner_breather(p, 0.6, x - 3.0 * p.mu * p.mu * 0.6).value;
            EXPECT_NEAR(j.value, p.mu + g, 1e-12);
        }
}

TEST(Breather, PeriodicUpToShift) {
    for (const auto& p : kPoints) {
        const auto per = breather_period(p);
        for (double x = -8.0; x <= 8.0; x += 0.77)
            EXPECT_NEAR(gardner_breather(p, per.T, x + per.L_shift).value, gardner_breather(p, 0.0, x).value,
                        1e-11);
    }
}

TEST(Breather, ShiftDerivativesMatchFiniteDifferences) {
    const double h = 1e-5;
    for (const auto& p : kPoints)
        for (double x : {-3.1, -0.4, 0.0, 1.7}) {
            const auto k = kernel_directions(p, 0.3, x);
            const auto fd = [&](double d1, double d2) {
                return gardner_breather(p.with_shifts(p.x1 + d1, p.x2 + d2), 0.3, x).value;
            };
            EXPECT_NEAR(k.first.value, (fd(h, 0) - fd(-h, 0)) / (2 * h), 1e-7);
            EXPECT_NEAR(k.second.value, (fd(0, h) - fd(0, -h)) / (2 * h), 1e-7);
        }
}

TEST(Breather, ScalingDerivativesMatchFiniteDifferences) {
    const double h = 1e-5;
    for (const auto& p : kPoints)
        for (double x : {-2.2, 0.5, 2.9}) {
            const auto s = scaling_directions(p, 0.0, x);
            BreatherParams ap = p, am = p, bp = p, bm = p;
            ap.alpha += h;
            am.alpha -= h;
            bp.beta += h;
            bm.beta -= h;
            auto v = [&](const BreatherParams& q) { return gardner_breather(q, 0.0, x).value; };
            EXPECT_NEAR(s.first.value, (v(ap) - v(am)) / (2 * h), 1e-6);
            EXPECT_NEAR(s.second.value, (v(bp) - v(bm)) / (2 * h), 1e-6);
        }
}

TEST(Breather, ShiftDirectionsAreLinearlyIndependent) {
    const BreatherParams p{1.0, 1.0, 0.5, 0.0, 0.0};
    const Grid g(40.0, 2048);
    Field b1(g), b2(g);
    for (int i = 0; i < g.size(); ++i) {
        const auto k = kernel_directions(p, 0.0, g.node(i));
        b1[i] = k.first.value;
        b2[i] = k.second.value;
    }
    const double g11 = inner_product(b1, b1), g22 = inner_product(b2, b2), g12 = inner_product(b1, b2);
    EXPECT_GT(g11 * g22 - g12 * g12, 1e-3 * g11 * g22);
}

TEST(Soliton, ProfileSolvesTravellingWaveEquation) {
    // Q'' - c Q + 3 mu Q^2 + Q^3 = 0, also for mu < 0.
    for (const SolitonParams s : {SolitonParams{1.0, 0.5}, SolitonParams{4.0, -0.3}, SolitonParams{0.25, 0.0}})
        for (double x = -6.0; x <= 6.0; x += 0.5) {
            const Jet q = gardner_soliton(s, x);
            EXPECT_NEAR(q.dx2 - s.c * q.value + 3 * s.mu * q.value * q.value + q.value * q.value * q.value,
                        0.0, 1e-12);
        }
    EXPECT_THROW(gardner_soliton({-1.0, 0.1}, 0.0), ParameterDomainError);
}

TEST(DoublePole, SolvesGardnerEquation) {
    const DoublePoleParams p{1.0, 0.4, 0.2, -0.3};
    for (double x = -8.0; x <= 8.0; x += 0.61) {
        const Jet j = double_pole_jet(p, 0.4, x);
        EXPECT_LT(std::abs(gardner_residual(j, p.mu)) / (std::abs(j.dt) + std::abs(j.dx3) + 1.0), 1e-10);
    }
}

TEST(DoublePole, IsTheSmallAlphaLimit) {
    const DoublePoleParams d{1.0, 0.4, 0.0, 0.0};
    const BreatherParams p{1e-4, 1.0, 0.4, 0.0, 0.0};
    for (double x = -5.0; x <= 5.0; x += 0.5)
        EXPECT_NEAR(gardner_breather(p, 0.0, x).value, double_pole(d, 0.0, x), 1e-6);
}

TEST(Breather, AntiderivativeIsContinuousAndMatchesCumulativeIntegral) {
    const BreatherParams p{1.0, 1.0, 0.5, 0.0, 0.0};
    const Grid g(40.0, 4096);
    const Field B = breather_field(p, 0.0, g);
    const Field th = unwrapped_phase_field(p, 0.0, g);
    const Field c = cumulative_integral(B);
    for (int i = 0; i < g.size(); i += 16)
        EXPECT_NEAR(2.0 * kSqrt2 * (th[i] - th[0]), c[i], 1e-9) << "x=" << g.node(i);
}

TEST(ResolvedGrid, MeetsSpacingRule) {
    for (double a : {0.5, 1.0, 2.0})
        for (double b : {0.5, 1.0, 2.0}) {
            const Grid g = resolved_grid({a, b, 0.1, 0, 0});
            EXPECT_DOUBLE_EQ(g.half_length(), 40.0 / b);
            EXPECT_LE(g.spacing(), std::min(0.04 / b, 0.08 / a) * (1 + 1e-12));
            EXPECT_GE(g.size(), 2048);
            EXPECT_EQ(g.size() & (g.size() - 1), 0);
        }
}
