#include <gtest/gtest.h>

#include <cmath>

#include "gardner/identities.hpp"

using namespace gardner;

namespace {

constexpr double kTol = 1e-7;

std::vector<BreatherParams> sweep() {
    std::vector<BreatherParams> out;
    for (double a : {0.5, 1.0, 2.0})
        for (double b : {0.5, 1.0, 2.0})
            for (double f : {0.1, 0.5, 0.9}) {
                BreatherParams p{a, b, 0.0, 0.3, -0.4};
                p.mu = f * p.mu_max();
                out.push_back(p);
            }
    return out;
}

}  // namespace

TEST(Identities, GatedSuitePassesOverSweep) {
    for (const auto& p : sweep()) {
        const double T = breather_period(p).T;
        for (double t : {0.0, 0.25 * T, 0.5 * T})
            for (IdentityId id : kGatedIdentities) {
                const auto r = check_identity(id, p, t);
                EXPECT_TRUE(r.pass(kTol)) << identity_name(id) << " alpha=" << p.alpha << " beta=" << p.beta
                                          << " mu=" << p.mu << " t=" << t << " rel=" << r.relative();
            }
    }
}

TEST(Identities, ScaleIsLargestSingleTerm) {
    const BreatherParams p{1.0, 1.0, 0.5, 0.0, 0.0};
    const auto r = check_square_identity(p, 0.0);
    EXPECT_GT(r.rel_scale, 1.0);
    EXPECT_LT(r.sup_residual, 1e-10 * r.rel_scale);
}

TEST(Identities, AlternativePrintingsFailAtNonzeroMu) {
    // Data, not gates. The quadratic variant changes a term carrying beta^2 - alpha^2,
    // so it is only visible off the diagonal alpha = beta.
    const BreatherParams p{1.0, 1.0, 0.5, 0.0, 0.0};
    const BreatherParams off{0.5, 2.0, 0.9, 0.0, 0.0};
    EXPECT_GT(check_elliptic_gardner_alt_quadratic(off, 0.0).relative(), 1e-3);
    EXPECT_LT(check_elliptic_gardner_alt_quadratic(p, 0.0).relative(), 1e-12);
    EXPECT_GT(check_elliptic_gardner_alt_gradient(p, 0.0).relative(), 1e-3);
    EXPECT_TRUE(check_elliptic_gardner(p, 0.0).pass(kTol));
}

TEST(Identities, AlternativeGradientPrintingAgreesAtMuOne) {
    // 5 B_x^2 and 5 mu B_x^2 coincide when mu = 1.
    const BreatherParams q{2.0, 2.0, 1.0, 0.0, 0.0};
    EXPECT_TRUE(check_elliptic_gardner_alt_gradient(q, 0.0).pass(kTol));
}

TEST(Identities, EllipticResidualIsTimeInvariant) {
    const BreatherParams p{0.5, 2.0, 0.9, 0.0, 0.0};
    const double T = breather_period(p).T;
    for (double t : {0.0, 0.25 * T, 0.5 * T})
        EXPECT_LT(check_elliptic_gardner(p, t).relative(), kTol);
}

TEST(Identities, DetectsPerturbedParameters) {
    // A residual computed with the wrong speed must fail, so the checks have teeth.
    const BreatherParams p{1.0, 1.0, 0.5, 0.0, 0.0};
    IdentityGrid ig;
    const auto good = check_elliptic_gardner(p, 0.0, ig);
    BreatherParams off = p;
    off.alpha *= 1.0 + 1e-3;
    const auto r = detail::grid_identity(IdentityId::elliptic_gardner, p, 0.0, ig, 2, [&](double x, auto& o) {
        o[0] = gardner_breather(p, 0.0, x).value;
        o[1] = -gardner_breather(off, 0.0, x).value;
    });
    EXPECT_TRUE(good.pass(kTol));
    EXPECT_FALSE(r.pass(kTol));
}

TEST(Identities, NamesAndUnsupportedIds) {
    EXPECT_EQ(identity_name(IdentityId::square), "square");
    EXPECT_THROW(check_identity(IdentityId::b_zero_equation, BreatherParams{1, 1, 0.5, 0, 0}, 0.0),
                 std::invalid_argument);
    EXPECT_THROW(check_identity(IdentityId::square, BreatherParams{1, 1, 2.0, 0, 0}, 0.0), ParameterDomainError);
}
