#include <gtest/gtest.h>

#include <cmath>

#include "gardner/functionals.hpp"
#include "gardner/spectral.hpp"

using namespace gardner;

namespace {

const BreatherParams kRef{1.0, 1.0, 0.5, 0.0, 0.0};

// Assembly and eigensolve are the slow part; share them across tests.
struct RefFixture : ::testing::Test {
    static const SymmetricOperator& op() {
        static const SymmetricOperator o = assemble(kRef, 0.0, Grid(40.0, 1024));
        return o;
    }
    static const SpectrumReport& rep() {
        static const SpectrumReport r = spectrum(op(), 8);
        return r;
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Spectral, CoefficientsAndContinuousEdge) {
    const auto c = operator_coefficients({0.5, 2.0, 0.3, 0, 0});
    EXPECT_DOUBLE_EQ(c.s, 3.75);
    EXPECT_DOUBLE_EQ(c.q, 18.0625);
    EXPECT_DOUBLE_EQ(continuous_spectrum_edge({0.5, 2.0, 0.3, 0, 0}), 4.0);
    EXPECT_DOUBLE_EQ(continuous_spectrum_edge({0.5, 0.5, 0.1, 0, 0}), 0.25);
    EXPECT_DOUBLE_EQ(continuous_spectrum_edge({0.5, 1.0, 0.1, 0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(continuous_spectrum_edge(kRef), 4.0);
}

TEST(Spectral, DifferentiationMatrixIsExactOnTrigPolynomials) {
    const Grid g(std::numbers::pi, 32);
    const auto D2 = differentiation_matrix(g, 2);
    Eigen::VectorXd f(32), expect(32);
    for (int i = 0; i < 32; ++i) {
        f(i) = std::sin(3 * g.node(i));
        expect(i) = -9 * std::sin(3 * g.node(i));
    }
    EXPECT_LT((D2 * f - expect).cwiseAbs().maxCoeff(), 1e-11);
}

TEST_F(RefFixture, MatrixIsSymmetric) { EXPECT_LT(op().asymmetry(), 1e-12 * op().max_abs()); }

TEST_F(RefFixture, FormMatchesMatrix) {
    NormalStream rng(11);
    const Grid& g = op().grid;
    for (int k = 0; k < 5; ++k) {
        const Field z = random_smooth_field(g, rng);
        Field lz = op().apply(z);
        const double from_matrix = inner_product(z, lz.set_periodic());
        EXPECT_LT(std::abs(from_matrix - quadratic_form(z, kRef, 0.0)), 1e-8 * h2_norm(z) * h2_norm(z));
    }
}

TEST_F(RefFixture, ExpandedVariantIsNotTheForm) {
    NormalStream rng(3);
    const Field z = random_smooth_field(op().grid, rng);
    const double a = quadratic_form(z, kRef, 0.0), b = quadratic_form_expanded_variant(z, kRef, 0.0);
    EXPECT_GT(std::abs(a - b), 1e-6 * std::abs(a));
}

TEST_F(RefFixture, OneNegativeEigenvalueAndTwoDimensionalKernel) {
    const auto& r = rep();
    EXPECT_EQ(r.negative_count, 1);
    EXPECT_EQ(r.kernel_dim_numeric, 2);
    EXPECT_LT(r.subspace_angle_kernel, 1e-4);
    EXPECT_GT(r.lambda0_sq, 0.0);
    ASSERT_EQ(r.eigenvalues.size(), 8u);
    for (std::size_t i = 1; i < r.eigenvalues.size(); ++i) EXPECT_LE(r.eigenvalues[i - 1], r.eigenvalues[i]);
    // Above the kernel the spectrum is positive and well separated from zero.
    EXPECT_GT(r.eigenvalues[3], 1e3 * r.tol_ker);
}

TEST_F(RefFixture, NegativeDirection) {
    const Field bm1 = b_minus_one(op(), rep());
    EXPECT_NEAR(l2_norm(bm1), 1.0, 1e-12);
    EXPECT_GT(inner_product(bm1, breather_field(kRef, 0.0, op().grid)), 0.0);
    EXPECT_NEAR(quadratic_form(bm1, kRef, 0.0), -rep().lambda0_sq, 1e-6 * rep().lambda0_sq);
    const Field r = op().apply(bm1) + bm1 * rep().lambda0_sq;
    EXPECT_LT(r.sup_norm(), 1e-8 * op().max_abs());
}

TEST(BZero, ScalingCombinationSolvesLinearEquation) {
    // The matrix residual needs the finer of the two grids.
    const auto c = b_zero_check(assemble(kRef, 0.0, resolved_grid(kRef)));
    EXPECT_LT(c.matrix_residual.relative(), 1e-6);
    EXPECT_LT(c.jet_residual.relative(), 1e-10);
    EXPECT_LT(rel(c.pairing, c.pairing_closed), 1e-8);
    // Q[B0] = <B0, L B0> = -<B0, B>.
    EXPECT_LT(rel(c.q_b0, -c.pairing), 1e-6);
}

TEST_F(RefFixture, QuadraticFormOnScalingDirections) {
    const Grid& g = op().grid;
    const Field la = sample(g, [&](double x) { return scaling_directions(kRef, 0.0, x).first.value; });
    const Field lb = sample(g, [&](double x) { return scaling_directions(kRef, 0.0, x).second.value; });
    const double qa = quadratic_form(la, kRef, 0.0), qb = quadratic_form(lb, kRef, 0.0);
    EXPECT_LT(rel(qa, 640.0 / 17.0), 1e-5);
    EXPECT_GT(qa, 0.0);
    EXPECT_LT(rel(qb, closed_form(Quantity::Q_lambda_beta, kRef)), 1e-5);
}

TEST_F(RefFixture, KernelDirectionsAreNull) {
    for (int which : {1, 2}) {
        const Field b = kernel_field(kRef, 0.0, op().grid, which);
        EXPECT_LT(std::abs(quadratic_form(b, kRef, 0.0)), 1e-9 * sobolev_norm_sq(b, 2));
    }
}

TEST_F(RefFixture, CoercivityOnConstrainedSubspace) {
    const auto c = coercivity_estimate(op(), rep(), 40, 5);
    EXPECT_GT(c.nu_measured, 0.0);
    EXPECT_GT(c.sigma_witness, 0.0);
    EXPECT_LT(c.q_b_minus_one, 0.0);
    EXPECT_EQ(c.trials, 40);
    const auto again = coercivity_estimate(op(), rep(), 40, 5);
    EXPECT_EQ(c.nu_measured, again.nu_measured);
    EXPECT_EQ(c.sigma_witness, again.sigma_witness);
}

TEST(Spectral, ResolvedGridKeepsStructureAtLargeBeta) {
    BreatherParams p{1.0, 2.0, 0.0, 0.0, 0.0};
    p.mu = 0.9 * p.mu_max();
    const SymmetricOperator op = assemble(p, 0.0, resolved_grid(p));
    const auto r = spectrum(op, 6);
    EXPECT_EQ(r.negative_count, 1);
    EXPECT_EQ(r.kernel_dim_numeric, 2);
    EXPECT_LT(r.subspace_angle_kernel, 1e-4);
}

TEST(Spectral, NegativeDirectionNeedsExactlyOneNegative) {
    const SymmetricOperator op = assemble(kRef, 0.0, Grid(40.0, 256));
    SpectrumReport fake = spectrum(op, 4);
    fake.negative_count = 2;
    EXPECT_THROW(b_minus_one(op, fake), StructuralFailure);
    EXPECT_THROW(spectrum(op, 3), std::invalid_argument);
}

TEST(Wronskian, ClosedFormMatchesDeterminant) {
    for (const BreatherParams& p : {kRef, BreatherParams{0.5, 2.0, 0.9, 0.3, -0.2},
                                    BreatherParams{2.0, 0.5, 0.3, -1.0, 0.4}}) {
        const double floor = 1e-10 * wronskian_prefactor(p);
        for (double t : {0.0, 0.41})
            for (double x = -10.0; x <= 10.0; x += 0.37) {
                const double c = wronskian_closed(p, t, x);
                if (std::abs(c) < floor) continue;
                EXPECT_LT(std::abs(c - wronskian_numeric(p, t, x)) / std::abs(c), 1e-8);
                EXPECT_EQ(wronskian_closed_printed(p, t, x), -c);
            }
    }
}

TEST(Wronskian, SingleSignChangeOfF) {
    NormalStream rng(2024);
    for (const BreatherParams& p : {kRef, BreatherParams{0.5, 2.0, 0.9, 0, 0}, BreatherParams{2.0, 0.5, 0.3, 0, 0},
                                    BreatherParams{0.5, 0.5, 0.45, 0, 0}}) {
        for (int k = 0; k < 10; ++k) {
            const double t = 5.0 * rng.uniform();
            const double d = 10.0 * (2.0 * rng.uniform() - 1.0);
            const auto scan = f_mu_roots(p, t, d);
            ASSERT_EQ(scan.count, 1) << "alpha=" << p.alpha << " beta=" << p.beta << " t=" << t << " d=" << d;
            EXPECT_GT(scan.slopes[0] * p.beta, 0.0);
            EXPECT_LT(std::abs(scan.roots[0]), scan.R0);
            // Beyond R0 the sign is that of y2.
            EXPECT_GT(f_mu(p, t, d, scan.R0 * 1.01), 0.0);
            EXPECT_LT(f_mu(p, t, d, -scan.R0 * 1.01), 0.0);
        }
    }
}

TEST(Wronskian, ZeroCountIsOne) {
    for (const BreatherParams& p : {kRef, BreatherParams{0.5, 2.0, 0.9, 0.3, -0.2}})
        for (double t : {0.0, 0.7}) EXPECT_EQ(wronskian_zero_count(p, t), 1);
}

TEST(NormalStream, MatchesSplitmixReference) {
    // First splitmix64 output for state 0 is 0xe220a8397b1dcdaf.
    NormalStream s(0);
    EXPECT_EQ(s.uniform(), static_cast<double>(0xe220a8397b1dcdafULL >> 11) * 0x1.0p-53);
}

TEST(NormalStream, MomentsAreStandard) {
    NormalStream s(42);
    double m = 0.0, v = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = s.normal();
        m += x;
        v += x * x;
    }
    EXPECT_NEAR(m / n, 0.0, 0.01);
    EXPECT_NEAR(v / n, 1.0, 0.01);
}

TEST(RandomField, UnitH2AndBandLimited) {
    const Grid g(40.0, 1024);
    NormalStream rng(9);
    const Field z = random_smooth_field(g, rng, 5.0, 6.0);
    EXPECT_NEAR(h2_norm(z), 1.0, 1e-12);
    const auto s = fft::forward(z.values());
    for (int j = 0; j < static_cast<int>(s.size()); ++j) {
        if (g.wavenumber(j) > 6.0) {
            EXPECT_LT(std::abs(s[static_cast<std::size_t>(j)]), 1e-13);
        }
    }
}

TEST(ProjectOut, RemovesSpan) {
    const Grid g(20.0, 256);
    NormalStream rng(1);
    const Field a = random_smooth_field(g, rng), b = random_smooth_field(g, rng), z = random_smooth_field(g, rng);
    const Field r = project_out(z, {a, b});
    EXPECT_LT(std::abs(inner_product(r, a)), 1e-12 * l2_norm(a) * l2_norm(z));
    EXPECT_LT(std::abs(inner_product(r, b)), 1e-12 * l2_norm(b) * l2_norm(z));
}
