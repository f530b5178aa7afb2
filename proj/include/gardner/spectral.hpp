#pragma once

// Linearized operator around a breather:
//   L z = z_4x - 2 s z_xx + q z + (P z_x)_x + V z,
//   s = b^2 - a^2, q = (a^2 + b^2)^2, P = 5 B^2 + 10 mu B,
//   V = 5 B_x^2 + 10 B B_xx + 15/2 B^4 - 6 s B^2 + 3 mu (10 B^3 - 4 s B + 10/3 B_xx + 10 mu B^2).
// The divergence form makes the Fourier collocation matrix symmetric by construction.

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "gardner/exact.hpp"
#include "gardner/fields.hpp"
#include "gardner/functionals.hpp"
#include "gardner/identities.hpp"

namespace gardner {

class EigenSolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StructuralFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OperatorCoefficients {
    double s;  // b^2 - a^2
    double q;  // (a^2 + b^2)^2
};

inline OperatorCoefficients operator_coefficients(const BreatherParams& p) {
    const double a2 = p.alpha * p.alpha, b2 = p.beta * p.beta;
    return {b2 - a2, (a2 + b2) * (a2 + b2)};
}

// Bottom of the continuous spectrum.
inline double continuous_spectrum_edge(const BreatherParams& p) {
    const double a2 = p.alpha * p.alpha, b2 = p.beta * p.beta;
    return std::min((a2 + b2) * (a2 + b2), 4.0 * a2 * b2);
}

struct Potentials {
    Field B, Bx, P, Px, V;
};

inline Potentials potentials(const BreatherParams& p, double t, const Grid& g) {
    const auto J = breather_jets(p, t, g);
    const auto [s, q] = operator_coefficients(p);
    (void)q;
    const double m = p.mu;
    Potentials pot{J.value, J.dx1, Field(g), Field(g), Field(g)};
    for (int i = 0; i < g.size(); ++i) {
        const double B = J.value[i], Bx = J.dx1[i], Bxx = J.dx2[i], B2 = B * B;
        pot.P[i] = 5.0 * B2 + 10.0 * m * B;
        pot.Px[i] = 10.0 * B * Bx + 10.0 * m * Bx;
        pot.V[i] = 5.0 * Bx * Bx + 10.0 * B * Bxx + 7.5 * B2 * B2 - 6.0 * s * B2 +
                   3.0 * m * (10.0 * B2 * B - 4.0 * s * B + 10.0 / 3.0 * Bxx + 10.0 * m * B2);
    }
    return pot;
}

// L applied pointwise to a function known through its jets.
inline Field apply_to_jets(const BreatherParams& p, const Potentials& pot, const JetFields& z) {
    const auto [s, q] = operator_coefficients(p);
    Field r(z.value.grid());
    for (int i = 0; i < r.size(); ++i)
        r[i] = z.dx4[i] - 2.0 * s * z.dx2[i] + q * z.value[i] + pot.P[i] * z.dx2[i] +
               pot.Px[i] * z.dx1[i] + pot.V[i] * z.value[i];
    return r;
}

// Circulant Fourier differentiation matrix of the given order.
inline Eigen::MatrixXd differentiation_matrix(const Grid& g, int order) {
    const int n = g.size();
    Field e(g);
    e[0] = 1.0;
    const Field c = derivative(e, order);
    Eigen::MatrixXd D(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) D(i, j) = c[((i - j) % n + n) % n];
    return D;
}

struct SymmetricOperator {
    Grid grid;
    Eigen::MatrixXd matrix;
    BreatherParams params;
    double t = 0.0;

    Field apply(const Field& z) const {
        Eigen::Map<const Eigen::VectorXd> v(z.values().data(), z.size());
        const Eigen::VectorXd r = matrix * v;
        return Field(grid, std::vector<double>(r.data(), r.data() + r.size()));
    }
    double max_abs() const { return matrix.cwiseAbs().maxCoeff(); }
    double asymmetry() const { return (matrix - matrix.transpose()).cwiseAbs().maxCoeff(); }
};

inline SymmetricOperator assemble(const BreatherParams& p, double t, const Grid& g) {
    p.validate();
    const auto pot = potentials(p, t, g);
    const auto [s, q] = operator_coefficients(p);
    const int n = g.size();
    Field e(g);
    e[0] = 1.0;
    const Field c1 = derivative(e, 1), c2 = derivative(e, 2), c4 = derivative(e, 4);

    // Column j: circulant blocks plus D1 (P * D1 e_j), the last one by FFT.
    Eigen::MatrixXd A(n, n);
    Field col(g);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[i] = pot.P[i] * c1[((i - j) % n + n) % n];
        const Field flux = derivative(col, 1);
        for (int i = 0; i < n; ++i) {
            const int d = ((i - j) % n + n) % n;
            A(i, j) = c4[d] - 2.0 * s * c2[d] + flux[i];
        }
        A(j, j) += q + pot.V[j];
    }
    // D1 is antisymmetric, so only roundoff is removed here.
    const Eigen::MatrixXd sym = 0.5 * (A + A.transpose());
    return {g, sym, p, t};
}

// Integral form of the quadratic form <z, L z>, from spectral derivatives of z.
inline double quadratic_form(const Field& z, const BreatherParams& p, const Potentials& pot) {
    const Grid& g = z.grid();
    z.check_same(pot.B);
    const auto [s, q] = operator_coefficients(p);
    const Field zx = derivative(z, 1), zxx = derivative(z, 2);
    Field e(g);
    for (int i = 0; i < g.size(); ++i)
        e[i] = zxx[i] * zxx[i] + 2.0 * s * zx[i] * zx[i] + q * z[i] * z[i] -
               pot.P[i] * zx[i] * zx[i] + pot.V[i] * z[i] * z[i];
    return integrate(e.set_periodic());
}

inline double quadratic_form(const Field& z, const BreatherParams& p, double t) {
    return quadratic_form(z, p, potentials(p, t, z.grid()));
}

// The longer expansion that additionally carries 10 B B_x z_x z + 10 mu B_x z_x z.
// It is not <z, L z>; kept to quantify the difference.
inline double quadratic_form_expanded_variant(const Field& z, const BreatherParams& p, double t) {
    const auto pot = potentials(p, t, z.grid());
    const Field zx = derivative(z, 1);
    Field extra(z.grid());
    for (int i = 0; i < z.size(); ++i)
        extra[i] = (10.0 * pot.B[i] * pot.Bx[i] + 10.0 * p.mu * pot.Bx[i]) * zx[i] * z[i];
    return quadratic_form(z, p, t) + integrate(extra.set_periodic());
}

struct SpectrumOptions {
    double tol_neg_rel = 1e-9;
    double tol_ker_rel = 1e-9;
};

struct SpectrumReport {
    std::vector<double> eigenvalues;
    int negative_count = 0;
    int kernel_dim_numeric = 0;
    double lambda0_sq = 0.0;
    double subspace_angle_kernel = 0.0;
    double tol_neg = 0.0;
    double tol_ker = 0.0;
    Eigen::MatrixXd eigenvectors;  // columns, Euclidean-normalized
};

namespace detail {

inline Eigen::MatrixXd kernel_samples(const BreatherParams& p, double t, const Grid& g) {
    Eigen::MatrixXd K(g.size(), 2);
    for (int i = 0; i < g.size(); ++i) {
        const auto d = kernel_directions(p, t, g.node(i));
        K(i, 0) = d.first.value;
        K(i, 1) = d.second.value;
    }
    return K;
}

// Largest principal angle between two column spans.
inline double largest_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const Eigen::MatrixXd Qa = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ() *
                               Eigen::MatrixXd::Identity(A.rows(), A.cols());
    const Eigen::MatrixXd Qb = Eigen::HouseholderQR<Eigen::MatrixXd>(B).householderQ() *
                               Eigen::MatrixXd::Identity(B.rows(), B.cols());
    const Eigen::MatrixXd R = Qa - Qb * (Qb.transpose() * Qa);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
    const double sn = std::min(1.0, svd.singularValues()(0));
    return std::asin(sn);
}

}  // namespace detail

inline SpectrumReport spectrum(const SymmetricOperator& op, int k, SpectrumOptions opt = {}) {
    if (k < 4) throw std::invalid_argument("spectrum needs k >= 4");
    const int n = op.grid.size();
    k = std::min(k, n);
    Eigen::MatrixXd a = op.matrix;
    std::vector<double> w(static_cast<std::size_t>(n));
    Eigen::MatrixXd z(n, k);
    std::vector<lapack_int> support(static_cast<std::size_t>(2 * k));
    lapack_int found = 0;
    const lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, k, 0.0,
                       &found, w.data(), z.data(), n, support.data());
    if (info != 0 || found != k)
        throw EigenSolverError("dsyevr failed, info = " + std::to_string(info));

    SpectrumReport r;
    r.eigenvalues.assign(w.begin(), w.begin() + k);
    r.eigenvectors = z;
    const double scale = op.max_abs();
    r.tol_neg = opt.tol_neg_rel * scale;
    r.tol_ker = opt.tol_ker_rel * scale;
    for (double v : r.eigenvalues) {
        if (v < -r.tol_neg) ++r.negative_count;
        if (std::abs(v) < r.tol_ker) ++r.kernel_dim_numeric;
    }
    r.lambda0_sq = r.eigenvalues.front() < 0.0 ? -r.eigenvalues.front() : 0.0;

    // The two eigenvectors closest to zero against span{B1, B2}.
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::sort(idx.begin(), idx.end(), [&](int x, int y) {
        return std::abs(r.eigenvalues[static_cast<std::size_t>(x)]) <
               std::abs(r.eigenvalues[static_cast<std::size_t>(y)]);
    });
    Eigen::MatrixXd near(n, 2);
    near.col(0) = z.col(idx[0]);
    near.col(1) = z.col(idx[1]);
    r.subspace_angle_kernel =
        detail::largest_principal_angle(near, detail::kernel_samples(op.params, op.t, op.grid));
    return r;
}

// Eigenfunction of the negative eigenvalue, unit L2 norm, positive pairing with B.
inline Field b_minus_one(const SymmetricOperator& op, const SpectrumReport& rep) {
    if (rep.negative_count != 1)
        throw StructuralFailure("expected one negative eigenvalue, found " +
                                std::to_string(rep.negative_count));
    const int n = op.grid.size();
    Field f(op.grid, std::vector<double>(rep.eigenvectors.col(0).data(),
                                         rep.eigenvectors.col(0).data() + n));
    f *= 1.0 / l2_norm(f);
    const Field B = breather_field(op.params, op.t, op.grid);
    if (inner_product(f, B) < 0.0) f *= -1.0;
    return f;
}

inline Field kernel_field(const BreatherParams& p, double t, const Grid& g, int which) {
    return sample(g, [&](double x) {
        const auto d = kernel_directions(p, t, x);
        return which == 1 ? d.first.value : d.second.value;
    });
}

inline JetFields b_zero_jets(const BreatherParams& p, double t, const Grid& g) {
    return sample_jets(g, [&](double x) { return b_zero(p, t, x); });
}

struct BZeroCheck {
    ResidualReport matrix_residual;  // L B0 + B with the assembled matrix
    ResidualReport jet_residual;     // the same with exact jets of B0
    double q_b0 = 0.0;               // quadratic form at B0
    double pairing = 0.0;            // <B0, B> by quadrature
    double pairing_closed = 0.0;
};

namespace detail {

inline ResidualReport b_zero_report(const BreatherParams& p, double t,
                                    const std::vector<std::vector<double>>& terms) {
    return report_from_terms(IdentityId::b_zero_equation, p, t, terms);
}

}  // namespace detail

inline BZeroCheck b_zero_check(const SymmetricOperator& op) {
    const BreatherParams& p = op.params;
    const double t = op.t;
    const Grid& g = op.grid;
    const auto pot = potentials(p, t, g);
    const auto z = b_zero_jets(p, t, g);
    const auto [s, q] = operator_coefficients(p);
    const auto vec = [](const Field& f) { return std::vector<double>(f.values().begin(), f.values().end()); };

    BZeroCheck out;
    {
        // Matrix action split into its blocks so the scale is the largest block.
        const Field lz = op.apply(z.value);
        const Field d4 = derivative(z.value, 4);
        std::vector<double> rest(static_cast<std::size_t>(g.size()));
        for (int i = 0; i < g.size(); ++i) rest[static_cast<std::size_t>(i)] = lz[i] - d4[i];
        out.matrix_residual = detail::b_zero_report(p, t, {vec(d4), rest, vec(pot.B)});
    }
    {
        std::vector<std::vector<double>> terms(5, std::vector<double>(static_cast<std::size_t>(g.size())));
        for (int i = 0; i < g.size(); ++i) {
            const auto k = static_cast<std::size_t>(i);
            terms[0][k] = z.dx4[i];
            terms[1][k] = -2.0 * s * z.dx2[i] + q * z.value[i];
            terms[2][k] = pot.P[i] * z.dx2[i] + pot.Px[i] * z.dx1[i];
            terms[3][k] = pot.V[i] * z.value[i];
            terms[4][k] = pot.B[i];
        }
        out.jet_residual = detail::b_zero_report(p, t, terms);
    }
    out.q_b0 = quadratic_form(z.value, p, t);
    out.pairing = inner_product(z.value, pot.B);
    out.pairing_closed = closed_form(Quantity::b0_pairing, p);
    return out;
}

inline BZeroCheck b_zero_check(const BreatherParams& p, double t, const Grid& g) {
    return b_zero_check(assemble(p, t, g));
}

// det [[B1, B2], [B1_x, B2_x]] from exact jets.
inline double wronskian_numeric(const BreatherParams& p, double t, double x) {
    const auto d = kernel_directions(p, t, x);
    return d.first.value * d.second.dx1 - d.second.value * d.first.dx1;
}

namespace detail {

struct WronskianParts {
    double prefactor;  // 4 b^3 (a^2+b^2)^2 P / Delta^3
    double P;          // (a^2+b^2)^2 - 4 mu^2 (a^2 - mu^2)
    double c_cosh, c_sin, c_cos;
};

inline WronskianParts wronskian_parts(const BreatherParams& p) {
    p.validate();
    const double a = p.alpha, b = p.beta, m = p.mu, a2 = a * a, b2 = b * b, m2 = m * m;
    const double D = p.Delta(), ab = a2 + b2, q = ab * ab;
    const double P = q - 4.0 * m2 * (a2 - m2);
    return {4.0 * b * b2 * q * P / (D * D * D), P, 4.0 * b2 * m2 / P,
            -b * D * (q - 2.0 * m2 * (a2 - b2)) / (a * ab * P), 4.0 * b2 * m2 * D / (ab * P)};
}

// Bracket scaled by exp(-2 s b y2), s = sign(b y2), to stay finite.
template <class T>
T wronskian_bracket_scaled(const WronskianParts& w, double a, double b, const T& y1, const T& y2,
                           double sgn) {
    using namespace gardner::ad;
    const T e0 = exp(-4.0 * sgn * b * y2);
    const T sh = 0.5 * sgn * (1.0 - e0);
    const T ch = 0.5 * (1.0 + e0);
    const T damp = exp(-2.0 * sgn * b * y2);
    return sh + w.c_cosh * ch + (w.c_sin * sin(2.0 * a * y1) + w.c_cos * cos(2.0 * a * y1)) * damp;
}

}  // namespace detail

// Closed form of the Wronskian, oriented as det [[B1, B2], [B1_x, B2_x]].
// The printed display carries the opposite overall sign; see wronskian_closed_printed.
inline double wronskian_closed(const BreatherParams& p, double t, double x) {
    const auto w = detail::wronskian_parts(p);
    const double y1 = x + p.delta() * t + p.x1;
    const double y2 = x + p.gamma() * t + p.x2;
    const double sgn = p.beta * y2 >= 0.0 ? 1.0 : -1.0;
    const double br = detail::wronskian_bracket_scaled(w, p.alpha, p.beta, y1, y2, sgn);
    const double log_d = detail::angle_log_from_y(p.alpha, p.beta, p.mu, y1, y2).log_d;
    // bracket / D^2 = scaled bracket * exp(2 s b y2 - 2 log D)
    return -w.prefactor * br * std::exp(2.0 * sgn * p.beta * y2 - 2.0 * log_d);
}

inline double wronskian_closed_printed(const BreatherParams& p, double t, double x) {
    return -wronskian_closed(p, t, x);
}

// Scale used to decide where the closed form is numerically meaningful.
inline double wronskian_prefactor(const BreatherParams& p) {
    return std::abs(detail::wronskian_parts(p).prefactor);
}

// f(y2) = sinh(2 b y2) + c1 cosh(2 b y2) + c2 sin(2 a y) + c3 cos(2 a y),
// y = y2 + (delta - gamma) t + shift_diff, shift_diff = x1 - x2.
template <class T>
T f_mu(const BreatherParams& p, double t, double shift_diff, const T& y2) {
    using namespace gardner::ad;
    const auto w = gardner::detail::wronskian_parts(p);
    const T y = y2 + ((p.delta() - p.gamma()) * t + shift_diff);
    const T b2y = 2.0 * p.beta * y2;
    return sinh(b2y) + w.c_cosh * cosh(b2y) + w.c_sin * sin(2.0 * p.alpha * y) +
           w.c_cos * cos(2.0 * p.alpha * y);
}

struct RootScan {
    int count = 0;
    std::vector<double> roots;
    std::vector<double> slopes;  // f'(root)
    double R0 = 0.0;
    bool degenerate_flag = false;  // a root within 1e-8 of y2 = 0
};

// Radius beyond which the sign of f is that of y2: with C the bound on the
// trigonometric part and c < 1 the cosh weight, (1-c) e^{2bR} - (1+c) e^{-2bR} > 2C.
inline double f_mu_radius(const BreatherParams& p) {
    const auto w = detail::wronskian_parts(p);
    const double C = std::abs(w.c_sin) + std::abs(w.c_cos);
    const double c = w.c_cosh;
    if (!(c < 1.0)) throw StructuralFailure("cosh weight of f is not below one");
    const double u = (C + std::sqrt(C * C + (1.0 - c) * (1.0 + c))) / (1.0 - c);
    return std::log(u) / (2.0 * std::abs(p.beta));
}

inline RootScan f_mu_roots(const BreatherParams& p, double t, double shift_diff) {
    p.validate();
    RootScan out;
    double R = 1.05 * f_mu_radius(p) + 1e-3;
    auto f = [&](double y) { return f_mu(p, t, shift_diff, y); };
    for (int attempt = 0; attempt < 8; ++attempt, R *= 2.0) {
        const double step = std::min(std::numbers::pi / (64.0 * std::abs(p.alpha)),
                                     1.0 / (64.0 * std::abs(p.beta)));
        const int n = std::max(2000, static_cast<int>(std::ceil(2.0 * R / step)));
        out = RootScan{};
        out.R0 = R;
        bool endpoint = false;
        double y0 = -R, f0 = f(y0);
        if (std::abs(f0) < 1e-12) endpoint = true;
        for (int i = 1; i <= n; ++i) {
            const double y1 = -R + 2.0 * R * i / n;
            const double f1 = f(y1);
            if ((f0 < 0.0) != (f1 < 0.0)) {
                double lo = y0, hi = y1, flo = f0;
                for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = f(mid);
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                const double root = 0.5 * (lo + hi);
                out.roots.push_back(root);
                const auto d = f_mu(p, t, shift_diff, ad::Taylor<double, 1>::variable(root));
                out.slopes.push_back(d[1]);
                if (std::abs(root) < 1e-8) out.degenerate_flag = true;
            }
            y0 = y1;
            f0 = f1;
        }
        if (std::abs(f0) < 1e-12) endpoint = true;
        out.count = static_cast<int>(out.roots.size());
        if (!endpoint) return out;
    }
    return out;
}

inline int f_mu_root_count(const BreatherParams& p, double t, double shift_diff) {
    return f_mu_roots(p, t, shift_diff).count;
}

// Sign changes of the numeric Wronskian over the region where it can vanish.
inline int wronskian_zero_count(const BreatherParams& p, double t) {
    const double R = 1.05 * f_mu_radius(p) + 1e-3;
    const double c = -(p.gamma() * t + p.x2);  // y2 = 0
    const double step = std::min(std::numbers::pi / (64.0 * std::abs(p.alpha)),
                                 1.0 / (64.0 * std::abs(p.beta)));
    const int n = std::max(2000, static_cast<int>(std::ceil(2.0 * R / step)));
    int count = 0;
    double w0 = wronskian_numeric(p, t, c - R);
    for (int i = 1; i <= n; ++i) {
        const double w1 = wronskian_numeric(p, t, c - R + 2.0 * R * i / n);
        if ((w0 < 0.0) != (w1 < 0.0)) ++count;
        w0 = w1;
    }
    return count;
}

// Portable seeded normals (Box-Muller on 53-bit uniforms).
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : state_(seed) {}
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    // splitmix64
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Windowed white noise with a Gaussian spectral taper, cut at band_limit
// (default: half the grid's largest wavenumber), unit H2 norm.
inline Field random_smooth_field(const Grid& g, NormalStream& rng, double center_spread = 5.0,
                                 double band_limit = 0.0) {
    const double cut = band_limit > 0.0 ? std::min(band_limit, 0.5 * g.max_wavenumber())
                                        : 0.5 * g.max_wavenumber();
    const double width = std::exp(std::log(0.5) + rng.uniform() * std::log(20.0));
    const double center = center_spread * (2.0 * rng.uniform() - 1.0);
    const double kc = 1.0 + rng.uniform() * cut;
    Field z(g);
    for (int i = 0; i < g.size(); ++i) {
        const double u = (g.node(i) - center) / width;
        z[i] = rng.normal() * std::exp(-u * u);
    }
    auto s = fft::forward(z.values());
    for (int j = 0; j < static_cast<int>(s.size()); ++j) {
        const double k = g.wavenumber(j);
        s[static_cast<std::size_t>(j)] *= k > cut ? 0.0 : std::exp(-(k / kc) * (k / kc));
    }
    Field r(g, fft::backward(std::move(s), g.size()), true);
    return r * (1.0 / h2_norm(r));
}

// Remove the L2 projection onto span(basis).
inline Field project_out(Field z, const std::vector<Field>& basis) {
    std::vector<Field> ortho;
    for (const Field& b : basis) {
        Field v = b;
        for (const Field& o : ortho) v -= o * inner_product(v, o);
        v *= 1.0 / l2_norm(v);
        ortho.push_back(v);
    }
    for (const Field& o : ortho) z -= o * inner_product(z, o);
    return z;
}

struct CoercivityReport {
    double nu_measured = 0.0;      // min Q/|z|^2 with B_-1, B1, B2 removed
    double sigma_witness = 0.0;    // largest sigma on the grid for which the bound holds
    double q_b_minus_one = 0.0;    // Q at B_-1: negative
    double pairing_b_minus_one = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;
    bool structural_ok = true;
};

inline CoercivityReport coercivity_estimate(const SymmetricOperator& op, const SpectrumReport& rep,
                                            int trials, std::uint64_t seed) {
    const BreatherParams& p = op.params;
    const double t = op.t;
    const Grid& g = op.grid;
    const Field bm1 = b_minus_one(op, rep);
    const Field b1 = kernel_field(p, t, g, 1), b2 = kernel_field(p, t, g, 2);
    const Field B = breather_field(p, t, g);
    const Potentials pot = potentials(p, t, g);

    CoercivityReport out;
    out.trials = trials;
    out.seed = seed;
    out.q_b_minus_one = quadratic_form(bm1, p, pot);
    out.pairing_b_minus_one = inner_product(bm1, B);

    struct Sample {
        double q, b, n;
    };
    std::vector<Sample> constrained;
    NormalStream rng(seed);
    out.nu_measured = std::numeric_limits<double>::infinity();
    for (int i = 0; i < trials; ++i) {
        const Field z = random_smooth_field(g, rng);
        const Field z0 = project_out(z, {bm1, b1, b2});
        out.nu_measured = std::min(out.nu_measured, quadratic_form(z0, p, pot) / sobolev_norm_sq(z0, 2));
        const Field z1 = project_out(z, {b1, b2});
        const double pair = inner_product(z1, B);
        constrained.push_back({quadratic_form(z1, p, pot), pair * pair, sobolev_norm_sq(z1, 2)});
    }
    // Directions that make the unconstrained form negative.
    for (const Field& special : {bm1, b_zero_jets(p, t, g).value}) {
        const Field z1 = project_out(special, {b1, b2});
        const double pair = inner_product(z1, B);
        constrained.push_back({quadratic_form(z1, p, pot), pair * pair, sobolev_norm_sq(z1, 2)});
    }
    for (int k = 0; k <= 400; ++k) {
        const double sigma = std::pow(10.0, -8.0 + 10.0 * k / 400.0);
        bool holds = true;
        for (const auto& c : constrained)
            if (c.q + c.b / sigma < sigma * c.n) {
                holds = false;
                break;
            }
        if (holds) out.sigma_witness = sigma;
    }
    out.structural_ok = out.nu_measured > 0.0;
    return out;
}

inline CoercivityReport coercivity_estimate(const BreatherParams& p, double t, const Grid& g,
                                            int trials, std::uint64_t seed) {
    const SymmetricOperator op = assemble(p, t, g);
    return coercivity_estimate(op, spectrum(op, 6), trials, seed);
}

}  // namespace gardner
