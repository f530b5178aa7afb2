#pragma once

// Pointwise identities satisfied by the exact breathers, evaluated on a grid
// from Taylor-mode jets. Each report carries the sup of the residual and the
// sup of the largest individual term, so relative errors are meaningful.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "gardner/exact.hpp"
#include "gardner/fields.hpp"

namespace gardner {

enum class IdentityId {
    square,
    square_nvbc,
    second_order,
    second_order_nvbc,
    first_order,
    first_order_nvbc,
    wronskian_integral,
    mixed_nvbc,
    elliptic_nvbc,
    elliptic_gardner,
    nvbc_reduction,
    // Alternative printings of the Gardner stationary equation, reported as data.
    elliptic_gardner_alt_quadratic,
    elliptic_gardner_alt_gradient,
    // Linear equation for the scaling combination B0 (see spectral.hpp).
    b_zero_equation,
};

inline constexpr std::string_view identity_name(IdentityId id) {
    switch (id) {
        case IdentityId::square: return "square";
        case IdentityId::square_nvbc: return "square_nvbc";
        case IdentityId::second_order: return "second_order";
        case IdentityId::second_order_nvbc: return "second_order_nvbc";
        case IdentityId::first_order: return "first_order";
        case IdentityId::first_order_nvbc: return "first_order_nvbc";
        case IdentityId::wronskian_integral: return "wronskian_integral";
        case IdentityId::mixed_nvbc: return "mixed_nvbc";
        case IdentityId::elliptic_nvbc: return "elliptic_nvbc";
        case IdentityId::elliptic_gardner: return "elliptic_gardner";
        case IdentityId::nvbc_reduction: return "nvbc_reduction";
        case IdentityId::elliptic_gardner_alt_quadratic: return "elliptic_gardner_alt_quadratic";
        case IdentityId::elliptic_gardner_alt_gradient: return "elliptic_gardner_alt_gradient";
        case IdentityId::b_zero_equation: return "b_zero_equation";
    }
    return "unknown";
}

// The identities that hold exactly; the alternative printings do not.
inline constexpr std::array<IdentityId, 11> kGatedIdentities = {
    IdentityId::square,           IdentityId::square_nvbc,     IdentityId::second_order,
    IdentityId::second_order_nvbc, IdentityId::first_order,    IdentityId::first_order_nvbc,
    IdentityId::wronskian_integral, IdentityId::mixed_nvbc,    IdentityId::elliptic_nvbc,
    IdentityId::elliptic_gardner, IdentityId::nvbc_reduction,
};

struct ResidualReport {
    IdentityId id{};
    BreatherParams params{};
    double t = 0.0;
    double sup_residual = 0.0;
    double rel_scale = 1.0;

    double relative() const { return sup_residual / rel_scale; }
    bool pass(double tol) const { return std::isfinite(sup_residual) && relative() < tol; }
};

// Sample points for identity checks. By default the grid follows the
// envelope, so the nodes cover the breather at any t. The running integral
// in the Wronskian identity needs the integrand resolved, hence 4096 nodes.
struct IdentityGrid {
    Grid grid = Grid(40.0, 4096);
    bool follow_envelope = true;

    double offset(const BreatherParams& p, double t) const {
        return follow_envelope ? -(p.gamma() * t + p.x2) : 0.0;
    }
};

namespace detail {

// Residual = sum of the terms; scale = largest sup over single terms.
inline ResidualReport report_from_terms(IdentityId id, const BreatherParams& p, double t,
                                        const std::vector<std::vector<double>>& terms) {
    ResidualReport r{id, p, t, 0.0, 0.0};
    const std::size_t n = terms.front().size();
    for (const auto& term : terms) {
        double m = 0.0;
        for (double v : term) m = std::max(m, std::abs(v));
        r.rel_scale = std::max(r.rel_scale, m);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& term : terms) s += term[i];
        r.sup_residual = std::max(r.sup_residual, std::isfinite(s) ? std::abs(s) : INFINITY);
    }
    if (!(r.rel_scale > 0.0)) r.rel_scale = 1.0;
    return r;
}

// Evaluate term_fn(x, out) at every node; out receives nterms values.
template <class TermFn>
ResidualReport grid_identity(IdentityId id, const BreatherParams& p, double t,
                             const IdentityGrid& ig, std::size_t nterms, TermFn&& term_fn) {
    p.validate();
    const int n = ig.grid.size();
    const double off = ig.offset(p, t);
    std::vector<std::vector<double>> terms(nterms, std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<double> out(nterms);
    for (int i = 0; i < n; ++i) {
        term_fn(ig.grid.node(i) + off, out);
        for (std::size_t k = 0; k < nterms; ++k) terms[k][static_cast<std::size_t>(i)] = out[k];
    }
    return report_from_terms(id, p, t, terms);
}

// Shift-bivariate series: outer x1 (order 2), middle x2 (order 2), inner x (order Kx).
template <int Kx>
using ShiftSeries = ad::Taylor<ad::Taylor<ad::Taylor<double, Kx>, 2>, 2>;

template <int Kx>
detail::AngleLog<ShiftSeries<Kx>> shift_series(const BreatherParams& p, double t, double x) {
    using S = ShiftSeries<Kx>;
    S sx1(p.x1), sx2(p.x2), sx(x);
    sx1[1] = typename S::value_type(1.0);
    sx2[0][1] = ad::Taylor<double, Kx>(1.0);
    sx[0][0][1] = 1.0;
    return breather_angle_log(S(p.alpha), S(p.beta), S(p.mu), sx1, sx2, S(t), sx);
}

}  // namespace detail

inline ResidualReport check_square_identity(const BreatherParams& p, double t,
                                            const IdentityGrid& ig = {}) {
    return detail::grid_identity(IdentityId::square, p, t, ig, 3, [&](double x, auto& o) {
        const auto s = breather_series(p, t, x);
        const double w = s.tilde[0][1];
        o[0] = w * w;
        o[1] = -2.0 * (2.0 * s.log_d[0][2]);
        o[2] = 2.0 * p.mu * w;
    });
}

// u^2 = mu^2 + 2 d_x^2 log(f^2 + g^2) for the constant-background breather u.
inline ResidualReport check_square_identity_nvbc(const BreatherParams& p, double t,
                                                 const IdentityGrid& ig = {}) {
    return detail::grid_identity(IdentityId::square_nvbc, p, t, ig, 3, [&](double x, auto& o) {
        const double xn = x + 3.0 * p.mu * p.mu * t;
        const auto s = breather_series(p, t, xn, true);
        const double u = p.mu + s.tilde[0][1];
        o[0] = u * u;
        o[1] = -p.mu * p.mu;
        o[2] = -2.0 * (2.0 * s.log_d[0][2]);
    });
}

// B_xx + Bt_t + 3 mu B^2 + B^3 = 0, Bt the antiderivative of B.
inline ResidualReport check_second_order(const BreatherParams& p, double t,
                                         const IdentityGrid& ig = {}) {
    return detail::grid_identity(IdentityId::second_order, p, t, ig, 4, [&](double x, auto& o) {
        const auto s = breather_series(p, t, x);
        const double B = s.tilde[0][1];
        o[0] = 6.0 * s.tilde[0][3];
        o[1] = s.tilde[1][0];
        o[2] = 3.0 * p.mu * B * B;
        o[3] = B * B * B;
    });
}

inline ResidualReport check_second_order_nvbc(const BreatherParams& p, double t,
                                              const IdentityGrid& ig = {}) {
    return detail::grid_identity(IdentityId::second_order_nvbc, p, t, ig, 4, [&](double x, auto& o) {
        const auto s = breather_series(p, t, x + 3.0 * p.mu * p.mu * t, true);
        const double u = p.mu + s.tilde[0][1];
        o[0] = 6.0 * s.tilde[0][3];
        o[1] = s.tilde[1][0];
        o[2] = u * u * u;
        o[3] = -p.mu * p.mu * p.mu;
    });
}

// B_x^2 + B^4/2 + 2 mu B^3 + 2 B Bt_t - 2 M_t = 0 with M the partial mass.
inline ResidualReport check_first_order(const BreatherParams& p, double t,
                                        const IdentityGrid& ig = {}) {
    return detail::grid_identity(IdentityId::first_order, p, t, ig, 5, [&](double x, auto& o) {
        const auto s = breather_series(p, t, x);
        const double B = s.tilde[0][1];
        const double Bx = 2.0 * s.tilde[0][2];
        const double Bt_t = s.tilde[1][0];
        const double M_t = s.log_d[1][1] - p.mu * Bt_t;
        o[0] = Bx * Bx;
        o[1] = 0.5 * B * B * B * B;
        o[2] = 2.0 * p.mu * B * B * B;
        o[3] = 2.0 * B * Bt_t;
        o[4] = -2.0 * M_t;
    });
}

inline ResidualReport check_first_order_nvbc(const BreatherParams& p, double t,
                                             const IdentityGrid& ig = {}) {
    return detail::grid_identity(IdentityId::first_order_nvbc, p, t, ig, 6, [&](double x, auto& o) {
        const auto s = breather_series(p, t, x + 3.0 * p.mu * p.mu * t, true);
        const double m = p.mu;
        const double u = m + s.tilde[0][1];
        const double ux = 2.0 * s.tilde[0][2];
        o[0] = ux * ux;
        o[1] = 0.5 * u * u * u * u;
        o[2] = 2.0 * u * s.tilde[1][0];
        o[3] = -2.0 * s.log_d[1][1];
        o[4] = -2.0 * m * m * m * u;
        o[5] = 1.5 * m * m * m * m;
    });
}

// Running integral of (Bt_12^2 - Bt_11 Bt_22) against -(mu + B) Bt_11 + d_x1^2 d_x log D.
inline ResidualReport check_wronskian_integral(const BreatherParams& p, double t,
                                               const IdentityGrid& ig = {}) {
    p.validate();
    const Grid& g = ig.grid;
    const double off = ig.offset(p, t);
    Field integrand(g);
    std::vector<double> rhs1(static_cast<std::size_t>(g.size())), rhs2(rhs1.size());
    for (int i = 0; i < g.size(); ++i) {
        const auto al = detail::shift_series<1>(p, t, g.node(i) + off);
        const double c = 2.0 * kSqrt2;
        const double t11 = c * 2.0 * al.angle[2][0][0];
        const double t12 = c * al.angle[1][1][0];
        const double t22 = c * 2.0 * al.angle[0][2][0];
        const double B = c * al.angle[0][0][1];
        integrand[i] = t12 * t12 - t11 * t22;
        rhs1[static_cast<std::size_t>(i)] = (p.mu + B) * t11;
        rhs2[static_cast<std::size_t>(i)] = -2.0 * al.log_d[2][0][1];
    }
    const Field lhs = cumulative_integral(integrand);
    std::vector<double> l(lhs.values().begin(), lhs.values().end());
    return detail::report_from_terms(IdentityId::wronskian_integral, p, t, {l, rhs1, rhs2});
}

// u_xt + 2 (M_nv)_t u = A1 Bt_t + A2 (u - mu).
inline ResidualReport check_mixed_identity(const BreatherParams& p, double t,
                                           const IdentityGrid& ig = {}) {
    const double a2 = p.alpha * p.alpha, b2 = p.beta * p.beta, m2 = p.mu * p.mu;
    const double A1 = 2.0 * (b2 - a2) + 5.0 * m2;
    const double A2 = (a2 + b2) * (a2 + b2) + 6.0 * m2 * (b2 - a2 + 1.5 * m2);
    return detail::grid_identity(IdentityId::mixed_nvbc, p, t, ig, 4, [&](double x, auto& o) {
        const auto s = breather_series(p, t, x + 3.0 * m2 * t, true);
        const double u = p.mu + s.tilde[0][1];
        o[0] = 2.0 * s.tilde[1][2];
        o[1] = 2.0 * s.log_d[1][1] * u;
        o[2] = -A1 * s.tilde[1][0];
        o[3] = -A2 * (u - p.mu);
    });
}

// Fourth-order stationary equation of the constant-background breather.
inline ResidualReport check_elliptic_nvbc(const BreatherParams& p, double t,
                                          const IdentityGrid& ig = {}) {
    const double a2 = p.alpha * p.alpha, b2 = p.beta * p.beta, m = p.mu, m2 = m * m;
    const double s = b2 - a2, q = (a2 + b2) * (a2 + b2);
    const double A1 = 2.0 * s + 5.0 * m2;
    return detail::grid_identity(IdentityId::elliptic_nvbc, p, t, ig, 8, [&](double x, auto& o) {
        const Jet u = mkdv_nvbc_breather(p, t, x + 3.0 * m2 * t);
        const double B = u.value;
        o[0] = u.dx4;
        o[1] = -A1 * (u.dx2 + B * B * B);
        o[2] = (q + 6.0 * m2 * (s + 1.25 * m2)) * B;
        o[3] = 5.0 * B * u.dx1 * u.dx1;
        o[4] = 5.0 * B * B * u.dx2;
        o[5] = 1.5 * B * B * B * B * B;
        o[6] = -4.0 * (s + m2) * m2 * m;
        o[7] = -q * m;
    });
}

namespace detail {

enum class GardnerEllipticForm { canonical, alt_quadratic, alt_gradient };

inline ResidualReport elliptic_gardner_form(const BreatherParams& p, double t,
                                            const IdentityGrid& ig, GardnerEllipticForm form,
                                            IdentityId id) {
    const double a2 = p.alpha * p.alpha, b2 = p.beta * p.beta, m = p.mu;
    const double s = b2 - a2, q = (a2 + b2) * (a2 + b2);
    const double quad = form == GardnerEllipticForm::alt_quadratic ? 1.0 : 3.0;
    const double grad = form == GardnerEllipticForm::alt_gradient ? 5.0 : 5.0 * m;
    return grid_identity(id, p, t, ig, 10, [&](double x, auto& o) {
        const Jet j = gardner_breather(p, t, x);
        const double B = j.value, B2 = B * B;
        o[0] = j.dx4;
        o[1] = -2.0 * s * (j.dx2 + quad * m * B2 + B2 * B);
        o[2] = q * B;
        o[3] = 5.0 * B * j.dx1 * j.dx1;
        o[4] = 5.0 * B2 * j.dx2;
        o[5] = 1.5 * B2 * B2 * B;
        o[6] = grad * j.dx1 * j.dx1;
        o[7] = 10.0 * m * B * j.dx2;
        o[8] = 10.0 * m * m * B2 * B;
        o[9] = 7.5 * m * B2 * B2;
    });
}

}  // namespace detail

// J_mu[B] = B_4x - 2(b^2-a^2)(B_xx + 3 mu B^2 + B^3) + (a^2+b^2)^2 B + 5 B B_x^2
//         + 5 B^2 B_xx + 3/2 B^5 + 5 mu B_x^2 + 10 mu B B_xx + 10 mu^2 B^3 + 15/2 mu B^4.
inline ResidualReport check_elliptic_gardner(const BreatherParams& p, double t,
                                             const IdentityGrid& ig = {}) {
    return detail::elliptic_gardner_form(p, t, ig, detail::GardnerEllipticForm::canonical,
                                         IdentityId::elliptic_gardner);
}

// Same with mu B^2 in place of 3 mu B^2 inside the (b^2 - a^2) bracket.
inline ResidualReport check_elliptic_gardner_alt_quadratic(const BreatherParams& p, double t,
                                                           const IdentityGrid& ig = {}) {
    return detail::elliptic_gardner_form(p, t, ig, detail::GardnerEllipticForm::alt_quadratic,
                                         IdentityId::elliptic_gardner_alt_quadratic);
}

// Same with 5 B_x^2 in place of 5 mu B_x^2.
inline ResidualReport check_elliptic_gardner_alt_gradient(const BreatherParams& p, double t,
                                                          const IdentityGrid& ig = {}) {
    return detail::elliptic_gardner_form(p, t, ig, detail::GardnerEllipticForm::alt_gradient,
                                         IdentityId::elliptic_gardner_alt_gradient);
}

// B(t, x) = u(t, x + 3 mu^2 t) - mu.
inline ResidualReport check_nvbc_reduction(const BreatherParams& p, double t,
                                           const IdentityGrid& ig = {}) {
    return detail::grid_identity(IdentityId::nvbc_reduction, p, t, ig, 3, [&](double x, auto& o) {
        o[0] = gardner_breather(p, t, x).value;
        o[1] = -mkdv_nvbc_breather(p, t, x + 3.0 * p.mu * p.mu * t).value;
        o[2] = p.mu;
    });
}

inline ResidualReport check_identity(IdentityId id, const BreatherParams& p, double t,
                                     const IdentityGrid& ig = {}) {
    switch (id) {
        case IdentityId::square: return check_square_identity(p, t, ig);
        case IdentityId::square_nvbc: return check_square_identity_nvbc(p, t, ig);
        case IdentityId::second_order: return check_second_order(p, t, ig);
        case IdentityId::second_order_nvbc: return check_second_order_nvbc(p, t, ig);
        case IdentityId::first_order: return check_first_order(p, t, ig);
        case IdentityId::first_order_nvbc: return check_first_order_nvbc(p, t, ig);
        case IdentityId::wronskian_integral: return check_wronskian_integral(p, t, ig);
        case IdentityId::mixed_nvbc: return check_mixed_identity(p, t, ig);
        case IdentityId::elliptic_nvbc: return check_elliptic_nvbc(p, t, ig);
        case IdentityId::elliptic_gardner: return check_elliptic_gardner(p, t, ig);
        case IdentityId::nvbc_reduction: return check_nvbc_reduction(p, t, ig);
        case IdentityId::elliptic_gardner_alt_quadratic:
            return check_elliptic_gardner_alt_quadratic(p, t, ig);
        case IdentityId::elliptic_gardner_alt_gradient:
            return check_elliptic_gardner_alt_gradient(p, t, ig);
        case IdentityId::b_zero_equation: break;
    }
    throw std::invalid_argument("identity has no pointwise checker: " +
                                std::string(identity_name(id)));
}

}  // namespace gardner
