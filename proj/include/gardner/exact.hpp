#pragma once

// Exact solutions of w_t + (w_xx + 3 mu w^2 + w^3)_x = 0: soliton, breather,
// double pole and the constant-background mKdV breather, with derivatives
// taken by Taylor-mode differentiation through the F/G building blocks.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gardner/fields.hpp"
#include "gardner/taylor.hpp"

namespace gardner {

class ParameterDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class BranchTrackingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kSqrt2 = std::numbers::sqrt2;

struct BreatherParams {
    double alpha = 1.0;
    double beta = 1.0;
    double mu = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;

    double Delta() const { return alpha * alpha + beta * beta - 2.0 * mu * mu; }
    double delta() const { return alpha * alpha - 3.0 * beta * beta; }
    double gamma() const { return 3.0 * alpha * alpha - beta * beta; }
    double mu_max() const { return std::sqrt(0.5 * (alpha * alpha + beta * beta)); }

    void validate() const {
        if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(mu) ||
            !std::isfinite(x1) || !std::isfinite(x2))
            throw ParameterDomainError("breather parameters must be finite");
        if (alpha == 0.0 || beta == 0.0)
            throw ParameterDomainError("breather needs nonzero alpha and beta");
        if (!(Delta() > 0.0))
            throw ParameterDomainError("breather needs alpha^2 + beta^2 - 2 mu^2 > 0, got " +
                                       std::to_string(Delta()));
    }

    BreatherParams with_shifts(double s1, double s2) const {
        BreatherParams q = *this;
        q.x1 = s1;
        q.x2 = s2;
        return q;
    }
};

struct SolitonParams {
    double c = 1.0;
    double mu = 0.0;

    void validate() const {
        if (!(c > 0.0) || !std::isfinite(c) || !std::isfinite(mu))
            throw ParameterDomainError("soliton needs c > 0");
    }
};

struct DoublePoleParams {
    double beta = 1.0;
    double mu = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;

    double Delta0() const { return beta * beta - 2.0 * mu * mu; }
    void validate() const {
        if (beta == 0.0 || !std::isfinite(beta) || !std::isfinite(mu))
            throw ParameterDomainError("double pole needs nonzero finite beta");
        if (!(Delta0() > 0.0)) throw ParameterDomainError("double pole needs beta^2 - 2 mu^2 > 0");
    }
};

// Value, x-derivatives of order 1..4 and the t-derivative at one point.
struct Jet {
    double value = 0.0;
    double dx1 = 0.0;
    double dx2 = 0.0;
    double dx3 = 0.0;
    double dx4 = 0.0;
    double dt = 0.0;

    double dx(int n) const {
        switch (n) {
            case 0: return value;
            case 1: return dx1;
            case 2: return dx2;
            case 3: return dx3;
            case 4: return dx4;
            default: throw std::invalid_argument("jet holds x-derivatives up to order 4");
        }
    }
    Jet operator+(const Jet& o) const {
        return {value + o.value, dx1 + o.dx1, dx2 + o.dx2, dx3 + o.dx3, dx4 + o.dx4, dt + o.dt};
    }
    Jet operator*(double s) const {
        return {value * s, dx1 * s, dx2 * s, dx3 * s, dx4 * s, dt * s};
    }
};

struct BreatherPeriod {
    double T;
    double L_shift;
};

inline BreatherPeriod breather_period(const BreatherParams& p) {
    if (p.alpha == 0.0) throw ParameterDomainError("period needs alpha != 0");
    const double T = std::abs(2.0 * std::numbers::pi / (p.alpha * (p.gamma() - p.delta())));
    return {T, -p.gamma() * T};
}

namespace detail {

// Angle and log-modulus of (F, G). Both are rescaled by exp(-s beta y2),
// s = sign(beta y2), which leaves the angle unchanged and keeps cosh finite;
// the log is corrected by the same amount.
template <class T>
struct AngleLog {
    T angle;
    T log_d;
};

template <class T>
AngleLog<T> angle_log_from_y(const T& a, const T& b, const T& mu, const T& y1, const T& y2) {
    using namespace gardner::ad;
    const T a2 = a * a;
    const T b2 = b * b;
    const T Delta = a2 + b2 - 2.0 * (mu * mu);
    const T sD = sqrt(Delta);
    const T sAB = sqrt(a2 + b2);

    const T by2 = b * y2;
    const double s = ad::scalar(by2) >= 0.0 ? 1.0 : -1.0;
    // exp(-s by2) * cosh(by2), exp(-s by2) * exp(by2), exp(-s by2)
    const T ch = 0.5 * (exp((1.0 - s) * by2) + exp(-(1.0 + s) * by2));
    const T ep = exp((1.0 - s) * by2);
    const T damp = exp(-s * by2);

    T sn, cs;
    ad::sincos(a * y1, sn, cs);

    const T G = (b * sAB / (a * sD)) * sn * damp - (kSqrt2 * mu * b / Delta) * ep;
    const T F = ch - (kSqrt2 * mu * b / (a * sAB * sD)) * (a * cs - b * sn) * damp;
    return {atan2(G, F), log(F * F + G * G) + (2.0 * s) * by2};
}

template <class T>
AngleLog<T> double_pole_angle_log(const T& b, const T& mu, const T& y1, const T& y2) {
    using namespace gardner::ad;
    const T Delta0 = b * b - 2.0 * (mu * mu);
    const T sD = sqrt(Delta0);
    const T by2 = b * y2;
    const double s = ad::scalar(by2) >= 0.0 ? 1.0 : -1.0;
    const T ch = 0.5 * (exp((1.0 - s) * by2) + exp(-(1.0 + s) * by2));
    const T ep = exp((1.0 - s) * by2);
    const T damp = exp(-s * by2);
    const T G = (b * b / sD) * y1 * damp - (kSqrt2 * mu * b / Delta0) * ep;
    const T F = ch - (kSqrt2 * mu / sD) * (1.0 - b * y1) * damp;
    return {atan2(G, F), log(F * F + G * G) + (2.0 * s) * by2};
}

}  // namespace detail

// Breather phase data at (t, x) for arbitrary (possibly seeded) scalar types.
// With nvbc_frame the spatial argument is x - 3 mu^2 t, as for the
// constant-background mKdV breather.
template <class T>
detail::AngleLog<T> breather_angle_log(const T& a, const T& b, const T& mu, const T& x1,
                                       const T& x2, const T& t, const T& x,
                                       bool nvbc_frame = false) {
    const T xx = nvbc_frame ? x - 3.0 * (mu * mu) * t : x;
    const T y1 = xx + (a * a - 3.0 * (b * b)) * t + x1;
    const T y2 = xx + (3.0 * (a * a) - b * b) * t + x2;
    return detail::angle_log_from_y(a, b, mu, y1, y2);
}

// Series type for jets: outer variable t (order 1), inner variable x (order 5).
using XtSeries = ad::Taylor<ad::Taylor<double, 5>, 1>;

inline XtSeries seed_x(double x) {
    XtSeries r;
    r[0] = ad::Taylor<double, 5>::variable(x);
    return r;
}
inline XtSeries seed_t(double t) { return XtSeries::variable(ad::Taylor<double, 5>(t)); }

// Jet of d/dx S from the (t, x) series of S.
inline Jet jet_of_x_derivative(const XtSeries& s) {
    Jet j;
    j.value = s[0][1];
    j.dx1 = 2.0 * s[0][2];
    j.dx2 = 6.0 * s[0][3];
    j.dx3 = 24.0 * s[0][4];
    j.dx4 = 120.0 * s[0][5];
    j.dt = s[1][1];
    return j;
}

enum class Seed { none, alpha, beta, x1, x2 };

namespace detail {

template <class T>
detail::AngleLog<T> seeded_breather(const BreatherParams& p, const T& t, const T& x, Seed seed,
                                    bool nvbc_frame) {
    auto lift = [&](double v, Seed which) {
        if (seed == which && which != Seed::none) return T::variable(typename T::value_type(v));
        return T(v);
    };
    return breather_angle_log(lift(p.alpha, Seed::alpha), lift(p.beta, Seed::beta), T(p.mu),
                              lift(p.x1, Seed::x1), lift(p.x2, Seed::x2), t, x, nvbc_frame);
}

}  // namespace detail

// (t, x) series of the phase 2 sqrt2 atan2(G, F) and of log(F^2 + G^2).
struct BreatherSeries {
    XtSeries tilde;
    XtSeries log_d;
};

inline BreatherSeries breather_series(const BreatherParams& p, double t, double x,
                                      bool nvbc_frame = false) {
    p.validate();
    const auto al = breather_angle_log(XtSeries(p.alpha), XtSeries(p.beta), XtSeries(p.mu),
                                       XtSeries(p.x1), XtSeries(p.x2), seed_t(t), seed_x(x),
                                       nvbc_frame);
    return {2.0 * kSqrt2 * al.angle, al.log_d};
}

inline Jet gardner_breather(const BreatherParams& p, double t, double x) {
    return jet_of_x_derivative(breather_series(p, t, x).tilde);
}

// mu + 2 sqrt2 d/dx atan(g/f) with g(t, x) = G(t, x - 3 mu^2 t).
inline Jet mkdv_nvbc_breather(const BreatherParams& p, double t, double x) {
    Jet j = jet_of_x_derivative(breather_series(p, t, x, true).tilde);
    j.value += p.mu;
    return j;
}

struct FG {
    double F;
    double G;
    Jet Fj;
    Jet Gj;
};

// Unscaled F and G with their jets (direct evaluation, may overflow for |beta y2| > 700).
inline FG breather_FG(const BreatherParams& p, double t, double x) {
    p.validate();
    using namespace gardner::ad;
    using S = XtSeries;
    const S a(p.alpha), b(p.beta), mu(p.mu);
    const S tt = seed_t(t), xx = seed_x(x);
    const S y1 = xx + p.delta() * tt + S(p.x1);
    const S y2 = xx + p.gamma() * tt + S(p.x2);
    const double D = p.Delta();
    const double sD = std::sqrt(D);
    const double sAB = std::sqrt(p.alpha * p.alpha + p.beta * p.beta);
    S sn, cs;
    ad::sincos(p.alpha * y1, sn, cs);
    const S G = (p.beta * sAB / (p.alpha * sD)) * sn - (kSqrt2 * p.mu * p.beta / D) * exp(p.beta * y2);
    const S F = cosh(p.beta * y2) -
                (kSqrt2 * p.mu * p.beta / (p.alpha * sAB * sD)) * (p.alpha * cs - p.beta * sn);
    auto jet = [](const S& s) {
        Jet j;
        j.value = s[0][0];
        j.dx1 = s[0][1];
        j.dx2 = 2.0 * s[0][2];
        j.dx3 = 6.0 * s[0][3];
        j.dx4 = 24.0 * s[0][4];
        j.dt = s[1][0];
        return j;
    };
    return {F[0][0], G[0][0], jet(F), jet(G)};
}

// Derivative of the breather with respect to alpha, beta, x1 or x2.
inline Jet breather_parameter_derivative(const BreatherParams& p, double t, double x, Seed seed) {
    p.validate();
    using P = ad::Taylor<XtSeries, 1>;
    const auto al = detail::seeded_breather(p, P(seed_t(t)), P(seed_x(x)), seed, false);
    return jet_of_x_derivative(2.0 * kSqrt2 * al.angle[1]);
}

struct JetPair {
    Jet first;
    Jet second;
};

inline JetPair kernel_directions(const BreatherParams& p, double t, double x) {
    return {breather_parameter_derivative(p, t, x, Seed::x1),
            breather_parameter_derivative(p, t, x, Seed::x2)};
}

inline JetPair scaling_directions(const BreatherParams& p, double t, double x) {
    return {breather_parameter_derivative(p, t, x, Seed::alpha),
            breather_parameter_derivative(p, t, x, Seed::beta)};
}

// (alpha Lambda_beta B + beta Lambda_alpha B) / (8 alpha beta (alpha^2 + beta^2)).
inline Jet b_zero(const BreatherParams& p, double t, double x) {
    const auto [la, lb] = scaling_directions(p, t, x);
    const double a = p.alpha, b = p.beta;
    const double scale = 1.0 / (8.0 * a * b * (a * a + b * b));
    return (lb * a + la * b) * scale;
}

inline Jet gardner_soliton(const SolitonParams& p, double s) {
    p.validate();
    using namespace gardner::ad;
    using S = Taylor<double, 4>;
    const S z = S::variable(s);
    const S q = p.c / (p.mu + std::sqrt(p.mu * p.mu + 0.5 * p.c) * cosh(std::sqrt(p.c) * z));
    return {q[0], q[1], 2.0 * q[2], 6.0 * q[3], 24.0 * q[4], 0.0};
}

// Value of the double-pole solution; jets through order 4 via jet overload.
inline Jet double_pole_jet(const DoublePoleParams& p, double t, double x) {
    p.validate();
    const XtSeries b(p.beta), mu(p.mu), tt = seed_t(t), xx = seed_x(x);
    const XtSeries y1 = xx - 3.0 * (p.beta * p.beta) * tt + XtSeries(p.x1);
    const XtSeries y2 = xx - (p.beta * p.beta) * tt + XtSeries(p.x2);
    const auto al = detail::double_pole_angle_log(b, mu, y1, y2);
    return jet_of_x_derivative(2.0 * kSqrt2 * al.angle);
}

inline double double_pole(const DoublePoleParams& p, double t, double x) {
    return double_pole_jet(p, t, x).value;
}

namespace detail {

inline double principal_phase(const BreatherParams& p, double t, double x) {
    const double y1 = x + p.delta() * t + p.x1;
    const double y2 = x + p.gamma() * t + p.x2;
    return detail::angle_log_from_y(p.alpha, p.beta, p.mu, y1, y2).angle;
}

// Abscissa where |beta y2| = 36 on the left: the angle is settled there.
inline double settled_left(const BreatherParams& p, double t) {
    return -(p.gamma() * t + p.x2) - 36.0 / std::abs(p.beta);
}

inline double wrap_pi(double d) {
    while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    while (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
    return d;
}

// Continue the angle from (x0, th0) to x1 with increments below 0.5 rad.
inline double continue_phase(const BreatherParams& p, double t, double x0, double th0, double x1,
                             int depth = 0) {
    const double raw0 = principal_phase(p, t, x0);
    const double raw1 = principal_phase(p, t, x1);
    const double d = wrap_pi(raw1 - raw0);
    if (std::abs(d) < 0.5) return th0 + d;
    if (depth > 40)
        throw BranchTrackingError("phase continuation failed near x = " + std::to_string(x1));
    const double xm = 0.5 * (x0 + x1);
    const double thm = continue_phase(p, t, x0, th0, xm, depth + 1);
    return continue_phase(p, t, xm, thm, x1, depth + 1);
}

inline double phase_step(const BreatherParams& p) {
    return 0.05 / std::max({std::abs(p.alpha), std::abs(p.beta), 1.0});
}

}  // namespace detail

// Continuous angle of (F, G), normalized to the principal value at x -> -inf.
inline double unwrapped_phase(const BreatherParams& p, double t, double x) {
    p.validate();
    const double xs = detail::settled_left(p, t);
    if (x <= xs) return detail::principal_phase(p, t, x);
    double th = detail::principal_phase(p, t, xs);
    const double h = detail::phase_step(p);
    double xc = xs;
    while (xc < x) {
        const double xn = std::min(x, xc + h);
        th = detail::continue_phase(p, t, xc, th, xn);
        xc = xn;
    }
    return th;
}

// Antiderivative 2 sqrt2 atan(G/F) of the breather on the continuous branch.
inline double b_tilde(const BreatherParams& p, double t, double x) {
    return 2.0 * kSqrt2 * unwrapped_phase(p, t, x);
}

// Phase on every node of g, continued along the grid.
inline Field unwrapped_phase_field(const BreatherParams& p, double t, const Grid& g,
                                   double x_offset = 0.0) {
    Field th(g);
    double prev_x = g.node(0) + x_offset;
    double prev = unwrapped_phase(p, t, prev_x);
    th[0] = prev;
    const double h = detail::phase_step(p);
    for (int i = 1; i < g.size(); ++i) {
        const double x = g.node(i) + x_offset;
        double xc = prev_x;
        while (xc < x) {
            const double xn = std::min(x, xc + h);
            prev = detail::continue_phase(p, t, xc, prev, xn);
            xc = xn;
        }
        th[i] = prev;
        prev_x = x;
    }
    return th;
}

// Mass accumulated on (-inf, x]: 2 beta + d/dx log D - 2 sqrt2 mu theta.
inline double partial_mass(const BreatherParams& p, double t, double x) {
    p.validate();
    if (!(p.beta > 0.0)) throw ParameterDomainError("partial mass is normalized for beta > 0");
    const auto s = breather_series(p, t, x);
    return 2.0 * p.beta + s.log_d[0][1] - 2.0 * kSqrt2 * p.mu * unwrapped_phase(p, t, x);
}

// Time derivative of the partial mass (branch independent).
inline double partial_mass_dt(const BreatherParams& p, double t, double x) {
    const auto s = breather_series(p, t, x);
    return s.log_d[1][1] - p.mu * s.tilde[1][0];
}

// Sampled jets of an exact profile on a grid.
struct JetFields {
    Field value, dx1, dx2, dx3, dx4, dt;
    explicit JetFields(const Grid& g) : value(g), dx1(g), dx2(g), dx3(g), dx4(g), dt(g) {}
    void set(int i, const Jet& j) {
        value[i] = j.value;
        dx1[i] = j.dx1;
        dx2[i] = j.dx2;
        dx3[i] = j.dx3;
        dx4[i] = j.dx4;
        dt[i] = j.dt;
    }
    const Field& dx(int n) const {
        switch (n) {
            case 0: return value;
            case 1: return dx1;
            case 2: return dx2;
            case 3: return dx3;
            case 4: return dx4;
            default: throw std::invalid_argument("jet fields hold x-derivatives up to order 4");
        }
    }
};

template <class JetFn>
JetFields sample_jets(const Grid& g, JetFn&& fn, double x_offset = 0.0) {
    JetFields out(g);
    for (int i = 0; i < g.size(); ++i) out.set(i, fn(g.node(i) + x_offset));
    return out;
}

inline JetFields breather_jets(const BreatherParams& p, double t, const Grid& g,
                               double x_offset = 0.0) {
    return sample_jets(g, [&](double x) { return gardner_breather(p, t, x); }, x_offset);
}

// Fast value-only sample of the breather.
inline Field breather_field(const BreatherParams& p, double t, const Grid& g,
                            double x_offset = 0.0) {
    p.validate();
    using S = ad::Taylor<double, 1>;
    return sample(g, [&](double x) {
        const auto al = breather_angle_log(S(p.alpha), S(p.beta), S(p.mu), S(p.x1), S(p.x2),
                                           S(t), S::variable(x + x_offset));
        return 2.0 * kSqrt2 * al.angle[1];
    });
}

// Grid that resolves the breather: half-length 40/beta keeps the tails below
// e^-40, spacing h <= min(0.04/beta, 0.08/alpha), N a power of two >= 2048.
inline Grid resolved_grid(const BreatherParams& p) {
    const double a = std::abs(p.alpha), b = std::abs(p.beta);
    const double L = 40.0 / b;
    const double h = std::min(0.04 / b, 0.08 / a);
    int n = 2048;
    while (2.0 * L / n > h * (1.0 + 1e-12)) n *= 2;
    return Grid(L, n);
}

inline Field soliton_field(const SolitonParams& p, const Grid& g, double center = 0.0) {
    return sample(g, [&](double x) { return gardner_soliton(p, x - center).value; });
}

}  // namespace gardner
