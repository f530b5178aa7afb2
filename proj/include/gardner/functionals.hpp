#pragma once

// Conserved functionals by quadrature and their closed forms on soliton and
// breather profiles.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "gardner/exact.hpp"
#include "gardner/fields.hpp"

namespace gardner {

inline double mass(const Field& w) { return 0.5 * integrate(w * w); }

inline double energy(const Field& w, double mu) {
    const Field wx = derivative(w, 1);
    Field e(w.grid());
    for (int i = 0; i < w.size(); ++i) {
        const double v = w[i], v2 = v * v;
        e[i] = 0.5 * wx[i] * wx[i] - mu * v2 * v - 0.25 * v2 * v2;
    }
    return integrate(e.set_periodic(w.periodic()));
}

inline double f_functional(const Field& w, double mu) {
    const Field wx = derivative(w, 1);
    const Field wxx = derivative(w, 2);
    Field e(w.grid());
    for (int i = 0; i < w.size(); ++i) {
        const double v = w[i], v2 = v * v, g2 = wx[i] * wx[i];
        e[i] = 0.5 * wxx[i] * wxx[i] - 5.0 * mu * v * g2 + 2.5 * mu * mu * v2 * v2 -
               2.5 * v2 * g2 + 1.5 * mu * v2 * v2 * v + 0.25 * v2 * v2 * v2;
    }
    return integrate(e.set_periodic(w.periodic()));
}

struct LyapunovWeights {
    double energy;
    double mass;
};

inline LyapunovWeights lyapunov_weights(const BreatherParams& p) {
    const double a2 = p.alpha * p.alpha, b2 = p.beta * p.beta;
    return {2.0 * (b2 - a2), (a2 + b2) * (a2 + b2)};
}

// H = F + 2(b^2 - a^2) E + (a^2 + b^2)^2 M.
inline double lyapunov(const Field& w, const BreatherParams& p) {
    const auto c = lyapunov_weights(p);
    return f_functional(w, p.mu) + c.energy * energy(w, p.mu) + c.mass * mass(w);
}

// Mass and energy relative to the constant background mu.
inline double mass_nvbc(const Field& u, double mu) {
    Field e = map(u, [mu](double v) { return 0.5 * (v * v - mu * mu); });
    return integrate(e);
}

inline double energy_nvbc(const Field& u, double mu) {
    const Field ux = derivative(u, 1);
    Field e(u.grid());
    const double m4 = mu * mu * mu * mu;
    for (int i = 0; i < u.size(); ++i) {
        const double v2 = u[i] * u[i];
        e[i] = 0.5 * ux[i] * ux[i] - 0.25 * (v2 * v2 - m4);
    }
    return integrate(e);
}

struct Invariants {
    double M;
    double E;
    double F;
    double H;
};

inline Invariants invariants(const Field& w, const BreatherParams& p) {
    const double M = mass(w), E = energy(w, p.mu), F = f_functional(w, p.mu);
    const auto c = lyapunov_weights(p);
    return {M, E, F, F + c.energy * E + c.mass * M};
}

enum class Quantity {
    soliton_mass,
    soliton_energy,
    soliton_F,
    soliton_dMdc,
    breather_mass,
    breather_energy,
    breather_F,
    breather_H,
    dM_dalpha,
    dM_dbeta,
    dE_dalpha,
    dE_dbeta,
    Q_lambda_alpha,
    Q_lambda_beta,
    b0_pairing,
};

inline constexpr Quantity kAllQuantities[] = {
    Quantity::soliton_mass,    Quantity::soliton_energy, Quantity::soliton_F,
    Quantity::soliton_dMdc,    Quantity::breather_mass,  Quantity::breather_energy,
    Quantity::breather_F,      Quantity::breather_H,     Quantity::dM_dalpha,
    Quantity::dM_dbeta,        Quantity::dE_dalpha,      Quantity::dE_dbeta,
    Quantity::Q_lambda_alpha,  Quantity::Q_lambda_beta,  Quantity::b0_pairing,
};

inline constexpr std::string_view quantity_name(Quantity q) {
    switch (q) {
        case Quantity::soliton_mass: return "soliton-mass";
        case Quantity::soliton_energy: return "soliton-energy";
        case Quantity::soliton_F: return "soliton-F";
        case Quantity::soliton_dMdc: return "soliton-dMdc";
        case Quantity::breather_mass: return "breather-mass";
        case Quantity::breather_energy: return "breather-energy";
        case Quantity::breather_F: return "breather-F";
        case Quantity::breather_H: return "breather-H";
        case Quantity::dM_dalpha: return "dM/dalpha";
        case Quantity::dM_dbeta: return "dM/dbeta";
        case Quantity::dE_dalpha: return "dE/dalpha";
        case Quantity::dE_dbeta: return "dE/dbeta";
        case Quantity::Q_lambda_alpha: return "Q[LambdaA]";
        case Quantity::Q_lambda_beta: return "Q[LambdaB]";
        case Quantity::b0_pairing: return "<B0,B>";
    }
    return "unknown";
}

inline Quantity quantity_from_name(std::string_view name) {
    for (Quantity q : kAllQuantities)
        if (quantity_name(q) == name) return q;
    throw std::invalid_argument("unknown quantity id: " + std::string(name));
}

inline bool is_soliton_quantity(Quantity q) {
    return q == Quantity::soliton_mass || q == Quantity::soliton_energy ||
           q == Quantity::soliton_F || q == Quantity::soliton_dMdc;
}

namespace detail {

// mu * atan(sqrt(c) / (sqrt2 mu)) continued through mu = 0, i.e.
// mu * (pi/2 - atan(sqrt2 mu / sqrt(c))).
inline double soliton_phase(double c, double mu) {
    return mu * (0.5 * std::numbers::pi - std::atan(kSqrt2 * mu / std::sqrt(c)));
}

struct BreatherAux {
    double a, b, m, D, s8;  // s8 = Delta^2 + 8 mu^2 beta^2
    double K;               // Delta^2 + 2 mu^2 Delta + 4 mu^2 beta^2
    double phase;           // 2 sqrt2 mu atan(2 sqrt2 mu beta / Delta)
};

inline BreatherAux breather_aux(const BreatherParams& p) {
    p.validate();
    const double a = p.alpha, b = p.beta, m = p.mu, D = p.Delta();
    return {a,
            b,
            m,
            D,
            D * D + 8.0 * m * m * b * b,
            D * D + 2.0 * m * m * D + 4.0 * m * m * b * b,
            2.0 * kSqrt2 * m * std::atan(2.0 * kSqrt2 * m * b / D)};
}

}  // namespace detail

inline double closed_form(Quantity q, const SolitonParams& p) {
    p.validate();
    const double c = p.c, m = p.mu, rc = std::sqrt(c);
    const double ph = detail::soliton_phase(c, m);  // mu * atan(...)
    switch (q) {
        case Quantity::soliton_mass: return 2.0 * rc - 2.0 * kSqrt2 * ph;
        case Quantity::soliton_energy:
            return -2.0 / 3.0 * c * rc + 4.0 * m * m * rc - 4.0 * kSqrt2 * m * m * ph;
        case Quantity::soliton_F:
            return 2.0 / 15.0 * rc * (3.0 * c * c - 10.0 * m * m * c + 60.0 * m * m * m * m) -
                   8.0 * kSqrt2 * m * m * m * m * ph;
        case Quantity::soliton_dMdc: return rc / (c + 2.0 * m * m);
        default: break;
    }
    throw std::invalid_argument("not a soliton quantity: " + std::string(quantity_name(q)));
}

inline double closed_form(Quantity q, const BreatherParams& p) {
    const auto x = detail::breather_aux(p);
    const double a = x.a, b = x.b, m = x.m, D = x.D, a2 = a * a, b2 = b * b, m2 = m * m;
    const double g = p.gamma();
    switch (q) {
        case Quantity::breather_mass: return 4.0 * b + x.phase;
        case Quantity::breather_energy: return 4.0 / 3.0 * b * g + 8.0 * b * m2 + 2.0 * m2 * x.phase;
        case Quantity::breather_F:
            return 4.0 / 15.0 *
                       (3.0 * b * (b2 * b2 - 10.0 * b2 * a2 + 5.0 * a2 * a2) -
                        10.0 * m2 * b * (b2 - 3.0 * a2 - 6.0 * m2)) +
                   4.0 * m2 * m2 * x.phase;
        case Quantity::breather_H: {
            const double h1 =
                8.0 * b / 15.0 * (4.0 * b2 * b2 + 20.0 * a2 * b2 + 5.0 * m2 * (5.0 * b2 - 3.0 * a2 + 6.0 * m2));
            const double h2 = (a2 + b2) * (a2 + b2) + 4.0 * m2 * (b2 - a2 + m2);
            return h1 + h2 * x.phase;
        }
        case Quantity::dM_dalpha: return -16.0 * m2 * b * a / x.s8;
        case Quantity::dM_dbeta: return 4.0 * x.K / x.s8;
        case Quantity::dE_dalpha: return 8.0 * a * b * (1.0 - 4.0 * m2 * m2 / x.s8);
        case Quantity::dE_dbeta: return 4.0 * (a2 - b2) + 8.0 * m2 * x.K / x.s8;
        case Quantity::Q_lambda_alpha: return 32.0 * a2 * b * (1.0 + 2.0 * m2 * D / x.s8);
        case Quantity::Q_lambda_beta:
            return -16.0 * b * ((a2 - b2) + (a2 + b2 + 2.0 * m2) * x.K / x.s8);
        case Quantity::b0_pairing:
            return (D * D + 2.0 * m2 * D) / (2.0 * b * (a2 + b2) * x.s8);
        default: break;
    }
    throw std::invalid_argument("not a breather quantity: " + std::string(quantity_name(q)));
}

// Branch used for arctan(sqrt(c) / (sqrt2 mu)) at complex sqrt(c).
enum class ArctanBranch {
    principal,
    vanishing_at_infinity,  // -atan(1/z): the branch with limit 0 as |z| -> inf
};

// Soliton mass, energy or F with complex sqrt(c), mu != 0.
inline std::complex<double> soliton_closed_form_complex(Quantity q, std::complex<double> rc,
                                                        double mu, ArctanBranch branch) {
    if (mu == 0.0) throw std::invalid_argument("complex soliton forms need mu != 0");
    const std::complex<double> z = rc / (kSqrt2 * mu);
    const std::complex<double> at =
        branch == ArctanBranch::principal ? std::atan(z) : -std::atan(1.0 / z);
    const std::complex<double> c = rc * rc;
    const double m = mu, m2 = m * m;
    switch (q) {
        case Quantity::soliton_mass: return 2.0 * rc - 2.0 * kSqrt2 * m * at;
        case Quantity::soliton_energy:
            return -2.0 / 3.0 * c * rc + 4.0 * m2 * rc - 4.0 * kSqrt2 * m2 * m * at;
        case Quantity::soliton_F:
            return 2.0 / 15.0 * rc * (3.0 * c * c - 10.0 * m2 * c + 60.0 * m2 * m2) -
                   8.0 * kSqrt2 * m2 * m2 * m * at;
        default: break;
    }
    throw std::invalid_argument("no complex form for " + std::string(quantity_name(q)));
}

// Breather value as twice the real part of the soliton value at sqrt(c) = beta + i alpha.
inline double breather_from_soliton(Quantity breather_quantity, const BreatherParams& p,
                                    ArctanBranch branch = ArctanBranch::vanishing_at_infinity) {
    p.validate();
    Quantity sq;
    switch (breather_quantity) {
        case Quantity::breather_mass: sq = Quantity::soliton_mass; break;
        case Quantity::breather_energy: sq = Quantity::soliton_energy; break;
        case Quantity::breather_F: sq = Quantity::soliton_F; break;
        default:
            throw std::invalid_argument("no soliton counterpart for " +
                                        std::string(quantity_name(breather_quantity)));
    }
    return 2.0 * soliton_closed_form_complex(sq, {p.beta, p.alpha}, p.mu, branch).real();
}

}  // namespace gardner
