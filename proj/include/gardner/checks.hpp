#pragma once

// Composite checks shared by the command-line tool and the acceptance run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gardner/exact.hpp"
#include "gardner/fields.hpp"
#include "gardner/functionals.hpp"
#include "gardner/identities.hpp"
#include "gardner/spectral.hpp"

namespace gardner {

struct ClosedFormRow {
    Quantity quantity;
    double quadrature;
    double closed_form;
    double rel_err;
};

inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

// Soliton companion of a breather point: same mu, sqrt(c) = beta.
inline SolitonParams companion_soliton(const BreatherParams& p) { return {p.beta * p.beta, p.mu}; }

inline std::vector<ClosedFormRow> soliton_closed_form_rows(const SolitonParams& s, const Grid& g) {
    const Field Q = soliton_field(s, g);
    auto row = [&](Quantity q, double v) { return ClosedFormRow{q, v, closed_form(q, s), relative_error(v, closed_form(q, s))}; };
    std::vector<ClosedFormRow> out{row(Quantity::soliton_mass, mass(Q)),
                                   row(Quantity::soliton_energy, energy(Q, s.mu)),
                                   row(Quantity::soliton_F, f_functional(Q, s.mu))};
    // d/dc of the quadrature mass by a fourth-order central difference.
    const double h = 1e-3 * s.c;
    auto m = [&](double c) { return mass(soliton_field({c, s.mu}, g)); };
    const double dm = (-m(s.c + 2 * h) + 8 * m(s.c + h) - 8 * m(s.c - h) + m(s.c - 2 * h)) / (12 * h);
    out.push_back(row(Quantity::soliton_dMdc, dm));
    return out;
}

inline std::vector<ClosedFormRow> breather_closed_form_rows(const BreatherParams& p, const Grid& g) {
    p.validate();
    const Field B = breather_field(p, 0.0, g);
    const Field Bx = derivative(B, 1);
    const Field la = sample(g, [&](double x) { return scaling_directions(p, 0.0, x).first.value; });
    const Field lb = sample(g, [&](double x) { return scaling_directions(p, 0.0, x).second.value; });
    const Field b0 = b_zero_jets(p, 0.0, g).value;
    const Potentials pot = potentials(p, 0.0, g);
    // First variation of the energy in direction z.
    auto dE = [&](const Field& z) {
        const Field zx = derivative(z, 1);
        Field e(g);
        for (int i = 0; i < g.size(); ++i)
            e[i] = Bx[i] * zx[i] - 3.0 * p.mu * B[i] * B[i] * z[i] - B[i] * B[i] * B[i] * z[i];
        return integrate(e);
    };
    const Invariants inv = invariants(B, p);
    auto row = [&](Quantity q, double v) {
        const double c = closed_form(q, p);
        return ClosedFormRow{q, v, c, relative_error(v, c)};
    };
    return {row(Quantity::breather_mass, inv.M),
            row(Quantity::breather_energy, inv.E),
            row(Quantity::breather_F, inv.F),
            row(Quantity::breather_H, inv.H),
            row(Quantity::dM_dalpha, inner_product(B, la)),
            row(Quantity::dM_dbeta, inner_product(B, lb)),
            row(Quantity::dE_dalpha, dE(la)),
            row(Quantity::dE_dbeta, dE(lb)),
            row(Quantity::Q_lambda_alpha, quadratic_form(la, p, pot)),
            row(Quantity::Q_lambda_beta, quadratic_form(lb, p, pot)),
            row(Quantity::b0_pairing, inner_product(b0, B))};
}

inline std::vector<ClosedFormRow> closed_form_rows(const BreatherParams& p, const Grid& g) {
    auto rows = breather_closed_form_rows(p, g);
    for (const auto& r : soliton_closed_form_rows(companion_soliton(p), g)) rows.push_back(r);
    return rows;
}

// Identity reports over the gated list at t = 0, T/4, T/2.
inline std::vector<ResidualReport> identity_suite(const BreatherParams& p, const IdentityGrid& ig = {}) {
    const double T = breather_period(p).T;
    std::vector<ResidualReport> out;
    for (double t : {0.0, 0.25 * T, 0.5 * T})
        for (IdentityId id : kGatedIdentities) out.push_back(check_identity(id, p, t, ig));
    return out;
}

struct WronskianSummary {
    int f_mu_root_count = 0;
    int wronskian_zero_count = 0;
    double max_rel_err = 0.0;  // closed form vs numeric where |closed| > 1e-10 prefactor
};

inline WronskianSummary wronskian_summary(const BreatherParams& p, double t, int samples = 401) {
    WronskianSummary s;
    s.f_mu_root_count = f_mu_root_count(p, t, p.x1 - p.x2);
    s.wronskian_zero_count = wronskian_zero_count(p, t);
    const double floor = 1e-10 * wronskian_prefactor(p);
    for (int i = 0; i < samples; ++i) {
        const double x = -20.0 + 40.0 * i / (samples - 1);
        const double c = wronskian_closed(p, t, x);
        if (std::abs(c) > floor)
            s.max_rel_err = std::max(s.max_rel_err, std::abs(c - wronskian_numeric(p, t, x)) / std::abs(c));
    }
    return s;
}

struct SpectralSummary {
    BreatherParams params;
    double t = 0.0;
    Grid grid = Grid(40.0, 1024);
    SpectrumReport spectrum;
    BZeroCheck b_zero;
    CoercivityReport coercivity;
    WronskianSummary wronskian;
    double q_lambda_alpha = 0.0, q_lambda_beta = 0.0;
    double q_lambda_alpha_closed = 0.0, q_lambda_beta_closed = 0.0;

    bool structure_ok() const {
        return spectrum.negative_count == 1 && spectrum.kernel_dim_numeric == 2;
    }
};

inline SpectralSummary spectral_summary(const BreatherParams& p, double t, const Grid& g, int k,
                                        int trials, std::uint64_t seed) {
    SpectralSummary s{p, t, g, {}, {}, {}, {}};
    const SymmetricOperator op = assemble(p, t, g);
    s.spectrum = spectrum(op, k);
    s.b_zero = b_zero_check(op);
    if (trials > 0 && s.spectrum.negative_count == 1)
        s.coercivity = coercivity_estimate(op, s.spectrum, trials, seed);
    s.wronskian = wronskian_summary(p, t);
    const Potentials pot = potentials(p, t, g);
    const Field la = sample(g, [&](double x) { return scaling_directions(p, t, x).first.value; });
    const Field lb = sample(g, [&](double x) { return scaling_directions(p, t, x).second.value; });
    s.q_lambda_alpha = quadratic_form(la, p, pot);
    s.q_lambda_beta = quadratic_form(lb, p, pot);
    s.q_lambda_alpha_closed = closed_form(Quantity::Q_lambda_alpha, p);
    s.q_lambda_beta_closed = closed_form(Quantity::Q_lambda_beta, p);
    return s;
}

}  // namespace gardner
