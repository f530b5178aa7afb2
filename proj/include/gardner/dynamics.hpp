#pragma once

// Pseudospectral evolution of w_t + (w_xx + 3 mu w^2 + w^3)_x = 0 on a periodic grid,
// optionally in a frame moving with speed c (x = xi + c t), and the orbital
// stability experiment built on it.

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gardner/exact.hpp"
#include "gardner/fields.hpp"
#include "gardner/functionals.hpp"
#include "gardner/identities.hpp"
#include "gardner/spectral.hpp"

namespace gardner {

class BlowUpError : public std::runtime_error {
public:
    BlowUpError(double t, double sup)
        : std::runtime_error("solution blew up at t = " + std::to_string(t) +
                             " (sup |w| = " + std::to_string(sup) + ")"),
          time(t),
          sup_norm(sup) {}
    double time;
    double sup_norm;
};

enum class Integrator { etdrk4, ifrk4 };

struct SolverConfig {
    Grid grid = Grid(40.0, 1024);
    double dt = 1e-4;
    double t_end = 1.0;
    double dealias = 2.0 / 3.0;
    Integrator integrator = Integrator::etdrk4;
    int snapshot_stride = 100;
    double frame_speed = 0.0;  // c in x = xi + c t
    double blowup_factor = 1e3;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
        if (!(t_end > 0.0) || !std::isfinite(t_end))
            throw std::invalid_argument("t_end must be positive");
        if (!(dealias > 0.0 && dealias <= 1.0))
            throw std::invalid_argument("dealias fraction must lie in (0, 1]");
        if (snapshot_stride < 1) throw std::invalid_argument("snapshot stride must be positive");
    }

    // Whole number of steps landing exactly on t_end.
    int steps() const { return std::max(1, static_cast<int>(std::ceil(t_end / dt - 1e-9))); }
    double effective_dt() const { return t_end / steps(); }
};

struct Snapshot {
    double t;
    Field w;
};

class GardnerStepper {
public:
    using Spectrum = fft::Spectrum;

    GardnerStepper(const SolverConfig& cfg, double mu)
        : grid_(cfg.grid), mu_(mu), h_(cfg.effective_dt()), kind_(cfg.integrator) {
        const int m = grid_.size() / 2 + 1;
        const double cut = cfg.dealias * grid_.max_wavenumber();
        ik_.resize(static_cast<std::size_t>(m));
        E_.resize(ik_.size());
        E2_.resize(ik_.size());
        Q_.resize(ik_.size());
        f1_.resize(ik_.size());
        f2_.resize(ik_.size());
        f3_.resize(ik_.size());
        constexpr int kContour = 32;
        for (int j = 0; j < m; ++j) {
            const auto u = static_cast<std::size_t>(j);
            const double k = grid_.wavenumber(j);
            // Odd derivative: the Nyquist bin carries no derivative.
            const bool nyq = j == grid_.size() / 2;
            ik_[u] = (k > cut || nyq) ? 0.0 : std::complex<double>(0.0, -k);
            const std::complex<double> L(0.0, nyq ? 0.0 : k * k * k + cfg.frame_speed * k);
            const std::complex<double> z = h_ * L;
            E_[u] = std::exp(z);
            E2_[u] = std::exp(0.5 * z);
            std::complex<double> q{}, a{}, b{}, c{};
            for (int r = 0; r < kContour; ++r) {
                const double th = std::numbers::pi * (r + 0.5) / kContour * 2.0;
                const std::complex<double> s = z + std::polar(1.0, th);
                const std::complex<double> es = std::exp(s), s3 = s * s * s;
                q += (std::exp(0.5 * s) - 1.0) / s;
                a += (-4.0 - s + es * (4.0 - 3.0 * s + s * s)) / s3;
                b += (2.0 + s + es * (s - 2.0)) / s3;
                c += (-4.0 - 3.0 * s - s * s + es * (4.0 - s)) / s3;
            }
            Q_[u] = h_ * q / double(kContour);
            f1_[u] = h_ * a / double(kContour);
            f2_[u] = h_ * b / double(kContour);
            f3_[u] = h_ * c / double(kContour);
        }
    }

    double dt() const { return h_; }

    // -d/dx (3 mu w^2 + w^3), truncated at the dealiasing cutoff.
    Spectrum nonlinear(const Spectrum& v) const {
        const int n = grid_.size();
        std::vector<double> w = fft::backward(v, n);
        for (double& x : w) x = x * x * (3.0 * mu_ + x);
        Spectrum r = fft::forward(w);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] *= ik_[j];
        return r;
    }

    void step(Spectrum& v) const {
        if (kind_ == Integrator::etdrk4)
            etdrk4(v);
        else
            ifrk4(v);
    }

private:
    void etdrk4(Spectrum& v) const {
        const std::size_t m = v.size();
        const Spectrum Nv = nonlinear(v);
        Spectrum a(m), b(m), c(m);
        for (std::size_t j = 0; j < m; ++j) a[j] = E2_[j] * v[j] + Q_[j] * Nv[j];
        const Spectrum Na = nonlinear(a);
        for (std::size_t j = 0; j < m; ++j) b[j] = E2_[j] * v[j] + Q_[j] * Na[j];
        const Spectrum Nb = nonlinear(b);
        for (std::size_t j = 0; j < m; ++j) c[j] = E2_[j] * a[j] + Q_[j] * (2.0 * Nb[j] - Nv[j]);
        const Spectrum Nc = nonlinear(c);
        for (std::size_t j = 0; j < m; ++j)
            v[j] = E_[j] * v[j] + Nv[j] * f1_[j] + 2.0 * (Na[j] + Nb[j]) * f2_[j] + Nc[j] * f3_[j];
    }

    void ifrk4(Spectrum& v) const {
        const std::size_t m = v.size();
        Spectrum s(m);
        const Spectrum k1 = nonlinear(v);
        for (std::size_t j = 0; j < m; ++j) s[j] = E2_[j] * (v[j] + 0.5 * h_ * k1[j]);
        const Spectrum k2 = nonlinear(s);
        for (std::size_t j = 0; j < m; ++j) s[j] = E2_[j] * v[j] + 0.5 * h_ * k2[j];
        const Spectrum k3 = nonlinear(s);
        for (std::size_t j = 0; j < m; ++j) s[j] = E_[j] * v[j] + h_ * E2_[j] * k3[j];
        const Spectrum k4 = nonlinear(s);
        for (std::size_t j = 0; j < m; ++j)
            v[j] = E_[j] * v[j] +
                   h_ / 6.0 * (E_[j] * k1[j] + 2.0 * E2_[j] * (k2[j] + k3[j]) + k4[j]);
    }

    Grid grid_;
    double mu_;
    double h_;
    Integrator kind_;
    std::vector<std::complex<double>> ik_, E_, E2_, Q_, f1_, f2_, f3_;
};

// Calls observer(t, w) at t = 0, every snapshot_stride steps and at t_end.
// Returning false from the observer stops the run early.
template <class Observer>
void evolve(const Field& w0, const SolverConfig& cfg, double mu, Observer&& observer) {
    cfg.validate();
    if (!(w0.grid() == cfg.grid)) throw std::invalid_argument("initial field is on another grid");
    if (!w0.all_finite()) throw std::invalid_argument("initial field is not finite");
    const GardnerStepper stepper(cfg, mu);
    const int n = cfg.steps();
    const double limit = cfg.blowup_factor * std::max(w0.sup_norm(), 1e-300);
    auto v = fft::forward(w0.values());
    auto emit = [&](int i) {
        Field w(cfg.grid, fft::backward(v, cfg.grid.size()), true);
        const double t = i * stepper.dt();
        const double sup = w.sup_norm();
        if (!std::isfinite(sup) || sup > limit) throw BlowUpError(t, sup);
        return observer(t, w);
    };
    if (!emit(0)) return;
    for (int i = 1; i <= n; ++i) {
        stepper.step(v);
        if (i % cfg.snapshot_stride == 0 || i == n)
            if (!emit(i)) return;
    }
}

inline std::vector<Snapshot> evolve(const Field& w0, const SolverConfig& cfg, double mu) {
    std::vector<Snapshot> out;
    evolve(w0, cfg, mu, [&](double t, const Field& w) {
        out.push_back({t, w});
        return true;
    });
    return out;
}

inline Field evolve_to_end(const Field& w0, const SolverConfig& cfg, double mu) {
    SolverConfig c = cfg;
    c.snapshot_stride = std::numeric_limits<int>::max();
    Field last(cfg.grid);
    evolve(w0, c, mu, [&](double, const Field& w) {
        last = w;
        return true;
    });
    return last;
}

// Exact breather as seen in the frame of cfg at time t.
inline Field breather_in_frame(const BreatherParams& p, double t, const Grid& g, double frame_speed) {
    return breather_field(p, t, g, frame_speed * t);
}

struct StepHalvingResult {
    std::vector<double> dts;
    std::vector<double> errors;  // H2 error against the exact breather at t_end
    std::vector<double> ratios;  // errors[i] / errors[i + 1]
};

// One run per dt, halving each time, comparing with the exact breather.
inline StepHalvingResult step_halving_check(const BreatherParams& p, SolverConfig cfg, int levels) {
    StepHalvingResult r;
    const Field w0 = breather_in_frame(p, 0.0, cfg.grid, cfg.frame_speed);
    const Field exact = breather_in_frame(p, cfg.t_end, cfg.grid, cfg.frame_speed);
    for (int l = 0; l < levels; ++l, cfg.dt *= 0.5) {
        const Field w = evolve_to_end(w0, cfg, p.mu);
        r.dts.push_back(cfg.effective_dt());
        r.errors.push_back(h2_norm(w - exact));
    }
    for (std::size_t i = 0; i + 1 < r.errors.size(); ++i)
        r.ratios.push_back(r.errors[i] / r.errors[i + 1]);
    return r;
}

struct ModulationState {
    double x1 = 0.0;
    double x2 = 0.0;
    bool converged = false;
    int newton_iters = 0;
    double residual1 = 0.0;  // int (w - B) B_1
    double residual2 = 0.0;
    double distance = std::numeric_limits<double>::quiet_NaN();  // |w - B|_{H2} at the result
};

struct ModulationOptions {
    double capture_radius = 0.5;
    int max_iterations = 50;
    double rel_tol = 1e-10;
};

// Breather and its first and second shift derivatives sampled on a grid.
struct ShiftJetFields {
    Field B, B1, B2, B11, B12, B22;
};

inline ShiftJetFields shift_jets(const BreatherParams& p, double t, const Grid& g, double x_offset) {
    ShiftJetFields f{Field(g), Field(g), Field(g), Field(g), Field(g), Field(g)};
    const double k = 2.0 * kSqrt2;
    for (int i = 0; i < g.size(); ++i) {
        const auto a = detail::shift_series<1>(p, t, g.node(i) + x_offset).angle;
        f.B[i] = k * a[0][0][1];
        f.B1[i] = k * a[1][0][1];
        f.B2[i] = k * a[0][1][1];
        f.B11[i] = 2.0 * k * a[2][0][1];
        f.B12[i] = k * a[1][1][1];
        f.B22[i] = 2.0 * k * a[0][2][1];
    }
    return f;
}

// Shifts (x1, x2) making w - B(t; x1, x2) L2-orthogonal to B_1 and B_2.
// The field w is sampled at x = node + x_offset.
inline ModulationState modulate(const Field& w, const BreatherParams& p, double t,
                                ModulationState guess, double x_offset = 0.0,
                                ModulationOptions opt = {}) {
    const Grid& g = w.grid();
    ModulationState s = guess;
    s.converged = false;
    s.newton_iters = 0;
    auto at = [&](double a, double b) { return p.with_shifts(a, b); };
    {
        const Field z0 = w - breather_field(at(s.x1, s.x2), t, g, x_offset);
        s.distance = h2_norm(z0);
        if (!(s.distance <= opt.capture_radius)) return s;
    }
    for (int it = 1; it <= opt.max_iterations; ++it) {
        const auto f = shift_jets(at(s.x1, s.x2), t, g, x_offset);
        const Field z = w - f.B;
        const double J1 = inner_product(z, f.B1), J2 = inner_product(z, f.B2);
        s.residual1 = J1;
        s.residual2 = J2;
        // Relative to |z|, with a floor at the roundoff level of int w B_i.
        const double zn = opt.rel_tol * l2_norm(z) + 1e-13 * l2_norm(w);
        const double tol1 = zn * l2_norm(f.B1);
        const double tol2 = zn * l2_norm(f.B2);
        s.newton_iters = it - 1;
        if (std::abs(J1) <= tol1 && std::abs(J2) <= tol2) {
            s.converged = true;
            s.distance = h2_norm(z);
            return s;
        }
        const double a11 = -inner_product(f.B1, f.B1) + inner_product(z, f.B11);
        const double a12 = -inner_product(f.B1, f.B2) + inner_product(z, f.B12);
        const double a22 = -inner_product(f.B2, f.B2) + inner_product(z, f.B22);
        const double det = a11 * a22 - a12 * a12;
        if (!(std::abs(det) > 0.0)) break;
        const double d1 = (a22 * J1 - a12 * J2) / det;
        const double d2 = (a11 * J2 - a12 * J1) / det;
        s.x1 -= d1;
        s.x2 -= d2;
        if (!std::isfinite(s.x1) || !std::isfinite(s.x2)) break;
        // Updates at roundoff level: the residual cannot shrink further.
        if (std::abs(d1) + std::abs(d2) < 1e-14 * (1.0 + std::abs(s.x1) + std::abs(s.x2))) {
            const Field zf = w - breather_field(at(s.x1, s.x2), t, g, x_offset);
            s.distance = h2_norm(zf);
            s.newton_iters = it;
            s.converged = true;
            return s;
        }
    }
    s.newton_iters = opt.max_iterations;
    s.distance = h2_norm(w - breather_field(at(s.x1, s.x2), t, g, x_offset));
    return s;
}

enum class PerturbationKind { random_band_limited, kernel_aligned, scaling_aligned, b0_aligned };

inline constexpr std::string_view perturbation_name(PerturbationKind k) {
    switch (k) {
        case PerturbationKind::random_band_limited: return "random-band-limited";
        case PerturbationKind::kernel_aligned: return "kernel-aligned";
        case PerturbationKind::scaling_aligned: return "scaling-aligned";
        case PerturbationKind::b0_aligned: return "b0-aligned";
    }
    return "unknown";
}

inline PerturbationKind perturbation_from_name(std::string_view s) {
    for (auto k : {PerturbationKind::random_band_limited, PerturbationKind::kernel_aligned,
                   PerturbationKind::scaling_aligned, PerturbationKind::b0_aligned})
        if (perturbation_name(k) == s) return k;
    throw std::invalid_argument("unknown perturbation kind: " + std::string(s));
}

struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::random_band_limited;
    double eta = 1e-3;
    std::uint64_t seed = 1;
    double band_limit = 10.0;  // largest wavenumber of the random profile
};

// Unit-H2 perturbation profile at t = 0.
inline Field perturbation_profile(const BreatherParams& p, const Grid& g, const PerturbationSpec& spec) {
    Field z(g);
    switch (spec.kind) {
        case PerturbationKind::random_band_limited: {
            NormalStream rng(spec.seed);
            z = random_smooth_field(g, rng, 5.0, spec.band_limit);
            break;
        }
        case PerturbationKind::kernel_aligned: z = kernel_field(p, 0.0, g, 1); break;
        case PerturbationKind::scaling_aligned:
            z = sample(g, [&](double x) { return scaling_directions(p, 0.0, x).second.value; });
            break;
        case PerturbationKind::b0_aligned: z = b_zero_jets(p, 0.0, g).value; break;
    }
    const double n = h2_norm(z);
    if (!(n > 0.0)) throw std::invalid_argument("degenerate perturbation profile");
    return z * (1.0 / n);
}

struct SlopeTest {
    double slope = 0.0;
    double std_error = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    int samples = 0;
    int lag = 0;
    bool non_secular = true;  // slope not distinguishable from zero at 95%
};

// OLS slope of y on x with a Newey-West (Bartlett) standard error and a
// two-sided Student-t test with n - 2 degrees of freedom.
inline SlopeTest slope_test(const std::vector<double>& x, const std::vector<double>& y) {
    SlopeTest r;
    const std::size_t n = x.size();
    r.samples = static_cast<int>(n);
    if (n < 4) return r;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    r.slope = sxy / sxx;
    const double icpt = my - r.slope * mx;
    std::vector<double> v(n);  // score terms (x - mean) * residual
    for (std::size_t i = 0; i < n; ++i) v[i] = (x[i] - mx) * (y[i] - icpt - r.slope * x[i]);
    r.lag = static_cast<int>(std::floor(4.0 * std::pow(double(n) / 100.0, 2.0 / 9.0)));
    double S = 0.0;
    for (std::size_t i = 0; i < n; ++i) S += v[i] * v[i];
    for (int l = 1; l <= r.lag; ++l) {
        const double w = 1.0 - l / (r.lag + 1.0);
        double c = 0.0;
        for (std::size_t i = static_cast<std::size_t>(l); i < n; ++i) c += v[i] * v[i - static_cast<std::size_t>(l)];
        S += 2.0 * w * c;
    }
    S *= double(n) / double(n - 2);
    r.std_error = std::sqrt(std::max(S, 0.0)) / sxx;
    if (!(r.std_error > 0.0)) {
        r.t_stat = r.slope == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        r.p_value = r.slope == 0.0 ? 1.0 : 0.0;
    } else {
        r.t_stat = r.slope / r.std_error;
        const boost::math::students_t dist(double(n - 2));
        r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_stat)));
    }
    r.non_secular = r.p_value > 0.05;
    return r;
}

struct TimeSample {
    double t;
    double distance;  // |w - B(t; x1, x2)|_{H2}
    double x1, x2;
    double M, E, F, H;
    bool captured;
};

struct StabilityReport {
    BreatherParams params;
    PerturbationSpec perturbation;
    double eta = 0.0;
    double sup_distance = 0.0;
    double amplification = 0.0;
    double invariant_drift = 0.0;
    double modulation_speed = 0.0;
    double horizon = 0.0;  // in breather periods
    bool captured = true;
    std::optional<double> escape_time;
    SlopeTest growth;
    std::vector<TimeSample> samples;
    std::optional<Field> final_state;  // last emitted field, co-moving frame
};

inline double relative_drift(double now, double start) {
    return std::abs(now - start) / std::max(std::abs(start), 1e-300);
}

// Period averages of the distance over the last half of the horizon, then slope_test.
inline SlopeTest secular_growth_test(const std::vector<TimeSample>& s, double period, double horizon) {
    const int periods = static_cast<int>(std::floor(horizon + 1e-9));
    std::vector<double> sum(static_cast<std::size_t>(periods), 0.0);
    std::vector<int> cnt(static_cast<std::size_t>(periods), 0);
    for (const auto& x : s) {
        const int k = std::min(periods - 1, static_cast<int>(std::floor(x.t / period)));
        if (k < 0 || !x.captured) continue;
        sum[static_cast<std::size_t>(k)] += x.distance;
        ++cnt[static_cast<std::size_t>(k)];
    }
    std::vector<double> xs, ys;
    for (int k = periods / 2; k < periods; ++k)
        if (cnt[static_cast<std::size_t>(k)] > 0) {
            xs.push_back((k + 0.5) * period);
            ys.push_back(sum[static_cast<std::size_t>(k)] / cnt[static_cast<std::size_t>(k)]);
        }
    return slope_test(xs, ys);
}

// Evolves w0 in the frame moving with the breather envelope and tracks the
// modulated distance to the breather family. Stops at the first failed capture.
inline StabilityReport track_orbit(const BreatherParams& p, const Field& w0, double horizon_periods,
                                   SolverConfig cfg, ModulationOptions mopt = {}) {
    p.validate();
    if (!(horizon_periods > 0.0)) throw std::invalid_argument("horizon must be positive");
    const double T = breather_period(p).T;
    cfg.t_end = horizon_periods * T;
    cfg.frame_speed = -p.gamma();

    StabilityReport rep;
    rep.params = p;
    rep.horizon = horizon_periods;

    ModulationState state;
    state.x1 = p.x1;
    state.x2 = p.x2;
    Invariants first{};
    bool have_first = false;
    evolve(w0, cfg, p.mu, [&](double t, const Field& w) {
        const auto inv = invariants(w, p);
        if (!have_first) {
            first = inv;
            have_first = true;
        }
        rep.invariant_drift = std::max({rep.invariant_drift, relative_drift(inv.M, first.M),
                                        relative_drift(inv.E, first.E), relative_drift(inv.F, first.F),
                                        relative_drift(inv.H, first.H)});
        rep.final_state = w;
        const ModulationState next = modulate(w, p, t, state, cfg.frame_speed * t, mopt);
        TimeSample smp{t, next.distance, next.x1, next.x2, inv.M, inv.E, inv.F, inv.H, next.converged};
        if (!next.converged) {
            rep.captured = false;
            rep.escape_time = t;
            rep.samples.push_back(smp);
            return false;
        }
        if (!rep.samples.empty()) {
            const auto& prev = rep.samples.back();
            const double dt = t - prev.t;
            rep.modulation_speed = std::max(rep.modulation_speed, std::abs(next.x1 - prev.x1) / dt +
                                                                      std::abs(next.x2 - prev.x2) / dt);
        }
        rep.sup_distance = std::max(rep.sup_distance, next.distance);
        rep.samples.push_back(smp);
        state = next;
        return true;
    });
    rep.growth = secular_growth_test(rep.samples, T, horizon_periods);
    return rep;
}

inline StabilityReport stability_experiment(const BreatherParams& p, const PerturbationSpec& spec,
                                            double horizon_periods, SolverConfig cfg,
                                            ModulationOptions mopt = {}) {
    p.validate();
    if (!(p.mu > 0.0 && p.mu < p.mu_max()))
        throw ParameterDomainError("stability experiment needs 0 < mu < mu_max");
    if (!(spec.eta >= 0.0 && spec.eta <= 1e-2))
        throw std::invalid_argument("perturbation size must lie in [0, 1e-2]");
    Field w0 = breather_field(p, 0.0, cfg.grid);
    if (spec.eta > 0.0) w0 += perturbation_profile(p, cfg.grid, spec) * spec.eta;
    StabilityReport rep = track_orbit(p, w0, horizon_periods, cfg, mopt);
    rep.perturbation = spec;
    rep.eta = spec.eta;
    rep.amplification = spec.eta > 0.0 ? rep.sup_distance / spec.eta : 0.0;
    return rep;
}

struct LyapunovExpansion {
    double lhs;        // H[B + z] - H[B]
    double quad;       // Q[z] / 2
    double remainder;  // lhs - quad
    double cubic_ratio;  // |remainder| / |z|_{H2}^3
};

inline LyapunovExpansion lyapunov_expansion_check(const BreatherParams& p, double t, const Field& z) {
    const Field B = breather_field(p, t, z.grid());
    Field w = B + z;
    w.set_periodic(z.periodic());  // B itself decays below the tail tolerance
    const double lhs = lyapunov(w, p) - lyapunov(B, p);
    const double quad = 0.5 * quadratic_form(z, p, t);
    const double n = h2_norm(z);
    return {lhs, quad, lhs - quad, n > 0.0 ? std::abs(lhs - quad) / (n * n * n) : 0.0};
}

// Least-squares exponent of |remainder| against s for z -> s z.
inline double cubic_scaling_exponent(const BreatherParams& p, double t, const Field& z,
                                     const std::vector<double>& scales = {1.0, 0.5, 0.25, 0.125}) {
    std::vector<double> lx, ly;
    for (double s : scales) {
        const auto e = lyapunov_expansion_check(p, t, z * s);
        lx.push_back(std::log(s));
        ly.push_back(std::log(std::abs(e.remainder)));
    }
    return slope_test(lx, ly).slope;
}

}  // namespace gardner
