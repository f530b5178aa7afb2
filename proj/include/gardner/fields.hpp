#pragma once

// Uniform periodic grids on [-L, L), Fourier differentiation and quadrature.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gardner {

inline constexpr double kDefaultTailTol = 1e-7;

// Non-fatal diagnostics (tail warnings and similar) go through one sink.
using WarningHandler = std::function<void(std::string_view)>;

namespace detail {
inline std::mutex& warning_mutex() {
    static std::mutex m;
    return m;
}
inline WarningHandler& warning_handler() {
    static WarningHandler h = [](std::string_view msg) {
        std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(msg.size()), msg.data());
    };
    return h;
}
}  // namespace detail

inline WarningHandler set_warning_handler(WarningHandler h) {
    std::lock_guard lock(detail::warning_mutex());
    return std::exchange(detail::warning_handler(), std::move(h));
}

inline void warn(std::string_view msg) {
    std::lock_guard lock(detail::warning_mutex());
    if (detail::warning_handler()) detail::warning_handler()(msg);
}

class Grid {
public:
    Grid(double half_length, int num_points) : L_(half_length), N_(num_points) {
        if (!(half_length > 0.0) || !std::isfinite(half_length))
            throw std::invalid_argument("grid half-length must be positive");
        if (num_points < 16) throw std::invalid_argument("grid needs at least 16 points");
        if (num_points % 2 != 0) throw std::invalid_argument("grid size must be even");
    }

    double half_length() const { return L_; }
    int size() const { return N_; }
    double spacing() const { return 2.0 * L_ / N_; }
    double node(int i) const { return -L_ + i * spacing(); }
    std::vector<double> nodes() const {
        std::vector<double> x(static_cast<std::size_t>(N_));
        for (int i = 0; i < N_; ++i) x[static_cast<std::size_t>(i)] = node(i);
        return x;
    }
    // Wavenumber of FFT bin j (0 <= j <= N/2 for real transforms).
    double wavenumber(int j) const { return std::numbers::pi * j / L_; }
    double max_wavenumber() const { return wavenumber(N_ / 2); }

    bool operator==(const Grid& o) const { return L_ == o.L_ && N_ == o.N_; }

private:
    double L_;
    int N_;
};

inline Grid make_grid(double L, int N) { return Grid(L, N); }

class Field {
public:
    Field(const Grid& g) : grid_(g), v_(static_cast<std::size_t>(g.size()), 0.0) {}
    Field(const Grid& g, std::vector<double> values, bool periodic = false)
        : grid_(g), v_(std::move(values)), periodic_(periodic) {
        if (static_cast<int>(v_.size()) != g.size())
            throw std::invalid_argument("field length does not match grid");
    }

    const Grid& grid() const { return grid_; }
    int size() const { return grid_.size(); }
    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }
    double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }

    bool periodic() const { return periodic_; }
    Field& set_periodic(bool p = true) {
        periodic_ = p;
        return *this;
    }

    double sup_norm() const {
        double m = 0.0;
        for (double v : v_) m = std::max(m, std::abs(v));
        return m;
    }
    // Largest magnitude over the two boundary nodes (and the wrap point).
    double boundary_magnitude() const {
        return std::max(std::abs(v_.front()), std::abs(v_.back()));
    }
    bool all_finite() const {
        return std::all_of(v_.begin(), v_.end(), [](double v) { return std::isfinite(v); });
    }

    Field& operator+=(const Field& o) {
        check_same(o);
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check_same(o);
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Field& operator*=(double s) {
        for (double& v : v_) v *= s;
        return *this;
    }
    Field& operator+=(double s) {
        for (double& v : v_) v += s;
        return *this;
    }

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(Field a, double s) { return a *= s; }
    friend Field operator*(double s, Field a) { return a *= s; }
    friend Field operator+(Field a, double s) { return a += s; }
    friend Field operator-(Field a, double s) { return a += -s; }

    // Pointwise product.
    friend Field operator*(const Field& a, const Field& b) {
        a.check_same(b);
        Field r(a.grid_);
        for (std::size_t i = 0; i < a.v_.size(); ++i) r.v_[i] = a.v_[i] * b.v_[i];
        r.periodic_ = a.periodic_ && b.periodic_;
        return r;
    }

    void check_same(const Field& o) const {
        if (!(grid_ == o.grid_)) throw std::invalid_argument("fields live on different grids");
    }

private:
    Grid grid_;
    std::vector<double> v_;
    bool periodic_ = false;
};

template <class Fn>
Field sample(const Grid& g, Fn&& fn) {
    Field f(g);
    for (int i = 0; i < g.size(); ++i) f[i] = fn(g.node(i));
    return f;
}

template <class Fn>
Field map(const Field& a, Fn&& fn) {
    Field r(a.grid());
    for (int i = 0; i < a.size(); ++i) r[i] = fn(a[i]);
    r.set_periodic(a.periodic());
    return r;
}

// Fixed-order pairwise summation, so results do not depend on the platform.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace fft {

using Spectrum = std::vector<std::complex<double>>;

namespace detail {

struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    ~Plans() {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

// FFTW planning is not thread-safe; execution with new arrays is.
inline const Plans& plans(int n) {
    static std::mutex m;
    static std::map<int, std::unique_ptr<Plans>> cache;
    std::lock_guard lock(m);
    auto& slot = cache[n];
    if (!slot) {
        slot = std::make_unique<Plans>();
        std::vector<double> r(static_cast<std::size_t>(n));
        std::vector<std::complex<double>> c(static_cast<std::size_t>(n / 2 + 1));
        auto* cp = reinterpret_cast<fftw_complex*>(c.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        slot->forward = fftw_plan_dft_r2c_1d(n, r.data(), cp, flags);
        slot->backward = fftw_plan_dft_c2r_1d(n, cp, r.data(), flags);
        if (!slot->forward || !slot->backward) throw std::runtime_error("FFTW planning failed");
    }
    return *slot;
}

}  // namespace detail

// Unnormalized forward transform of N reals into N/2+1 bins.
inline Spectrum forward(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    const auto& p = detail::plans(n);
    std::vector<double> in(x.begin(), x.end());
    Spectrum out(static_cast<std::size_t>(n / 2 + 1));
    fftw_execute_dft_r2c(p.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

// Inverse of forward(), including the 1/N factor.
inline std::vector<double> backward(Spectrum s, int n) {
    const auto& p = detail::plans(n);
    std::vector<double> out(static_cast<std::size_t>(n));
    fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(s.data()), out.data());
    const double inv = 1.0 / n;
    for (double& v : out) v *= inv;
    return out;
}

}  // namespace fft

// Spectral symbol (ik)^order; the unpaired Nyquist bin is dropped for odd orders.
inline std::complex<double> derivative_symbol(const Grid& g, int j, int order) {
    const double k = g.wavenumber(j);
    if (order % 2 == 1 && j == g.size() / 2) return 0.0;
    std::complex<double> s = 1.0;
    for (int p = 0; p < order; ++p) s *= std::complex<double>(0.0, k);
    return s;
}

inline Field derivative(const Field& f, int order) {
    if (order < 1 || order > 4) throw std::invalid_argument("derivative order must be in 1..4");
    auto s = fft::forward(f.values());
    for (int j = 0; j < static_cast<int>(s.size()); ++j)
        s[static_cast<std::size_t>(j)] *= derivative_symbol(f.grid(), j, order);
    Field r(f.grid(), fft::backward(std::move(s), f.size()));
    r.set_periodic(f.periodic());
    return r;
}

// Zero every mode above fraction * Nyquist.
inline Field lowpass(const Field& f, double fraction) {
    auto s = fft::forward(f.values());
    const double kc = fraction * f.grid().max_wavenumber();
    for (int j = 0; j < static_cast<int>(s.size()); ++j)
        if (f.grid().wavenumber(j) > kc) s[static_cast<std::size_t>(j)] = 0.0;
    Field r(f.grid(), fft::backward(std::move(s), f.size()));
    r.set_periodic(f.periodic());
    return r;
}

inline double integrate(const Field& f, double tail_tol = kDefaultTailTol) {
    if (!f.periodic() && f.boundary_magnitude() > tail_tol) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "integrand boundary magnitude %.3e exceeds tail tolerance %.1e",
                      f.boundary_magnitude(), tail_tol);
        warn(msg);
    }
    return f.grid().spacing() * pairwise_sum(f.values());
}

// Running integral from the left boundary, spectrally accurate: the mean is
// integrated exactly and the zero-mean remainder through the inverse symbol.
inline Field cumulative_integral(const Field& f) {
    const Grid& g = f.grid();
    const int n = g.size();
    auto s = fft::forward(f.values());
    const double mean = s[0].real() / n;
    s[0] = 0.0;
    s[static_cast<std::size_t>(n / 2)] = 0.0;
    for (int j = 1; j < n / 2; ++j)
        s[static_cast<std::size_t>(j)] /= std::complex<double>(0.0, g.wavenumber(j));
    const auto anti = fft::backward(std::move(s), n);
    Field r(g);
    for (int i = 0; i < n; ++i)
        r[i] = mean * (g.node(i) + g.half_length()) + anti[static_cast<std::size_t>(i)] - anti[0];
    return r;
}

inline double inner_product(const Field& f, const Field& g, double tail_tol = kDefaultTailTol) {
    f.check_same(g);
    return integrate(f * g, tail_tol);
}

// Sum over j <= s of the integral of (d^j f)^2.
inline double sobolev_norm_sq(const Field& f, int s, double tail_tol = kDefaultTailTol) {
    if (s < 0 || s > 2) throw std::invalid_argument("Sobolev index must be 0, 1 or 2");
    double total = inner_product(f, f, tail_tol);
    for (int j = 1; j <= s; ++j) {
        const Field d = derivative(f, j);
        total += integrate(d * d, tail_tol);
    }
    return total;
}

inline double h2_norm(const Field& f) { return std::sqrt(sobolev_norm_sq(f, 2)); }
inline double l2_norm(const Field& f) { return std::sqrt(sobolev_norm_sq(f, 0)); }

// Sum of |f_hat|^2 with Hermitian weights; equals the L2 norm squared.
inline double parseval_norm_sq(const Field& f) {
    const auto s = fft::forward(f.values());
    const int n = f.size();
    std::vector<double> terms(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
        const bool edge = j == 0 || static_cast<int>(j) == n / 2;
        terms[j] = (edge ? 1.0 : 2.0) * std::norm(s[j]);
    }
    return f.grid().spacing() * pairwise_sum(terms) / n;
}

}  // namespace gardner
