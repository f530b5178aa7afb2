#pragma once

// Truncated Taylor series in one variable, nestable for mixed partials.
// Coefficient k holds f^(k)/k!.

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <type_traits>

namespace gardner::ad {

template <class T, int K>
class Taylor;

template <class X>
struct is_taylor : std::false_type {};
template <class T, int K>
struct is_taylor<Taylor<T, K>> : std::true_type {};

template <class T, int K>
class Taylor {
    static_assert(K >= 0);

public:
    using value_type = T;
    static constexpr int order = K;

    Taylor() { c_.fill(T(0.0)); }
    Taylor(double v) requires(!std::is_same_v<T, double>) : Taylor(T(v)) {}
    Taylor(const T& v) {
        c_.fill(T(0.0));
        c_[0] = v;
    }

    static Taylor variable(const T& at) {
        Taylor r(at);
        if constexpr (K >= 1) r.c_[1] = T(1.0);
        return r;
    }

    T& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
    const T& operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
    const T& value() const { return c_[0]; }

    Taylor operator-() const {
        Taylor r;
        for (int k = 0; k <= K; ++k) r[k] = -c_[k];
        return r;
    }
    Taylor& operator+=(const Taylor& o) {
        for (int k = 0; k <= K; ++k) c_[k] += o[k];
        return *this;
    }
    Taylor& operator-=(const Taylor& o) {
        for (int k = 0; k <= K; ++k) c_[k] -= o[k];
        return *this;
    }
    Taylor& operator*=(const Taylor& o) { return *this = *this * o; }
    Taylor& operator/=(const Taylor& o) { return *this = *this / o; }

    friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
    friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }

    friend Taylor operator*(const Taylor& a, const Taylor& b) {
        Taylor r;
        for (int k = 0; k <= K; ++k) {
            T s = a[0] * b[k];
            for (int j = 1; j <= k; ++j) s += a[j] * b[k - j];
            r[k] = s;
        }
        return r;
    }

    friend Taylor operator/(const Taylor& a, const Taylor& b) {
        Taylor q;
        const T inv = T(1.0) / b[0];
        for (int k = 0; k <= K; ++k) {
            T s = a[k];
            for (int j = 1; j <= k; ++j) s -= b[j] * q[k - j];
            q[k] = s * inv;
        }
        return q;
    }

private:
    std::array<T, K + 1> c_;
};

// Mixed arithmetic with scalars (double or the coefficient type).
template <class T, int K, class S>
    requires(!is_taylor<S>::value || std::is_same_v<S, T>) && std::is_constructible_v<T, S>
Taylor<T, K> operator+(Taylor<T, K> a, const S& s) {
    a[0] += T(s);
    return a;
}
template <class T, int K, class S>
    requires(!is_taylor<S>::value || std::is_same_v<S, T>) && std::is_constructible_v<T, S>
Taylor<T, K> operator+(const S& s, Taylor<T, K> a) {
    a[0] += T(s);
    return a;
}
template <class T, int K, class S>
    requires(!is_taylor<S>::value || std::is_same_v<S, T>) && std::is_constructible_v<T, S>
Taylor<T, K> operator-(Taylor<T, K> a, const S& s) {
    a[0] -= T(s);
    return a;
}
template <class T, int K, class S>
    requires(!is_taylor<S>::value || std::is_same_v<S, T>) && std::is_constructible_v<T, S>
Taylor<T, K> operator-(const S& s, const Taylor<T, K>& a) {
    Taylor<T, K> r = -a;
    r[0] += T(s);
    return r;
}
template <class T, int K, class S>
    requires(!is_taylor<S>::value || std::is_same_v<S, T>) && std::is_constructible_v<T, S>
Taylor<T, K> operator*(Taylor<T, K> a, const S& s) {
    for (int k = 0; k <= K; ++k) a[k] = a[k] * s;
    return a;
}
template <class T, int K, class S>
    requires(!is_taylor<S>::value || std::is_same_v<S, T>) && std::is_constructible_v<T, S>
Taylor<T, K> operator*(const S& s, Taylor<T, K> a) {
    for (int k = 0; k <= K; ++k) a[k] = a[k] * s;
    return a;
}
template <class T, int K, class S>
    requires(!is_taylor<S>::value || std::is_same_v<S, T>) && std::is_constructible_v<T, S>
Taylor<T, K> operator/(Taylor<T, K> a, const S& s) {
    for (int k = 0; k <= K; ++k) a[k] = a[k] / s;
    return a;
}
template <class T, int K, class S>
    requires(!is_taylor<S>::value || std::is_same_v<S, T>) && std::is_constructible_v<T, S>
Taylor<T, K> operator/(const S& s, const Taylor<T, K>& a) {
    return Taylor<T, K>(T(s)) / a;
}

namespace detail {

// d/dz of the series, truncated back to order K (top coefficient zero).
template <class T, int K>
Taylor<T, K> shift_down(const Taylor<T, K>& a) {
    Taylor<T, K> d;
    for (int k = 0; k < K; ++k) d[k] = a[k + 1] * double(k + 1);
    return d;
}

// Antiderivative of d with constant term c0.
template <class T, int K>
Taylor<T, K> integrate_up(const Taylor<T, K>& d, const T& c0) {
    Taylor<T, K> r;
    r[0] = c0;
    for (int k = 1; k <= K; ++k) r[k] = d[k - 1] / double(k);
    return r;
}

}  // namespace detail

using std::atan2;
using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::sin;
using std::sinh;
using std::sqrt;

template <class T, int K>
Taylor<T, K> exp(const Taylor<T, K>& a) {
    Taylor<T, K> r;
    r[0] = exp(a[0]);
    for (int k = 1; k <= K; ++k) {
        T s = a[1] * r[k - 1];
        for (int j = 2; j <= k; ++j) s += (double(j) * a[j]) * r[k - j];
        r[k] = s / double(k);
    }
    return r;
}

template <class T, int K>
Taylor<T, K> log(const Taylor<T, K>& a) {
    return detail::integrate_up(detail::shift_down(a) / a, T(log(a[0])));
}

inline void sincos(double a, double& s, double& c) {
    s = std::sin(a);
    c = std::cos(a);
}

template <class T, int K>
void sincos(const Taylor<T, K>& a, Taylor<T, K>& s, Taylor<T, K>& c) {
    s[0] = sin(a[0]);
    c[0] = cos(a[0]);
    for (int k = 1; k <= K; ++k) {
        T ss = a[1] * c[k - 1];
        T cc = a[1] * s[k - 1];
        for (int j = 2; j <= k; ++j) {
            ss += (double(j) * a[j]) * c[k - j];
            cc += (double(j) * a[j]) * s[k - j];
        }
        s[k] = ss / double(k);
        c[k] = -cc / double(k);
    }
}

template <class T, int K>
void sinhcosh(const Taylor<T, K>& a, Taylor<T, K>& s, Taylor<T, K>& c) {
    s[0] = sinh(a[0]);
    c[0] = cosh(a[0]);
    for (int k = 1; k <= K; ++k) {
        T ss = a[1] * c[k - 1];
        T cc = a[1] * s[k - 1];
        for (int j = 2; j <= k; ++j) {
            ss += (double(j) * a[j]) * c[k - j];
            cc += (double(j) * a[j]) * s[k - j];
        }
        s[k] = ss / double(k);
        c[k] = cc / double(k);
    }
}

template <class T, int K>
Taylor<T, K> sin(const Taylor<T, K>& a) {
    Taylor<T, K> s, c;
    sincos(a, s, c);
    return s;
}
template <class T, int K>
Taylor<T, K> cos(const Taylor<T, K>& a) {
    Taylor<T, K> s, c;
    sincos(a, s, c);
    return c;
}
template <class T, int K>
Taylor<T, K> sinh(const Taylor<T, K>& a) {
    Taylor<T, K> s, c;
    sinhcosh(a, s, c);
    return s;
}
template <class T, int K>
Taylor<T, K> cosh(const Taylor<T, K>& a) {
    Taylor<T, K> s, c;
    sinhcosh(a, s, c);
    return c;
}

template <class T, int K>
Taylor<T, K> sqrt(const Taylor<T, K>& a) {
    Taylor<T, K> r;
    r[0] = sqrt(a[0]);
    const T inv = T(1.0) / (2.0 * r[0]);
    for (int k = 1; k <= K; ++k) {
        T s = a[k];
        for (int j = 1; j < k; ++j) s -= r[j] * r[k - j];
        r[k] = s * inv;
    }
    return r;
}

// Angle of the point (f, g); derivative (f g' - g f') / (f^2 + g^2).
template <class T, int K>
Taylor<T, K> atan2(const Taylor<T, K>& g, const Taylor<T, K>& f) {
    const auto dg = detail::shift_down(g);
    const auto df = detail::shift_down(f);
    const auto rate = (f * dg - g * df) / (f * f + g * g);
    return detail::integrate_up(rate, T(atan2(g[0], f[0])));
}

template <class X>
X square(const X& a) {
    return a * a;
}

// Scalar part of an arbitrarily nested value.
inline double scalar(double v) { return v; }
template <class T, int K>
double scalar(const Taylor<T, K>& a) {
    return scalar(a[0]);
}

}  // namespace gardner::ad
