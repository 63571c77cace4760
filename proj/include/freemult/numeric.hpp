#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <string>

namespace freemult {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline bool in_unit_disc(cplx z) { return std::abs(z) < 1.0; }

// Slit plane: complex plane minus the closed ray [0, inf).
inline bool in_slit_plane(cplx z) {
    return !(z.imag() == 0.0 && z.real() >= 0.0);
}

inline bool in_upper_half(cplx z) { return z.imag() > 0.0; }

// log(1+w) without cancellation for small |w|.
inline cplx log1p_c(cplx w) {
    double a = std::abs(w);
    if (a >= 0.5) return std::log(1.0 + w);
    if (a < 1e-300) return w;
    // u = 1+w may round; standard trick: log(u) * w / (u-1)
    cplx u = 1.0 + w;
    if (u == cplx(1.0, 0.0)) return w;
    return std::log(u) * (w / (u - 1.0));
}

// expm1 for complex arguments.
inline cplx expm1_c(cplx w) {
    if (std::abs(w) > 0.5) return std::exp(w) - 1.0;
    double em = std::expm1(w.real());
    double s = std::sin(0.5 * w.imag());
    double c2 = 2.0 * s * s;  // 1 - cos(im)
    return cplx(em - (1.0 + em) * c2, (1.0 + em) * std::sin(w.imag()));
}

// 5-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr double kGauss5X[5] = {
    -0.9061798459386640, -0.5384693101056831, 0.0,
    0.5384693101056831,  0.9061798459386640};
inline constexpr double kGauss5W[5] = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891};

// Integrate f over [a,b] with a single Gauss-5 panel.
template <typename F>
auto gauss5(double a, double b, F&& f) -> decltype(f(a)) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    decltype(f(a)) acc{};
    for (int i = 0; i < 5; ++i)
        acc += kGauss5W[i] * f(mid + half * kGauss5X[i]);
    return half * acc;
}

// Shortest-format deterministic double printing (%.17g round-trips).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline double sq(double x) { return x * x; }

}  // namespace freemult
