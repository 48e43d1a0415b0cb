#include "dispersal/airy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dispersal {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSupportLimit = 20.0;
// Regime boundaries chosen so series round-off and truncated asymptotic
// terms both stay below 1e-11 in absolute value.
constexpr double kSeriesHi = 5.0;
constexpr double kSeriesLo = -9.0;

struct AiryValue {
    double ai;
    double aip;
};

// Maclaurin solution pair of y'' = x y:
//   f(x) = sum f_k x^{3k},     f_k = f_{k-1} / ((3k)(3k-1))
//   g(x) = sum g_k x^{3k+1},   g_k = g_{k-1} / ((3k+1)(3k))
AiryValue airy_series(double x) {
    const double c1 = std::pow(3.0, -2.0 / 3.0) / std::tgamma(2.0 / 3.0);
    const double c2 = std::pow(3.0, -1.0 / 3.0) / std::tgamma(1.0 / 3.0);
    const double x3 = x * x * x;
    double fk = 1.0, gk = x;
    double f = fk, g = gk, fp = 0.0, gp = 1.0;
    for (int k = 1; k <= 200; ++k) {
        fk *= x3 / ((3.0 * k) * (3.0 * k - 1.0));
        gk *= x3 / ((3.0 * k + 1.0) * (3.0 * k));
        f += fk;
        g += gk;
        fp += 3.0 * k * fk / x;      // d/dx of f_k x^{3k}
        gp += (3.0 * k + 1.0) * gk / x;  // d/dx of g_k x^{3k+1}
        if (std::abs(fk) + std::abs(gk) <
            1e-18 * (std::abs(f) + std::abs(g) + 1.0)) {
            break;
        }
    }
    if (x == 0.0) {
        fp = 0.0;
        gp = 1.0;
    }
    return {c1 * f - c2 * g, c1 * fp - c2 * gp};
}

// Asymptotic coefficient recurrence u_k of the Airy expansions.
double next_u(double u_prev, int k) {
    return u_prev * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
           (216.0 * k * (2.0 * k - 1.0));
}

// x > 0 decaying branch.
AiryValue airy_asymptotic_positive(double x) {
    const double zeta = 2.0 / 3.0 * std::pow(x, 1.5);
    double u = 1.0, su = 1.0, sv = 1.0, sign = 1.0, zk = 1.0;
    double prev_term = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 40; ++k) {
        u = next_u(u, k);
        zk *= zeta;
        sign = -sign;
        const double tu = sign * u / zk;
        if (std::abs(tu) > prev_term) break;  // series started diverging
        prev_term = std::abs(tu);
        su += tu;
        sv += -sign * (6.0 * k + 1.0) / (6.0 * k - 1.0) * u / zk;
        if (std::abs(tu) < 1e-18) break;
    }
    const double pre = std::exp(-zeta) / (2.0 * std::sqrt(kPi));
    return {pre * su / std::pow(x, 0.25), -pre * sv * std::pow(x, 0.25)};
}

// x < 0 oscillatory branch, evaluated at t = -x.
AiryValue airy_asymptotic_negative(double t) {
    const double zeta = 2.0 / 3.0 * std::pow(t, 1.5);
    double even_u = 0.0, odd_u = 0.0, even_v = 0.0, odd_v = 0.0;
    double u = 1.0, zk = 1.0;
    for (int k = 0; k <= 40; ++k) {
        const double uk = u;
        const double vk = (k == 0) ? 1.0 : -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u;
        const double term = uk / zk;
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;  // (-1)^{k/2}
        if (k % 2 == 0) {
            even_u += sign * term;
            even_v += sign * vk / zk;
        } else {
            odd_u += sign * term;
            odd_v += sign * vk / zk;
        }
        if (term < 1e-18 && k > 2) break;
        u = next_u(u, k + 1);
        zk *= zeta;
    }
    const double arg = zeta + kPi / 4.0;
    const double pre = 1.0 / std::sqrt(kPi);
    const double ai = pre / std::pow(t, 0.25) *
                      (std::sin(arg) * even_u - std::cos(arg) * odd_u);
    const double aip = -pre * std::pow(t, 0.25) *
                       (std::cos(arg) * even_v + std::sin(arg) * odd_v);
    return {ai, aip};
}

AiryValue airy_both(double x) {
    if (!(std::abs(x) <= kSupportLimit)) {
        throw OutOfRange("airy: |x| exceeds the supported range 20");
    }
    if (x > kSeriesHi) return airy_asymptotic_positive(x);
    if (x < kSeriesLo) return airy_asymptotic_negative(-x);
    return airy_series(x);
}

double a0_cached() {
    static const double value = find_a0();
    return value;
}

// Simpson cumulative integral over a uniform sample of the integrand.
double simpson_uniform(const std::vector<double>& y, double h) {
    double sum = 0.0;
    std::size_t i = 0;
    for (; i + 2 < y.size(); i += 2) {
        sum += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
    }
    if (i + 1 < y.size()) {
        sum += 0.5 * h * (y[i] + y[i + 1]);  // trailing interval
    }
    return sum;
}

}  // namespace

double airy_ai(double x) { return airy_both(x).ai; }

double airy_ai_prime(double x) { return airy_both(x).aip; }

double find_a0() {
    double lo = -2.0, hi = 0.0;
    double flo = airy_ai_prime(lo), fhi = airy_ai_prime(hi);
    if (!(flo > 0.0) || !(fhi < 0.0)) {
        throw BracketFailure("find_a0: Ai' shows no sign change on [-2, 0]");
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = airy_ai_prime(mid);
        if (fm > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
        if (hi - lo < 1e-14) break;
    }
    double root = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        // Ai'' = x Ai
        const double d2 = root * airy_ai(root);
        if (d2 == 0.0) break;
        root -= airy_ai_prime(root) / d2;
        root = std::clamp(root, -2.0, 0.0);
    }
    return -root;
}

double AiryProfile::eval(double s_value) const {
    const double arg = std::cbrt(a1) * s_value - a0 / std::cbrt(a1 * a1);
    if (arg > kSupportLimit) return 0.0;  // below 1e-27, physically zero
    return airy_ai(arg) / normalization;
}

double AiryProfile::eval_prime(double s_value) const {
    const double arg = std::cbrt(a1) * s_value - a0 / std::cbrt(a1 * a1);
    if (arg > kSupportLimit) return 0.0;
    return std::cbrt(a1) * airy_ai_prime(arg) / normalization;
}

double AiryProfile::ode_residual_inf() const {
    const std::size_t n = s.size();
    if (n < 5) return std::numeric_limits<double>::quiet_NaN();
    const double h = s[1] - s[0];
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double d2 = (-eta[i - 2] + 16.0 * eta[i - 1] - 30.0 * eta[i] +
                           16.0 * eta[i + 1] - eta[i + 2]) /
                          (12.0 * h * h);
        worst = std::max(worst, std::abs(d2 + (a0 - a1 * s[i]) * eta[i]));
    }
    return worst;
}

double AiryProfile::quantile(double fraction) const {
    double acc = 0.0;
    const double h = s[1] - s[0];
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double inc = 0.5 * h * (eta[i] + eta[i + 1]);
        if (acc + inc >= fraction) {
            const double frac = (fraction - acc) / inc;
            return s[i] + frac * h;
        }
        acc += inc;
    }
    return s.back();
}

AiryProfile build_eta_star(double a1, double s_max, int samples) {
    if (!(a1 > 0.0)) {
        throw InvalidA1("build_eta_star: a1 must be positive, got " +
                        std::to_string(a1));
    }
    if (samples < 64) {
        throw ConfigError("build_eta_star: need at least 64 samples");
    }
    const double big_a0 = a0_cached();
    const double a1_cbrt = std::cbrt(a1);
    if (s_max <= 0.0) {
        s_max = (12.0 + big_a0) / a1_cbrt;
    }
    const double edge = a1_cbrt * s_max - big_a0;
    if (airy_ai(std::min(edge, kSupportLimit)) > 1e-12) {
        throw ConfigError("build_eta_star: s_max leaves Ai above 1e-12");
    }

    AiryProfile profile;
    profile.a1 = a1;
    profile.a0 = std::pow(a1, 2.0 / 3.0) * big_a0;
    profile.s_max = s_max;
    profile.s.resize(samples);
    std::vector<double> raw(samples);
    const double h = s_max / (samples - 1);
    for (int i = 0; i < samples; ++i) {
        profile.s[i] = i * h;
        const double arg = a1_cbrt * profile.s[i] - big_a0;
        raw[i] = (arg > kSupportLimit) ? 0.0 : airy_ai(arg);
    }
    const double z = simpson_uniform(raw, h);
    // Beyond the edge Ai decays faster than exp(-sqrt(edge) (u - edge)).
    const double ai_edge = (edge > kSupportLimit) ? 0.0 : airy_ai(edge);
    profile.tail_bound = ai_edge / (a1_cbrt * std::sqrt(std::max(edge, 1.0)));
    profile.normalization = z;
    profile.eta.resize(samples);
    for (int i = 0; i < samples; ++i) profile.eta[i] = raw[i] / z;
    return profile;
}

}  // namespace dispersal
