#pragma once

#include <vector>

#include "dispersal/errors.hpp"

namespace dispersal {

/// Airy function Ai(x) for |x| <= 20, absolute error below 1e-10.
/// Power series around the origin, switching to the standard asymptotic
/// expansions on both tails. Throws OutOfRange outside the supported range.
double airy_ai(double x);

/// Derivative Ai'(x) under the same contract as airy_ai.
double airy_ai_prime(double x);

/// Absolute value of the first negative zero of Ai', located by bracketing
/// and bisection on [-2, 0] followed by Newton polish (Ai'' = x Ai).
/// Throws BracketFailure if the bracket shows no sign change.
double find_a0();

/// Normalized boundary-layer profile
///   eta*(s) = Ai(a1^(1/3) s - A0) / Z,   Z = integral_0^inf of the numerator,
/// the positive solution of eta'' + (a0 - a1 s) eta = 0 with eta'(0) = 0,
/// eta(inf) = 0 and unit integral, where a0 = a1^(2/3) A0.
struct AiryProfile {
    double a1 = 0.0;
    double a0 = 0.0;
    double s_max = 0.0;
    std::vector<double> s;
    std::vector<double> eta;
    double normalization = 0.0;  // Z
    double tail_bound = 0.0;     // bound on the profile mass beyond s_max

    double eval(double s_value) const;
    double eval_prime(double s_value) const;

    /// Max norm of eta'' + (a0 - a1 s) eta over interior sample points,
    /// with eta'' from an independent five-point finite difference.
    double ode_residual_inf() const;

    /// s-location where the cumulative integral of eta reaches `fraction`.
    double quantile(double fraction) const;
};

/// Builds the profile. `s_max` <= 0 selects the default (12 + A0) a1^(-1/3),
/// where the Airy argument reaches about 12 and Ai is below 1e-12.
/// Throws InvalidA1 when a1 <= 0.
AiryProfile build_eta_star(double a1, double s_max = -1.0, int samples = 4001);

}  // namespace dispersal
