#include "rnp/barrier_laplace.hpp"

#include <cmath>
#include <stdexcept>

// Closed forms implemented here, for X_t = x + mu' t + B_t exiting (a, b)
// at tau, with theta = sqrt(mu'^2 + 2r), a' = x - a, b' = b - x, s = b - a:
//
//   E[e^{-r tau}; X_tau = b] = e^{mu' b'} sinh(a' theta) / sinh(s theta)
//   E[e^{-r tau}; X_tau = a] = e^{-mu' a'} sinh(b' theta) / sinh(s theta)
//   F(r) = sum of the two
//
// All hyperbolic ratios are evaluated with the exponential prefactor fused
// into the ratio once arguments get large, so deep ranges and large rates
// cannot overflow: the fused exponents (mu' - theta) b' and -(mu' + theta) a'
// are always <= 0 because theta >= |mu'|.

namespace rnp {

namespace {

// Above this argument sinh/cosh are replaced by their exponential forms.
constexpr double kLargeArg = 30.0;
// Below this value of s*theta the transforms use their theta -> 0 limits.
constexpr double kDegenerateArg = 1e-8;
// Below this value of s*theta, -F'(r) switches to its series expansion.
constexpr double kSeriesArg = 1e-3;
// Continuous fee legs with r below this use the limit (1 - F)/r -> E[tau].
constexpr double kFeeRateEps = 1e-10;

void check_live(const TransformInputs& inp) {
    if (!inp.coords.live()) {
        throw std::domain_error("coordinates must be live (a < x < b)");
    }
    if (!(inp.r >= 0.0)) {
        throw std::domain_error("discount rate must be >= 0");
    }
}

// e^c * sinh(u) / sinh(v) for 0 <= u <= v, stable for any magnitude.
double scaled_sinh_ratio(double c, double u, double v) {
    if (v >= kLargeArg) {
        return std::exp(c + u - v) * std::expm1(-2.0 * u) / std::expm1(-2.0 * v);
    }
    return std::exp(c) * std::sinh(u) / std::sinh(v);
}

// e^c * cosh(u) / sinh(v) for 0 <= u <= v, stable for any magnitude.
double scaled_cosh_ratio(double c, double u, double v) {
    if (v >= kLargeArg) {
        return std::exp(c + u - v) * (1.0 + std::exp(-2.0 * u)) / -std::expm1(-2.0 * v);
    }
    return std::exp(c) * std::cosh(u) / std::sinh(v);
}

}  // namespace

double hit_upper_factor(const TransformInputs& inp) {
    check_live(inp);
    const LogCoords& c = inp.coords;
    const double th = inp.theta();
    const double s = c.span();
    if (s * th < kDegenerateArg) {
        return std::exp(c.mu_prime * c.b_prime) * c.a_prime / s;
    }
    return scaled_sinh_ratio(c.mu_prime * c.b_prime, c.a_prime * th, s * th);
}

double hit_lower_factor(const TransformInputs& inp) {
    check_live(inp);
    const LogCoords& c = inp.coords;
    const double th = inp.theta();
    const double s = c.span();
    if (s * th < kDegenerateArg) {
        return std::exp(-c.mu_prime * c.a_prime) * c.b_prime / s;
    }
    return scaled_sinh_ratio(-c.mu_prime * c.a_prime, c.b_prime * th, s * th);
}

double survival_transform(const TransformInputs& inp) {
    return hit_upper_factor(inp) + hit_lower_factor(inp);
}

double expected_discounted_tau(const TransformInputs& inp) {
    check_live(inp);
    const LogCoords& c = inp.coords;
    const double m = c.mu_prime;
    const double A = c.a_prime;
    const double B = c.b_prime;
    const double s = c.span();
    const double th = inp.theta();

    if (s * th < kSeriesArg) {
        // Joint expansion in (theta, mu') around the degenerate point; valid
        // because |mu'| <= theta. Leading term is the classical driftless
        // mean exit time a'b'. Truncation error is O((s theta)^4) relative.
        const double w2 = th * th;
        const double m2 = m * m;
        return A * B *
               (1.0 + m * (B - A) / 3.0 + m2 * (A * A + A * B + B * B) / 6.0 -
                w2 * (A * A + 3.0 * A * B + B * B) / 6.0 +
                m2 * m * (A + B) * (A + B) * (B - A) / 18.0 -
                w2 * m * (B - A) * (7.0 * A * A + 20.0 * A * B + 7.0 * B * B) / 90.0);
    }

    // -F'(r) with F = N/D, N = e^{-mA} sinh(B th) + e^{mB} sinh(A th),
    // D = sinh(s th). Using dtheta/dr = 1/theta and dN/dtheta = M with
    // M = e^{-mA} B cosh(B th) + e^{mB} A cosh(A th):
    //   -F'(r) = [ s F coth(s th) - M / sinh(s th) ] / theta
    const double f = survival_transform(inp);
    const double coth_s = 1.0 / std::tanh(s * th);
    const double m_over_sinh = B * scaled_cosh_ratio(-m * A, B * th, s * th) +
                               A * scaled_cosh_ratio(m * B, A * th, s * th);
    return (s * f * coth_s - m_over_sinh) / th;
}

double fee_leg(const TransformInputs& inp, double lq, double fee_annual, FeeMode mode) {
    check_live(inp);
    if (!(fee_annual >= 0.0)) {
        throw std::domain_error("fee_annual must be >= 0");
    }
    if (fee_annual == 0.0) {
        return 0.0;
    }
    const double scale = fee_annual * lq;
    if (mode == FeeMode::AtClose) {
        return scale * expected_discounted_tau(inp);
    }
    if (inp.r < kFeeRateEps) {
        // lim_{r->0} (1 - F(r))/r = E[tau].
        return scale * expected_discounted_tau(inp);
    }
    return scale * (1.0 - survival_transform(inp)) / inp.r;
}

}  // namespace rnp
