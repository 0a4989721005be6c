#pragma once

#include <cmath>
#include <stdexcept>

namespace snslab {

/// Smooth cutoff chi applied to r = |Au|^2: identically 1 on [0, S], 0 on
/// [S + 2, infinity), non-increasing, |chi'| <= 1 (the C1 cubic smoothstep
/// peaks at 3/4). Experiment-level radii rho on the |Au| scale activate at
/// S = rho^2, so the cutoff dynamics match the plain ones exactly while
/// |Au| <= rho.
struct CutoffSpec {
    double activation_sq = 0.0;  // S, threshold on |Au|^2

    static CutoffSpec radius(double rho) {
        if (!(rho > 0.0)) throw std::invalid_argument("CutoffSpec: radius must be positive");
        return CutoffSpec{rho * rho};
    }

    double radius() const { return std::sqrt(activation_sq); }

    double chi(double r) const {
        if (r <= activation_sq) return 1.0;
        if (r >= activation_sq + 2.0) return 0.0;
        const double q = (r - activation_sq) / 2.0;
        return 1.0 + q * q * (2.0 * q - 3.0);
    }

    double chi_prime(double r) const {
        if (r <= activation_sq || r >= activation_sq + 2.0) return 0.0;
        const double q = (r - activation_sq) / 2.0;
        return 3.0 * q * (q - 1.0);  // d/dr of 2q^3 - 3q^2 + 1 with q = (r - S)/2
    }
};

}  // namespace snslab
