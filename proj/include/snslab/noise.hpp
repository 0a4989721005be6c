#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "snslab/basis.hpp"
#include "snslab/rng.hpp"

namespace snslab {

/// Power-law noise amplitudes sigma_i = lambda_i^{-3/2}, so the covariance is
/// A^{-3}; the trace sum sigma_i^2 converges under lambda_n ~ n^{2/3}.
struct NoiseSpec {
    std::vector<double> sigmas;
    double trace = 0.0;

    static NoiseSpec standard(const StokesBasis& basis) {
        NoiseSpec spec;
        spec.sigmas.reserve(basis.size());
        for (double lam : basis.eigenvalues()) {
            const double s = std::pow(lam, -1.5);
            spec.sigmas.push_back(s);
            spec.trace += s * s;
        }
        return spec;
    }

    static NoiseSpec zero(const StokesBasis& basis) {
        NoiseSpec spec;
        spec.sigmas.assign(basis.size(), 0.0);
        return spec;
    }
};

inline NoiseSpec noise_coefficients(const StokesBasis& basis) { return NoiseSpec::standard(basis); }

/// Brownian increments over a uniform grid: row j holds the N(0, dt) increments
/// of every mode's driving motion over [j dt, (j+1) dt]. Exactly reproducible
/// from the stream that filled it.
struct WienerPath {
    double dt = 0.0;
    std::size_t n_steps = 0;
    std::size_t n_modes = 0;
    std::vector<double> increments;  // n_steps x n_modes, row-major
    std::uint64_t stream_key = 0;

    double* row(std::size_t j) { return increments.data() + j * n_modes; }
    const double* row(std::size_t j) const { return increments.data() + j * n_modes; }
};

inline WienerPath sample_wiener(const StokesBasis& basis, std::size_t n_steps, double dt,
                                RngStream stream) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_wiener: dt must be positive");
    if (n_steps < 1) throw std::invalid_argument("sample_wiener: need at least one step");
    WienerPath path;
    path.dt = dt;
    path.n_steps = n_steps;
    path.n_modes = basis.size();
    path.stream_key = stream.key();
    path.increments.resize(n_steps * basis.size());
    const double root_dt = std::sqrt(dt);
    for (double& x : path.increments) x = root_dt * stream.normal();
    return path;
}

/// Additive forcing increments for the integrators: Delta w_i over each step.
/// Feeding the sigma-scaled increments of a WienerPath reproduces the
/// stochastic dynamics path for path; a zero forcing gives the unforced flow.
struct ForcingPath {
    double dt = 0.0;
    std::size_t n_steps = 0;
    std::size_t n_modes = 0;
    std::vector<double> increments;  // n_steps x n_modes, row-major

    const double* row(std::size_t j) const { return increments.data() + j * n_modes; }

    static ForcingPath zero(const StokesBasis& basis, std::size_t n_steps, double dt) {
        ForcingPath f;
        f.dt = dt;
        f.n_steps = n_steps;
        f.n_modes = basis.size();
        f.increments.assign(n_steps * basis.size(), 0.0);
        return f;
    }

    static ForcingPath from_wiener(const WienerPath& w, const NoiseSpec& noise) {
        ForcingPath f;
        f.dt = w.dt;
        f.n_steps = w.n_steps;
        f.n_modes = w.n_modes;
        f.increments.resize(w.increments.size());
        for (std::size_t j = 0; j < w.n_steps; ++j)
            for (std::size_t i = 0; i < w.n_modes; ++i)
                f.increments[j * w.n_modes + i] = noise.sigmas[i] * w.increments[j * w.n_modes + i];
        return f;
    }

    /// Cumulative w(t_j) for one mode (w(0) = 0).
    std::vector<double> cumulative(std::size_t mode) const {
        std::vector<double> w(n_steps + 1, 0.0);
        for (std::size_t j = 0; j < n_steps; ++j) w[j + 1] = w[j] + increments[j * n_modes + mode];
        return w;
    }
};

}  // namespace snslab
