#pragma once

#include <cmath>
#include <vector>

#include "snslab/field.hpp"
#include "snslab/noise.hpp"
#include "snslab/parallel.hpp"
#include "snslab/rng.hpp"

namespace snslab {

/// Auxiliary Stokes process dZ + nu A Z dt = A^{-3/2} dW, Z(0) = 0, sampled
/// with the exact per-mode transition law: the distribution at grid points
/// carries no discretization bias, only the running sup is grid-limited.
struct OUTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> z;  // coefficients per grid time
    std::vector<double> theta;           // running sup of |Az| up to each grid time
};

/// Per-mode variance of z_i(t): sigma_i^2 (1 - e^{-2 nu lambda_i t}) / (2 nu lambda_i).
inline double ou_mode_variance(double lambda, double sigma, double nu, double t) {
    if (sigma == 0.0) return 0.0;
    return sigma * sigma * (1.0 - std::exp(-2.0 * nu * lambda * t)) / (2.0 * nu * lambda);
}

/// Closed-form E|AZ(t)|^2 = sum_i lambda_i^2 Var z_i(t); with the standard
/// noise and nu = 1 this reduces to sum_i lambda_i^{-2} (1 - e^{-2 lambda_i t}) / 2.
inline double ou_second_moment_oracle(const StokesBasis& basis, const NoiseSpec& noise, double nu,
                                      double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const double lam = basis.eigenvalue(i);
        s += lam * lam * ou_mode_variance(lam, noise.sigmas[i], nu, t);
    }
    return s;
}

namespace detail {

struct OUStepper {
    std::vector<double> decay;      // e^{-nu lambda dt}
    std::vector<double> noise_std;  // per-step transition standard deviation

    OUStepper(const StokesBasis& basis, const NoiseSpec& noise, double nu, double dt) {
        decay.reserve(basis.size());
        noise_std.reserve(basis.size());
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const double lam = basis.eigenvalue(i);
            decay.push_back(std::exp(-nu * lam * dt));
            noise_std.push_back(std::sqrt(ou_mode_variance(lam, noise.sigmas[i], nu, dt)));
        }
    }

    void step(std::vector<double>& z, RngStream& stream) const {
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = decay[i] * z[i] + noise_std[i] * stream.normal();
    }
};

}  // namespace detail

inline OUTrajectory simulate_stokes_ou(const BasisPtr& basis, const NoiseSpec& noise, double T,
                                       double dt, double nu, RngStream stream) {
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("simulate_stokes_ou: T, dt > 0 required");
    const std::size_t n_steps = std::size_t(std::llround(T / dt));
    const detail::OUStepper stepper(*basis, noise, nu, dt);
    const auto& lam = basis->eigenvalues();

    OUTrajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.z.reserve(n_steps + 1);
    traj.theta.reserve(n_steps + 1);

    std::vector<double> z(basis->size(), 0.0);
    double theta = 0.0;
    traj.times.push_back(0.0);
    traj.z.push_back(z);
    traj.theta.push_back(0.0);
    for (std::size_t j = 1; j <= n_steps; ++j) {
        stepper.step(z, stream);
        theta = std::max(theta, std::sqrt(norm_da_sq(lam, z)));
        traj.times.push_back(double(j) * dt);
        traj.z.push_back(z);
        traj.theta.push_back(theta);
    }
    return traj;
}

/// Running sup of |Az| over every stride-th grid point of a stored trajectory;
/// subsampling couples refinement studies pathwise.
inline double theta_on_subgrid(const OUTrajectory& traj, const StokesBasis& basis, std::size_t stride) {
    const auto& lam = basis.eigenvalues();
    double theta = 0.0;
    for (std::size_t j = 0; j < traj.z.size(); j += stride)
        theta = std::max(theta, std::sqrt(norm_da_sq(lam, traj.z[j])));
    return theta;
}

/// Theta_eps samples over an ensemble of independent paths (streamed; nothing
/// but the sup statistic is kept). Path i uses stream.child(i).
inline std::vector<double> ou_theta_samples(const BasisPtr& basis, const NoiseSpec& noise, double eps,
                                            double dt, double nu, std::size_t n, RngStream stream,
                                            int jobs) {
    const std::size_t n_steps = std::size_t(std::llround(eps / dt));
    const detail::OUStepper stepper(*basis, noise, nu, dt);
    const auto& lam = basis->eigenvalues();
    std::vector<double> out(n, 0.0);
    parallel_for(n, jobs, [&](std::size_t i) {
        RngStream s = stream.child(i);
        std::vector<double> z(basis->size(), 0.0);
        double theta = 0.0;
        for (std::size_t j = 0; j < n_steps; ++j) {
            stepper.step(z, s);
            theta = std::max(theta, std::sqrt(norm_da_sq(lam, z)));
        }
        out[i] = theta;
    });
    return out;
}

struct OUEndpointSamples {
    std::vector<double> da_norm_sq;             // |AZ(t)|^2 per path
    std::vector<std::vector<double>> mode_values;  // per requested mode, z_i(t) per path
};

inline OUEndpointSamples ou_endpoint_samples(const BasisPtr& basis, const NoiseSpec& noise, double t,
                                             double dt, double nu, const std::vector<std::size_t>& modes,
                                             std::size_t n, RngStream stream, int jobs) {
    const std::size_t n_steps = std::size_t(std::llround(t / dt));
    const detail::OUStepper stepper(*basis, noise, nu, dt);
    const auto& lam = basis->eigenvalues();
    OUEndpointSamples out;
    out.da_norm_sq.assign(n, 0.0);
    out.mode_values.assign(modes.size(), std::vector<double>(n, 0.0));
    parallel_for(n, jobs, [&](std::size_t i) {
        RngStream s = stream.child(i);
        std::vector<double> z(basis->size(), 0.0);
        for (std::size_t j = 0; j < n_steps; ++j) stepper.step(z, s);
        out.da_norm_sq[i] = norm_da_sq(lam, z);
        for (std::size_t m = 0; m < modes.size(); ++m) out.mode_values[m][i] = z[modes[m]];
    });
    return out;
}

}  // namespace snslab
