#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "snslab/bilinear.hpp"
#include "snslab/cutoff.hpp"
#include "snslab/noise.hpp"

namespace snslab {

struct BlowupError : std::runtime_error {
    double time;
    explicit BlowupError(double t)
        : std::runtime_error("blow-up overflow at t = " + std::to_string(t)), time(t) {}
};

constexpr double kNeverStopped = std::numeric_limits<double>::infinity();

inline std::size_t grid_index(double t, double dt) {
    const double r = t / dt;
    const auto j = std::llround(r);
    if (j < 0 || std::abs(r - double(j)) > 1e-6)
        throw std::invalid_argument("time " + std::to_string(t) + " is not on the dt grid");
    return std::size_t(j);
}

struct SimOptions {
    double T = 0.1;
    double dt = 1e-3;
    double nu = 1.0;
    std::optional<CutoffSpec> cutoff;
    std::vector<std::vector<double>> probes;  // test-function coefficient vectors
    std::vector<double> checkpoint_times;     // grid-aligned
    bool record_history = false;
};

/// One simulated path of the (possibly cut-off) Galerkin dynamics. The |Au|
/// series is always kept, so stopping times at any radius can be recomputed.
struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> au_norm;  // |Au| at each grid time
    double sup_au = 0.0;
    double tau = kNeverStopped;  // first grid time with |Au| >= cutoff radius
    bool blown_up = false;
    double blowup_time = 0.0;
    SpectralField final_field;
    std::vector<SpectralField> checkpoints;
    std::vector<std::vector<double>> coeff_history;
    // Per probe phi: M_m = <u_m - u_0, phi> + int_0^{t_m} (nu <u, A phi> - <B(u, phi), u>) ds
    // with trapezoid quadrature on the grid.
    std::vector<std::vector<double>> probe_martingale;

    /// First grid time with |Au| >= rho, or the never-stopped sentinel. On
    /// blown-up paths the overflow instant counts as passage at every level.
    double first_hit(double rho) const {
        for (std::size_t j = 0; j < au_norm.size(); ++j)
            if (au_norm[j] >= rho) return times[j];
        if (blown_up) return blowup_time;
        return kNeverStopped;
    }
};

namespace detail {

class Stepper {
  public:
    Stepper(BasisPtr basis, double dt, double nu)
        : basis_(std::move(basis)), dt_(dt), nu_(nu), b_(basis_->size()) {
        if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
        decay_.reserve(basis_->size());
        for (double lam : basis_->eigenvalues()) decay_.push_back(std::exp(-nu * lam * dt));
    }

    const BasisPtr& basis() const { return basis_; }
    double dt() const { return dt_; }
    double nu() const { return nu_; }
    const std::vector<double>& decay() const { return decay_; }

    double au_sq(const std::vector<double>& u) const { return norm_da_sq(basis_->eigenvalues(), u); }

    /// Advances u by one exponential-Euler step. `au_sq_now` is |Au|^2 at the
    /// current state; dw may be null (zero forcing). Returns chi.
    double advance(std::vector<double>& u, double au_sq_now, const double* dw,
                   const std::optional<CutoffSpec>& cutoff) {
        const double chi = cutoff ? cutoff->chi(au_sq_now) : 1.0;
        bilinear_into(u, u, b_);
        const double w = dt_ * chi;
        if (dw) {
            for (std::size_t i = 0; i < u.size(); ++i) u[i] = decay_[i] * (u[i] - w * b_[i] + dw[i]);
        } else {
            for (std::size_t i = 0; i < u.size(); ++i) u[i] = decay_[i] * (u[i] - w * b_[i]);
        }
        return chi;
    }

    /// B(u, v) into `out` through this stepper's workspace.
    void bilinear_into(const std::vector<double>& u, const std::vector<double>& v,
                       std::vector<double>& out) {
        field_u_.basis = basis_;
        field_u_.c = u;  // copies; hot path below avoids this via cached fields
        field_v_.basis = basis_;
        field_v_.c = v;
        bilinear(field_u_, field_v_, out, ws_);
    }

    const std::vector<double>& last_bilinear() const { return b_; }

  private:
    BasisPtr basis_;
    double dt_, nu_;
    std::vector<double> decay_;
    std::vector<double> b_;
    BilinearWorkspace ws_;
    SpectralField field_u_, field_v_;
};

struct ProbeAccumulator {
    std::vector<double> phi;
    std::vector<double> a_phi;  // lambda_i phi_i
    double u0_dot_phi = 0.0;
    double integral = 0.0;
    double f_prev = 0.0;
    std::vector<double> m_series;
    std::vector<double> b_buf;

    void init(const BasisPtr& basis, const std::vector<double>& phi_in,
              const std::vector<double>& u0) {
        phi = phi_in;
        a_phi.resize(phi.size());
        for (std::size_t i = 0; i < phi.size(); ++i) a_phi[i] = basis->eigenvalue(i) * phi[i];
        u0_dot_phi = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) u0_dot_phi += u0[i] * phi[i];
        integral = 0.0;
        m_series.clear();
    }

    // f(u) = nu <u, A phi> - <B(u, phi), u>
    double integrand(detail::Stepper& stepper, const std::vector<double>& u, double nu) {
        double lin = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) lin += u[i] * a_phi[i];
        stepper.bilinear_into(u, phi, b_buf);
        double tri = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) tri += b_buf[i] * u[i];
        return nu * lin - tri;
    }

    void start(detail::Stepper& stepper, const std::vector<double>& u0, double nu) {
        f_prev = integrand(stepper, u0, nu);
        m_series.push_back(0.0);
    }

    void after_step(detail::Stepper& stepper, const std::vector<double>& u, double nu, double dt) {
        const double f = integrand(stepper, u, nu);
        integral += 0.5 * dt * (f_prev + f);
        f_prev = f;
        double u_dot_phi = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) u_dot_phi += u[i] * phi[i];
        m_series.push_back(u_dot_phi - u0_dot_phi + integral);
    }
};

}  // namespace detail

/// A single exponential-Euler step: the Stokes part is integrated exactly per
/// mode, drift and forcing ride through the same one-step semigroup factor.
inline SpectralField step(const SpectralField& u, double dt, const std::vector<double>& dw,
                          const std::optional<CutoffSpec>& cutoff, double nu) {
    if (dw.size() != u.size()) throw std::invalid_argument("step: forcing slice has wrong length");
    detail::Stepper stepper(u.basis, dt, nu);
    const double s = stepper.au_sq(u.c);
    if (!std::isfinite(s)) throw BlowupError(0.0);
    std::vector<double> state = u.c;
    stepper.advance(state, s, dw.data(), cutoff);
    return SpectralField(u.basis, std::move(state));
}

namespace detail {

/// Shared trajectory loop; `dw_for_step(j)` returns the forcing increment row
/// for step j (or null for unforced).
template <typename DwFn>
Trajectory run_trajectory(const BasisPtr& basis, const SpectralField& x0, const SimOptions& opts,
                          DwFn&& dw_for_step) {
    if (x0.basis.get() != basis.get()) throw std::invalid_argument("basis mismatch");
    const std::size_t n_steps = grid_index(opts.T, opts.dt);
    if (n_steps == 0) throw std::invalid_argument("horizon shorter than one step");

    Stepper stepper(basis, opts.dt, opts.nu);
    std::vector<std::size_t> checkpoint_idx;
    for (double t : opts.checkpoint_times) checkpoint_idx.push_back(grid_index(t, opts.dt));

    Trajectory traj;
    traj.dt = opts.dt;
    std::vector<double> u = x0.c;

    std::vector<ProbeAccumulator> probes(opts.probes.size());
    for (std::size_t p = 0; p < probes.size(); ++p) {
        if (opts.probes[p].size() != basis->size())
            throw std::invalid_argument("probe coefficient count != basis size");
        probes[p].init(basis, opts.probes[p], u);
        probes[p].start(stepper, u, opts.nu);
    }

    const double rho = opts.cutoff ? opts.cutoff->radius() : kNeverStopped;

    auto record_node = [&](std::size_t j, double au) {
        const double t = double(j) * opts.dt;
        traj.times.push_back(t);
        traj.au_norm.push_back(au);
        traj.sup_au = std::max(traj.sup_au, au);
        if (traj.tau == kNeverStopped && au >= rho) traj.tau = t;
        if (opts.record_history) traj.coeff_history.push_back(u);
        for (std::size_t c = 0; c < checkpoint_idx.size(); ++c)
            if (checkpoint_idx[c] == j) traj.checkpoints.push_back(SpectralField(basis, u));
    };

    double au_sq = stepper.au_sq(u);
    if (!std::isfinite(au_sq)) throw std::invalid_argument("non-finite initial state");
    record_node(0, std::sqrt(au_sq));

    for (std::size_t j = 0; j < n_steps; ++j) {
        const double* dw = dw_for_step(j);
        stepper.advance(u, au_sq, dw, opts.cutoff);
        au_sq = stepper.au_sq(u);
        if (!std::isfinite(au_sq)) {
            traj.blown_up = true;
            traj.blowup_time = double(j + 1) * opts.dt;
            break;
        }
        record_node(j + 1, std::sqrt(au_sq));
        for (auto& p : probes) p.after_step(stepper, u, opts.nu, opts.dt);
    }

    traj.final_field = SpectralField(basis, u);
    for (auto& p : probes) traj.probe_martingale.push_back(std::move(p.m_series));
    return traj;
}

}  // namespace detail

/// Stochastic path: forcing increments are sigma_i * (sqrt(dt) xi) drawn
/// mode-by-mode per step from the stream (xi standard normal).
inline Trajectory simulate(const BasisPtr& basis, const NoiseSpec& noise, const SpectralField& x0,
                           const SimOptions& opts, RngStream stream) {
    const double root_dt = std::sqrt(opts.dt);
    std::vector<double> dw(basis->size());
    return detail::run_trajectory(basis, x0, opts, [&](std::size_t) {
        for (std::size_t i = 0; i < dw.size(); ++i) dw[i] = noise.sigmas[i] * (root_dt * stream.normal());
        return dw.data();
    });
}

/// Deterministically forced path (the same update rule fed explicit increments).
inline Trajectory simulate_forced(const BasisPtr& basis, const SpectralField& x0,
                                  const ForcingPath& w, const SimOptions& opts) {
    if (std::abs(w.dt - opts.dt) > 1e-12) throw std::invalid_argument("forcing grid != integrator grid");
    if (w.n_steps < grid_index(opts.T, opts.dt)) throw std::invalid_argument("forcing path too short");
    return detail::run_trajectory(basis, x0, opts,
                                  [&](std::size_t j) { return w.row(j); });
}

/// Solution of u(t) + int (nu A u + B(u,u)) = x0 + w(t) split against the
/// Stokes path z (z + int nu A z = w): u and z are co-integrated with the
/// same rule and v = u - z is reported for the quadratic envelope checks.
struct DeterministicSolution {
    Trajectory traj;
    std::vector<double> az_norm;  // |Az| per grid time
    std::vector<double> av_norm;  // |A(u - z)| per grid time
    double theta = 0.0;           // sup |Az| over the grid
};

inline DeterministicSolution solve_deterministic(const BasisPtr& basis, const SpectralField& x0,
                                                 const ForcingPath& w, double eps,
                                                 SimOptions opts) {
    opts.T = eps;
    DeterministicSolution sol;

    // Stokes path under the same discrete rule.
    const std::size_t n_steps = grid_index(eps, opts.dt);
    std::vector<double> z(basis->size(), 0.0);
    std::vector<double> decay;
    decay.reserve(basis->size());
    for (double lam : basis->eigenvalues()) decay.push_back(std::exp(-opts.nu * lam * opts.dt));
    std::vector<std::vector<double>> z_nodes;
    z_nodes.reserve(n_steps + 1);
    z_nodes.push_back(z);
    sol.az_norm.push_back(0.0);
    for (std::size_t j = 0; j < n_steps; ++j) {
        const double* dwj = w.row(j);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = decay[i] * (z[i] + dwj[i]);
        z_nodes.push_back(z);
        sol.az_norm.push_back(std::sqrt(norm_da_sq(basis->eigenvalues(), z)));
    }
    sol.theta = *std::max_element(sol.az_norm.begin(), sol.az_norm.end());

    if (!opts.record_history) opts.record_history = true;
    sol.traj = simulate_forced(basis, x0, w, opts);

    const auto& lam = basis->eigenvalues();
    for (std::size_t j = 0; j < sol.traj.times.size(); ++j) {
        std::vector<double> v = sol.traj.coeff_history[j];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= z_nodes[j][i];
        sol.av_norm.push_back(std::sqrt(norm_da_sq(lam, v)));
    }
    return sol;
}

}  // namespace snslab
