#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "snslab/stats.hpp"

namespace snslab {

/// Exponential tail fit of exceedance probabilities: log P[Theta >= K] is
/// regressed on K^2/eps, giving the envelope C e^{-eta K^2/eps}.
struct TailFit {
    struct Bin {
        double k = 0.0;
        std::size_t n_exceed = 0;
        std::size_t n_total = 0;
        double p_hat = 0.0;
        double ci_lo = 0.0, ci_hi = 1.0;
        double fit_value = 0.0;   // C e^{-eta K^2/eps} when the fit exists
        bool in_fit = false;      // enough exceedances to enter the regression
        bool judged = false;      // K >= 1/2, the regime the statement constrains
    };

    double epsilon = 0.0;
    std::vector<Bin> bins;
    std::optional<double> eta_hat;  // decay rate, positive on success
    std::optional<double> c_hat;    // prefactor
    double r_squared = 0.0;
    double residual_rms = 0.0;
    bool vacuous = false;  // every probability zero: only an upper bound is learned

    double envelope(double k, double eps_scale) const {
        return c_hat.value() * std::exp(-eta_hat.value() * k * k / eps_scale);
    }
};

/// Thresholds at geometrically spaced tail levels of the sample, from p_hi
/// down to max(p_lo, 20/n); all grid points live inside the sample range.
inline std::vector<double> default_threshold_grid(const std::vector<double>& samples,
                                                  std::size_t n_bins = 9, double p_hi = 0.25,
                                                  double p_lo = 0.008) {
    if (samples.size() < 20) throw std::invalid_argument("default_threshold_grid: too few samples");
    const double floor_lo = std::max(p_lo, 20.0 / double(samples.size()));
    std::vector<double> grid;
    grid.reserve(n_bins);
    for (std::size_t j = 0; j < n_bins; ++j) {
        const double frac = (n_bins == 1) ? 0.0 : double(j) / double(n_bins - 1);
        const double p = p_hi * std::pow(floor_lo / p_hi, frac);
        grid.push_back(quantile(samples, 1.0 - p));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

inline TailFit fit_exponential_tail(const std::vector<double>& theta_samples, double epsilon,
                                    const std::vector<double>& k_grid, std::size_t min_exceed = 5,
                                    double alpha = 0.05) {
    if (theta_samples.empty()) throw std::invalid_argument("fit_exponential_tail: no samples");
    if (!(epsilon > 0.0)) throw std::invalid_argument("fit_exponential_tail: epsilon must be positive");

    TailFit fit;
    fit.epsilon = epsilon;
    const std::size_t n = theta_samples.size();

    std::vector<double> xs, ys;
    for (double k : k_grid) {
        TailFit::Bin bin;
        bin.k = k;
        bin.n_total = n;
        for (double th : theta_samples)
            if (th >= k) ++bin.n_exceed;
        bin.p_hat = double(bin.n_exceed) / double(n);
        const BinomialCI ci = clopper_pearson(bin.n_exceed, n, alpha);
        bin.ci_lo = ci.lo;
        bin.ci_hi = ci.hi;
        bin.judged = (k >= 0.5);
        bin.in_fit = (bin.n_exceed >= min_exceed);
        if (bin.in_fit) {
            xs.push_back(k * k / epsilon);
            ys.push_back(std::log(bin.p_hat));
        }
        fit.bins.push_back(bin);
    }

    const bool all_zero =
        std::all_of(fit.bins.begin(), fit.bins.end(), [](const auto& b) { return b.n_exceed == 0; });
    if (all_zero) {
        fit.vacuous = true;
        return fit;
    }
    if (xs.size() >= 2) {
        const LinearFit lf = least_squares(xs, ys);
        fit.eta_hat = -lf.slope;
        fit.c_hat = std::exp(lf.intercept);
        fit.r_squared = lf.r_squared;
        fit.residual_rms = lf.residual_rms;
        for (auto& bin : fit.bins)
            bin.fit_value = fit.c_hat.value() * std::exp(-fit.eta_hat.value() * bin.k * bin.k / epsilon);
    }
    return fit;
}

}  // namespace snslab
