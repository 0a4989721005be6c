#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

namespace snslab {

struct MeanEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

inline MeanEstimate mean_se(const std::vector<double>& xs) {
    MeanEstimate out;
    out.n = xs.size();
    if (xs.empty()) return out;
    double s = 0.0;
    for (double x : xs) s += x;
    out.mean = s / double(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - out.mean) * (x - out.mean);
    if (xs.size() > 1) out.se = std::sqrt(v / double(xs.size() - 1) / double(xs.size()));
    return out;
}

struct BinomialCI {
    double lo = 0.0, hi = 1.0;
};

/// Exact (Clopper-Pearson) binomial interval; valid in the deep tail where the
/// normal approximation is not.
inline BinomialCI clopper_pearson(std::size_t successes, std::size_t n, double alpha = 0.05) {
    if (n == 0) throw std::invalid_argument("clopper_pearson: n = 0");
    const double k = double(successes);
    BinomialCI ci;
    ci.lo = (successes == 0) ? 0.0 : boost::math::ibeta_inv(k, double(n - successes) + 1.0, alpha / 2.0);
    ci.hi = (successes == n) ? 1.0
                             : boost::math::ibeta_inv(k + 1.0, double(n - successes), 1.0 - alpha / 2.0);
    return ci;
}

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
    double residual_rms = 0.0;
    std::size_t n = 0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares: need >= 2 points");
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
    LinearFit f;
    f.n = x.size();
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double fit = f.intercept + f.slope * x[i];
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    f.residual_rms = std::sqrt(ss_res / n);
    return f;
}

/// Kolmogorov distribution tail Q(x) = 2 sum (-1)^{j-1} exp(-2 j^2 x^2).
inline double kolmogorov_tail(double x) {
    if (x <= 0.0) return 1.0;
    double q = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * x * x);
        q += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

/// One-sample KS test p-value against a fully specified continuous CDF, using
/// the Stephens small-sample correction.
template <typename Cdf>
double ks_test_pvalue(std::vector<double> samples, Cdf cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - double(i) / n));
        d = std::max(d, std::abs(f - double(i + 1) / n));
    }
    const double stat = d * (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
    return kolmogorov_tail(stat);
}

inline double normal_cdf(double x, double sigma) {
    return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return (n % 2 == 1) ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(xs.begin(), xs.end());
    const double pos = q * double(xs.size() - 1);
    const std::size_t i = std::size_t(pos);
    if (i + 1 >= xs.size()) return xs.back();
    const double w = pos - double(i);
    return (1.0 - w) * xs[i] + w * xs[i + 1];
}

}  // namespace snslab
