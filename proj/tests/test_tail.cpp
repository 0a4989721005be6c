#include <catch2/catch_amalgamated.hpp>

#include "snslab/ou.hpp"
#include "snslab/rng.hpp"
#include "snslab/tail.hpp"

using namespace snslab;

namespace {
// Samples with exactly P[Theta >= K] = e^{-eta K^2 / eps} by inverse CDF.
std::vector<double> synthetic_tail(double eta, double eps, std::size_t n, RngStream s) {
    std::vector<double> out(n);
    for (auto& x : out) x = std::sqrt(-eps * std::log(s.next_unit()) / eta);
    return out;
}
}  // namespace

TEST_CASE("synthetic tail recovers the known rate") {
    const double eps = 0.1;
    auto samples = synthetic_tail(2.0, eps, 100000, RngStream::root(41).child("syn"));
    auto grid = default_threshold_grid(samples);
    auto fit = fit_exponential_tail(samples, eps, grid);
    REQUIRE(fit.eta_hat.has_value());
    CHECK(*fit.eta_hat == Catch::Approx(2.0).margin(0.2));
    CHECK(*fit.eta_hat == Catch::Approx(2.0).epsilon(0.10));
    CHECK(fit.r_squared > 0.99);
    CHECK(*fit.c_hat > 0.0);
}

TEST_CASE("threshold below every sample gives probability one") {
    auto samples = synthetic_tail(1.0, 0.2, 5000, RngStream::root(42).child("p1"));
    auto fit = fit_exponential_tail(samples, 0.2, {0.0});
    REQUIRE(fit.bins.size() == 1);
    CHECK(fit.bins[0].p_hat == 1.0);
    CHECK(fit.bins[0].ci_hi == 1.0);
}

TEST_CASE("all-zero exceedances declare a vacuous bound") {
    std::vector<double> samples(1000, 0.01);
    auto fit = fit_exponential_tail(samples, 0.1, {5.0, 10.0});
    CHECK(fit.vacuous);
    CHECK(!fit.eta_hat.has_value());
}

TEST_CASE("empirical exceedance is non-increasing in the threshold") {
    auto samples = synthetic_tail(3.0, 0.1, 20000, RngStream::root(43).child("mono"));
    auto grid = default_threshold_grid(samples, 12);
    auto fit = fit_exponential_tail(samples, 0.1, grid);
    for (std::size_t i = 1; i < fit.bins.size(); ++i) CHECK(fit.bins[i].p_hat <= fit.bins[i - 1].p_hat);
}

TEST_CASE("bins mark the constrained regime and the fit set") {
    std::vector<double> samples = synthetic_tail(0.02, 1.0, 50000, RngStream::root(44).child("half"));
    auto fit = fit_exponential_tail(samples, 1.0, {0.2, 0.4, 0.5, 0.9, 25.0});
    CHECK(!fit.bins[0].judged);
    CHECK(!fit.bins[1].judged);
    CHECK(fit.bins[2].judged);
    CHECK(fit.bins[3].judged);
    CHECK(!fit.bins[4].in_fit);  // beyond the sample range: no exceedances
}

TEST_CASE("clopper-pearson endpoints") {
    const auto zero = clopper_pearson(0, 100);
    CHECK(zero.lo == 0.0);
    CHECK(zero.hi == Catch::Approx(1.0 - std::pow(0.025, 1.0 / 100.0)).epsilon(1e-10));
    const auto all = clopper_pearson(100, 100);
    CHECK(all.hi == 1.0);
    CHECK(all.lo == Catch::Approx(std::pow(0.025, 1.0 / 100.0)).epsilon(1e-10));
    const auto mid = clopper_pearson(50, 100);
    CHECK(mid.lo < 0.5);
    CHECK(mid.hi > 0.5);
    CHECK(mid.hi - mid.lo < 0.25);
}

TEST_CASE("ou tail fit is exponential in K^2 and dominated by the weak envelope") {
    auto basis = build_basis(1.0, 1);
    const NoiseSpec noise = noise_coefficients(*basis);
    const double eps = 0.1;
    auto thetas = ou_theta_samples(basis, noise, eps, 1e-3, 1.0, 10000,
                                   RngStream::root(45).child("outail"), 2);
    auto grid = default_threshold_grid(thetas);
    auto fit = fit_exponential_tail(thetas, eps, grid);
    REQUIRE(fit.eta_hat.has_value());
    CHECK(*fit.eta_hat > 0.0);
    CHECK(fit.r_squared >= 0.95);

    // The downstream envelope uses the weaker K^2/(4 eps) exponent; the upper
    // CI of every bin must sit below it.
    for (const auto& bin : fit.bins) {
        const double envelope = fit.c_hat.value() * std::exp(-fit.eta_hat.value() * bin.k * bin.k / (4.0 * eps));
        CHECK(bin.ci_hi <= envelope);
    }
}
