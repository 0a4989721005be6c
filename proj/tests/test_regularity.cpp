#include <catch2/catch_amalgamated.hpp>

#include "snslab/regularity.hpp"

using namespace snslab;

namespace {
constexpr double kCStar = 0.25;  // representative frozen value for unit tests

ForcingPath noise_forcing(const BasisPtr& basis, std::size_t n_steps, double dt, RngStream s,
                          double scale = 1.0) {
    NoiseSpec noise = NoiseSpec::standard(*basis);
    for (double& x : noise.sigmas) x *= scale;
    return ForcingPath::from_wiener(sample_wiener(*basis, n_steps, dt, s), noise);
}
}  // namespace

TEST_CASE("precondition |Ax0| <= K is enforced") {
    auto basis = build_basis(1.0, 1);
    RngStream s = RngStream::root(81);
    auto x0 = random_field_with_da_norm(basis, 2.0, s);
    auto w = ForcingPath::zero(*basis, 100, 1e-3);
    CHECK_THROWS_AS(check_local_regularity(basis, x0, w, 1.0, 0.05, 1e-3, 1.0, kCStar),
                    std::invalid_argument);
}

TEST_CASE("epsilon gate is checked") {
    auto basis = build_basis(1.0, 1);
    auto x0 = basis_vector(basis, 0, 0.5 / basis->eigenvalue(0));  // |Ax0| = 0.5
    const double k = 1.0;
    const double eps_max = 1.0 / (5.0 * kCStar * k * k);
    auto w = ForcingPath::zero(*basis, 2000, 1e-3);
    auto rep = check_local_regularity(basis, x0, w, k, 2.0 * eps_max, 1e-3, 1.0, kCStar);
    CHECK(!rep.eps_hypothesis_ok);
    CHECK(!rep.asserted);
}

TEST_CASE("theta gate reports hypotheses violated") {
    auto basis = build_basis(1.0, 1);
    auto x0 = basis_vector(basis, 0, 0.3 / basis->eigenvalue(0));  // |Ax0| = 0.3
    const double k = 0.8;
    // Amplified forcing pushes theta_eps way past K/2.
    auto w = noise_forcing(basis, 100, 1e-3, RngStream::root(82).child("loud"), 400.0);
    auto rep = check_local_regularity(basis, x0, w, k, 0.1, 1e-3, 1.0, kCStar);
    CHECK(rep.theta_eps * rep.theta_eps > 0.25 * k * k);
    CHECK(!rep.theta_hypothesis_ok);
    CHECK(!rep.asserted);
}

TEST_CASE("single-mode start with zero forcing passes at the maximal epsilon") {
    auto basis = build_basis(1.0, 1);
    const double k = 1.0;
    const double lam = basis->eigenvalue(4);
    auto x0 = basis_vector(basis, 4, k / lam);  // |Ax0| = K exactly
    const double dt = 1e-3;
    const double eps_raw = 1.0 / (5.0 * kCStar * k * k);
    const double eps = dt * std::floor(eps_raw / dt);
    auto w = ForcingPath::zero(*basis, std::size_t(eps / dt) + 1, dt);
    auto rep = check_local_regularity(basis, x0, w, k, eps, dt, 1.0, kCStar);
    CHECK(rep.hypotheses_ok);
    CHECK(rep.asserted);
    CHECK(rep.bound_ok);
    CHECK(rep.sup_au == Catch::Approx(k).epsilon(1e-12));  // dissipation only shrinks it
    CHECK(rep.riccati_ok);
    CHECK(rep.theta_eps == 0.0);
}

TEST_CASE("random runs under the gates satisfy bound and envelope") {
    auto basis = build_basis(1.0, 1);
    const double dt = 1e-3;
    for (std::uint64_t i = 0; i < 10; ++i) {
        RngStream r = RngStream::root(83).child(i);
        const double k = 0.8 + 1.4 * r.next_unit();
        auto x0 = random_field_with_da_norm(basis, k * (0.3 + 0.65 * r.next_unit()), r);
        const double eps_raw = (0.3 + 0.7 * r.next_unit()) / (5.0 * kCStar * k * k);
        const double eps = std::max(dt, dt * std::floor(std::min(eps_raw, 0.4) / dt));
        auto w = noise_forcing(basis, std::size_t(std::llround(eps / dt)), dt, r.child("w"));
        auto rep = check_local_regularity(basis, x0, w, k, eps, dt, 1.0, kCStar);
        REQUIRE(rep.hypotheses_ok);  // desk-scale noise keeps theta tiny
        CHECK(rep.asserted);
        CHECK(rep.bound_ok);
        CHECK(rep.sup_au < 2.0 * k);
        CHECK(rep.riccati_ok);
        CHECK(rep.riccati_max_ratio <= 1.0 + 1e-9);
        CHECK(rep.sharper_hypothesis_ok);
    }
}

TEST_CASE("riccati envelope is tight at the start") {
    auto basis = build_basis(1.0, 1);
    RngStream r = RngStream::root(84);
    const double k = 1.2;
    auto x0 = random_field_with_da_norm(basis, k, r);
    const double dt = 1e-3;
    const double eps = 0.05;
    auto w = noise_forcing(basis, 50, dt, r.child("w"));
    auto rep = check_local_regularity(basis, x0, w, k, eps, dt, 1.0, kCStar);
    REQUIRE(rep.asserted);
    // At s = 0 the envelope is an equality, so the max ratio must touch 1.
    CHECK(rep.riccati_max_ratio == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(rep.riccati_ok);
}
