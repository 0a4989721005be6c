#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "snslab/field.hpp"

using namespace snslab;

TEST_CASE("basis vectors have the diagonal norms") {
    auto basis = build_basis(1.0, 2);
    for (std::size_t i : {std::size_t(0), basis->size() / 2, basis->size() - 1}) {
        auto u = basis_vector(basis, i);
        const double lam = basis->eigenvalue(i);
        CHECK(norm_h(u) == Catch::Approx(1.0).epsilon(1e-14));
        CHECK(norm_v(u) == Catch::Approx(std::sqrt(lam)).epsilon(1e-14));
        CHECK(norm_da(u) == Catch::Approx(lam).epsilon(1e-14));
        CHECK(norm(u, NormKind::AHalfImage) == Catch::Approx(std::sqrt(lam)).epsilon(1e-14));
    }
}

TEST_CASE("zero field has zero norms") {
    auto basis = build_basis(1.0, 1);
    SpectralField z(basis);
    for (auto kind : {NormKind::H, NormKind::V, NormKind::DA, NormKind::AHalfImage})
        CHECK(norm(z, kind) == 0.0);
}

TEST_CASE("<Au,u> equals the V norm squared on random fields") {
    auto basis = build_basis(1.0, 2);
    RngStream s = RngStream::root(11).child("field-identity");
    for (int rep = 0; rep < 100; ++rep) {
        auto u = gaussian_field(basis, s);
        const double lhs = inner_h(apply_spectral_power(u, 1.0), u);
        const double rhs = norm_v(u) * norm_v(u);
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("diagonal norms agree with physical-space quadrature") {
    auto basis = build_basis(1.0, 2);
    RngStream s = RngStream::root(12).child("grid-norms");
    for (int rep = 0; rep < 3; ++rep) {
        auto u = gaussian_field(basis, s);
        const auto g = oracle::grid_norms(u);
        CHECK(norm_h(u) == Catch::Approx(g.l2).epsilon(1e-10));
        CHECK(norm_v(u) == Catch::Approx(g.grad_l2).epsilon(1e-10));
        CHECK(norm_da(u) == Catch::Approx(g.lap_l2).epsilon(1e-10));
    }
}

TEST_CASE("spectral powers act diagonally") {
    auto basis = build_basis(1.0, 1);
    RngStream s = RngStream::root(13).child("powers");
    auto u = gaussian_field(basis, s);

    auto id = apply_spectral_power(u, 0.0);
    CHECK(id.c == u.c);

    auto h1 = basis_vector(basis, 0);
    auto a_h1 = apply_spectral_power(h1, 1.0);
    CHECK(a_h1.c[0] == Catch::Approx(basis->eigenvalue(0)).epsilon(1e-14));
    for (std::size_t i = 1; i < a_h1.c.size(); ++i) CHECK(a_h1.c[i] == 0.0);

    const std::size_t j = 7;
    auto hj = basis_vector(basis, j);
    auto neg = apply_spectral_power(hj, -1.5);
    CHECK(neg.c[j] == Catch::Approx(std::pow(basis->eigenvalue(j), -1.5)).epsilon(1e-13));

    // p = -1 then p = 1 round-trips.
    auto back = apply_spectral_power(apply_spectral_power(u, -1.0), 1.0);
    for (std::size_t i = 0; i < u.c.size(); ++i) CHECK(back.c[i] == Catch::Approx(u.c[i]).epsilon(1e-13));
}

TEST_CASE("basis mismatch is rejected") {
    auto b1 = build_basis(1.0, 1);
    auto b2 = build_basis(1.0, 2);
    SpectralField u(b1), v(b2);
    CHECK_THROWS_AS(inner_h(u, v), std::invalid_argument);
    CHECK_THROWS_AS(add_scaled(u, 1.0, v), std::invalid_argument);
    CHECK_THROWS_AS(SpectralField(b1, std::vector<double>(7, 0.0)), std::invalid_argument);
}

TEST_CASE("random field scaling hits the requested |Au|") {
    auto basis = build_basis(1.0, 2);
    RngStream s = RngStream::root(14).child("scaling");
    auto u = random_field_with_da_norm(basis, 2.5, s);
    CHECK(norm_da(u) == Catch::Approx(2.5).epsilon(1e-12));
}
