#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "snslab/bilinear.hpp"

using namespace snslab;

namespace {
double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-30);
}
}  // namespace

TEST_CASE("single-mode self-advection vanishes exactly") {
    auto basis = build_basis(1.0, 2);
    for (std::size_t i : {std::size_t(0), std::size_t(17), basis->size() - 1}) {
        auto u = basis_vector(basis, i, 1.7);
        auto b = bilinear(u, u);
        for (double c : b.c) CHECK(c == 0.0);
    }
}

TEST_CASE("bilinearity in each slot, zero annihilates") {
    auto basis = build_basis(1.0, 1);
    RngStream s = RngStream::root(21).child("bilinearity");
    auto u = gaussian_field(basis, s);
    auto v = gaussian_field(basis, s);
    SpectralField zero(basis);

    auto bz = bilinear(zero, v);
    auto zb = bilinear(u, zero);
    for (double c : bz.c) CHECK(c == 0.0);
    for (double c : zb.c) CHECK(c == 0.0);

    auto w = gaussian_field(basis, s);
    auto lhs = bilinear(add_scaled(u, 2.0, w), v);
    auto rhs = add_scaled(bilinear(u, v), 2.0, bilinear(w, v));
    CHECK(rel_err(lhs.c, rhs.c) < 1e-12);
}

TEST_CASE("two-mode pair matches the physical-space oracle") {
    auto basis = build_basis(1.0, 2);
    // k1 = (1,0,0) and k2 = (0,1,0), one polarization each.
    SpectralField u(basis), v(basis);
    std::size_t i1 = basis->size(), i2 = basis->size();
    for (std::size_t i = 0; i < basis->size(); ++i) {
        const Mode& m = basis->mode(i);
        if (m.k == Vec3i{1, 0, 0} && m.polarization == 1) i1 = i;
        if (m.k == Vec3i{0, 1, 0} && m.polarization == 1) i2 = i;
    }
    REQUIRE(i1 < basis->size());
    REQUIRE(i2 < basis->size());
    u.c[i1] = 1.0;
    u.c[i2] = 0.5;
    v.c[i1] = -0.3;
    v.c[i2] = 1.2;

    auto spectral = bilinear(u, v);
    auto physical = oracle::bilinear_physical(u, v);
    CHECK(rel_err(spectral.c, physical) < 1e-10);
}

TEST_CASE("random pairs at cutoff 2 match the oracle") {
    auto basis = build_basis(1.0, 2);
    RngStream s = RngStream::root(22).child("b-oracle");
    for (int rep = 0; rep < 5; ++rep) {
        auto u = gaussian_field(basis, s);
        auto v = gaussian_field(basis, s);
        auto spectral = bilinear(u, v);
        auto physical = oracle::bilinear_physical(u, v);
        CHECK(rel_err(spectral.c, physical) < 1e-8);
    }
}

TEST_CASE("output is divergence-free mode by mode") {
    auto basis = build_basis(1.0, 2);
    RngStream s = RngStream::root(23).child("divfree");
    auto u = gaussian_field(basis, s);
    auto v = gaussian_field(basis, s);
    auto b = bilinear(u, v);
    // Reconstruct the complex lattice field and contract with k.
    std::vector<CVec3> hat;
    to_complex_lattice(b, hat);
    for (std::size_t i = 0; i < basis->lattice().size(); ++i) {
        const Vec3i& k = basis->lattice()[i];
        const Cplx d = hat[i].x * double(k[0]) + hat[i].y * double(k[1]) + hat[i].z * double(k[2]);
        CHECK(std::abs(d) < 1e-12);
    }
}

TEST_CASE("energy flux vanishes at any truncation") {
    for (int cutoff : {1, 2}) {
        auto basis = build_basis(1.0, cutoff);
        RngStream s = RngStream::root(24).child("flux").child(std::uint64_t(cutoff));
        for (int rep = 0; rep < 20; ++rep) {
            auto u = gaussian_field(basis, s);
            auto b = bilinear(u, u);
            const double flux = inner_h(b, u);
            const double scale = norm_h(b) * norm_h(u);
            CHECK(std::abs(flux) <= 1e-10 * std::max(scale, 1.0));
        }
    }
}

TEST_CASE("skew symmetry of the trilinear form") {
    auto basis = build_basis(1.0, 1);
    RngStream s = RngStream::root(25).child("skew");
    for (int rep = 0; rep < 10; ++rep) {
        auto u = gaussian_field(basis, s);
        auto v = gaussian_field(basis, s);
        auto w = gaussian_field(basis, s);
        const double a = inner_h(bilinear(u, v), w);
        const double b = inner_h(bilinear(u, w), v);
        CHECK(a == Catch::Approx(-b).margin(1e-9 * (1.0 + std::abs(a))));
    }
}

TEST_CASE("trilinear form matches quadrature") {
    auto basis = build_basis(1.0, 1);
    RngStream s = RngStream::root(26).child("trilinear");
    auto u = gaussian_field(basis, s);
    auto v = gaussian_field(basis, s);
    auto z = gaussian_field(basis, s);
    const double spectral = inner_h(bilinear(u, v), z);
    const double physical = oracle::bilinear_inner_physical(u, v, z);
    CHECK(spectral == Catch::Approx(physical).epsilon(1e-9));
}

TEST_CASE("gradient-sup bound on the trilinear form with a frozen constant") {
    auto basis = build_basis(1.0, 1);
    // Fit once on a fixed-seed sample, freeze, then assert on fresh samples.
    RngStream fit = RngStream::root(27).child("linf-fit");
    double fitted = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        auto u = gaussian_field(basis, fit);
        auto v = gaussian_field(basis, fit);
        auto z = gaussian_field(basis, fit);
        const double lhs = std::abs(inner_h(bilinear(u, v), z));
        const double rhs = oracle::grad_sup_norm(v) * norm_h(u) * norm_h(z);
        fitted = std::max(fitted, lhs / rhs);
    }
    const double frozen = 2.0 * fitted;
    RngStream fresh = RngStream::root(28).child("linf-check");
    for (int rep = 0; rep < 10; ++rep) {
        auto u = gaussian_field(basis, fresh);
        auto v = gaussian_field(basis, fresh);
        auto z = gaussian_field(basis, fresh);
        const double lhs = std::abs(inner_h(bilinear(u, v), z));
        const double rhs = frozen * oracle::grad_sup_norm(v) * norm_h(u) * norm_h(z);
        CHECK(lhs <= rhs);
    }
}

TEST_CASE("basis mismatch rejected") {
    auto b1 = build_basis(1.0, 1);
    auto b2 = build_basis(1.0, 2);
    SpectralField u(b1), v(b2);
    CHECK_THROWS_AS(bilinear(u, v), std::invalid_argument);
}
