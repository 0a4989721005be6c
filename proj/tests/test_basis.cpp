#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "snslab/basis.hpp"

using namespace snslab;

TEST_CASE("cutoff 1 enumerates 26 wavevectors and 52 modes") {
    auto basis = build_basis(1.0, 1);

    // Independent enumeration oracle over the integer lattice.
    std::set<Vec3i> expect;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            for (int c = -1; c <= 1; ++c)
                if (!(a == 0 && b == 0 && c == 0)) expect.insert({a, b, c});
    REQUIRE(expect.size() == 26);

    std::set<Vec3i> got(basis->lattice().begin(), basis->lattice().end());
    CHECK(got == expect);
    CHECK(basis->size() == 52);

    const double lam1 = 4.0 * std::numbers::pi * std::numbers::pi;
    int mult = 0;
    for (const Mode& m : basis->modes())
        if (std::abs(m.eigenvalue - lam1) < 1e-12) ++mult;
    CHECK(mult == 12);
    CHECK(basis->eigenvalue(0) == Catch::Approx(lam1).epsilon(1e-14));
}

TEST_CASE("k = 0 is always excluded") {
    for (int cutoff : {1, 2, 3}) {
        auto basis = build_basis(1.0, cutoff);
        for (const Mode& m : basis->modes()) CHECK(norm_sq(m.k) > 0);
    }
}

TEST_CASE("eigenvalue formula on a named wavevector") {
    auto basis = build_basis(1.0, 2);
    bool found = false;
    for (const Mode& m : basis->modes())
        if (m.k == Vec3i{1, 1, 0}) {
            found = true;
            CHECK(m.eigenvalue == Catch::Approx(8.0 * std::numbers::pi * std::numbers::pi).epsilon(1e-14));
        }
    REQUIRE(found);
}

TEST_CASE("period scaling of eigenvalues") {
    auto b2 = build_basis(2.0, 1);
    CHECK(b2->eigenvalue(0) == Catch::Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("polarization vectors are unit and orthogonal to k") {
    auto basis = build_basis(1.0, 3);
    for (const Mode& m : basis->modes()) {
        const Vec3d kd = {double(m.k[0]), double(m.k[1]), double(m.k[2])};
        CHECK(std::abs(dot(m.pol_vector, kd)) < 1e-13);
        CHECK(std::abs(dot(m.pol_vector, m.pol_vector) - 1.0) < 1e-13);
    }
    // The two polarizations at each k are mutually orthogonal.
    std::map<Vec3i, Vec3d> first;
    for (const Mode& m : basis->modes()) {
        if (m.polarization == 1)
            first[m.k] = m.pol_vector;
        else
            CHECK(std::abs(dot(first.at(m.k), m.pol_vector)) < 1e-13);
    }
}

TEST_CASE("modes sorted by eigenvalue with lexicographic tie-breaks") {
    auto basis = build_basis(1.0, 2);
    const auto& modes = basis->modes();
    CHECK(basis->eigenvalue(0) > 0.0);
    for (std::size_t i = 1; i < modes.size(); ++i) {
        const auto& a = modes[i - 1];
        const auto& b = modes[i];
        REQUIRE(a.eigenvalue <= b.eigenvalue + 1e-12);
        if (norm_sq(a.k) == norm_sq(b.k))
            CHECK(std::tie(a.k[0], a.k[1], a.k[2], a.polarization) <
                  std::tie(b.k[0], b.k[1], b.k[2], b.polarization));
    }
}

TEST_CASE("eigenvalue counting matches the n^(2/3) growth") {
    auto basis = build_basis(1.0, 3);
    const auto& lam = basis->eigenvalues();
    // lambda_n / n^(2/3) stays within a fixed band away from the cube corners.
    double lo = 1e300, hi = 0.0;
    for (std::size_t n = 8; n < lam.size() / 2; ++n) {
        const double r = lam[n] / std::pow(double(n + 1), 2.0 / 3.0);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(lo > 0.0);
    CHECK(hi / lo < 3.0);
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(build_basis(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_basis(0.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_basis(-1.0, 2), std::invalid_argument);
}

TEST_CASE("metadata export is deterministic and complete") {
    auto a = build_basis(1.0, 2);
    auto b = build_basis(1.0, 2);
    CHECK(a->metadata_hash() == b->metadata_hash());
    const auto j = a->metadata();
    CHECK(j["mode_count"] == a->size());
    CHECK(j["modes"].size() == a->size());
    CHECK(j["cutoff"] == 2);
    CHECK(j["modes"][0].contains("lambda"));
    CHECK(j["modes"][0].contains("e"));

    auto c = build_basis(1.0, 3);
    CHECK(a->metadata_hash() != c->metadata_hash());
}
