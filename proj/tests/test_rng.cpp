#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "snslab/noise.hpp"
#include "snslab/rng.hpp"

using namespace snslab;

TEST_CASE("identical seeds give bit-identical streams") {
    RngStream a = RngStream::root(987654321).child("wiener").child(std::uint64_t(3));
    RngStream b = RngStream::root(987654321).child("wiener").child(std::uint64_t(3));
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("sibling and child streams differ") {
    RngStream root = RngStream::root(42);
    std::set<std::uint64_t> keys;
    for (std::uint64_t i = 0; i < 1000; ++i) keys.insert(root.child(i).key());
    keys.insert(root.child("a").key());
    keys.insert(root.child("b").key());
    keys.insert(root.child("a").child("b").key());
    CHECK(keys.size() == 1003);
}

TEST_CASE("unit draws live in (0,1]") {
    RngStream s = RngStream::root(7).child("unit");
    for (int i = 0; i < 100000; ++i) {
        const double u = s.next_unit();
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
    }
}

TEST_CASE("normal draws have the right first moments") {
    RngStream s = RngStream::root(8).child("normal");
    const int n = 200000;
    double m = 0.0, v = 0.0, k4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = s.normal();
        m += x;
        v += x * x;
        k4 += x * x * x * x;
    }
    m /= n;
    v /= n;
    k4 /= n;
    CHECK(std::abs(m) < 4.0 / std::sqrt(double(n)));
    CHECK(v == Catch::Approx(1.0).margin(0.02));
    CHECK(k4 == Catch::Approx(3.0).margin(0.15));
}

TEST_CASE("wiener matrix reproducibility and moments") {
    auto basis = build_basis(1.0, 1);
    const double dt = 1e-3;

    auto w1 = sample_wiener(*basis, 50, dt, RngStream::root(9).child("w"));
    auto w2 = sample_wiener(*basis, 50, dt, RngStream::root(9).child("w"));
    REQUIRE(w1.increments == w2.increments);

    // Entry (3, 5) over many independent paths: mean within the CLT band,
    // variance within 10% of dt.
    const int n_paths = 10000;
    double mean = 0.0, var = 0.0;
    for (int p = 0; p < n_paths; ++p) {
        auto w = sample_wiener(*basis, 4, dt, RngStream::root(10).child(std::uint64_t(p)));
        const double x = w.row(3)[5];
        mean += x;
        var += x * x;
    }
    mean /= n_paths;
    var /= n_paths;
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(dt / double(n_paths)));
    CHECK(var == Catch::Approx(dt).epsilon(0.10));
}

TEST_CASE("wiener argument validation") {
    auto basis = build_basis(1.0, 1);
    CHECK_THROWS_AS(sample_wiener(*basis, 10, 0.0, RngStream::root(1)), std::invalid_argument);
    CHECK_THROWS_AS(sample_wiener(*basis, 0, 1e-3, RngStream::root(1)), std::invalid_argument);
}
