#include <cstdlib>
#include <set>

#include "doctest.h"
#include "trajphase/ensemble.hpp"
#include "trajphase/operators.hpp"
#include "trajphase/quadrature.hpp"

using namespace trajphase;

TEST_CASE("simpson") {
    std::vector<double> f;
    for (int n : {2, 3, 4, 7, 10}) {
        f.clear();
        const double h = 2.0 / n;
        for (int k = 0; k <= n; ++k) {
            const double x = k * h;
            f.push_back(x * x * x - 2 * x + 1);
        }
        CHECK(simpson(f, h) == doctest::Approx(4.0 - 4.0 + 2.0).epsilon(1e-14));
    }
    CHECK(simpson(std::vector<double>{3.0}, 1.0) == 0.0);
    CHECK(simpson(std::vector<double>{1.0, 3.0}, 0.5) == doctest::Approx(1.0));
    CHECK_THROWS_AS(simpson(std::vector<double>{}, 1.0), InvalidArgument);
}

TEST_CASE("compensated sums") {
    CompensatedSum<double> s;
    s.add(1.0);
    for (int i = 0; i < 1000; ++i) s.add(1e-16);
    s.add(-1.0);
    CHECK(s.value() == doctest::Approx(1e-13).epsilon(1e-6));

    CompensatedSum<cd> c;
    c.add(cd(1e16, -1e16));
    c.add(cd(1.0, 1.0));
    c.add(cd(-1e16, 1e16));
    CHECK(c.value() == cd(1.0, 1.0));
}

TEST_CASE("derived streams") {
    std::set<std::uint64_t> first;
    for (std::uint64_t i = 0; i < 1000; ++i) first.insert(derive_stream(42, i)());
    CHECK(first.size() == 1000);
    CHECK(derive_stream(1, 5)() == derive_stream(1, 5)());
    CHECK(derive_stream(1, 5)() != derive_stream(2, 5)());
}

TEST_CASE("thread count resolution") {
    ::unsetenv("TRAJPHASE_THREADS");
    CHECK(resolve_thread_count(3) == 3);
    CHECK(resolve_thread_count(0) >= 1);
    ::setenv("TRAJPHASE_THREADS", "2", 1);
    CHECK(resolve_thread_count(8) == 2);
    CHECK(resolve_thread_count(1) == 1);
    ::setenv("TRAJPHASE_THREADS", "junk", 1);
    CHECK(resolve_thread_count(5) == 5);
    ::unsetenv("TRAJPHASE_THREADS");
}

TEST_CASE("run_chunked") {
    auto sum_ids = [](int threads) {
        auto parts = run_chunked(1000, 64, threads, 0.0, [](std::size_t b, std::size_t e, double& acc) {
            for (std::size_t i = b; i < e; ++i) acc += std::sqrt(static_cast<double>(i));
        });
        CHECK(parts.size() == 16);
        double total = 0;
        for (double p : parts) total += p;
        return total;
    };
    CHECK(sum_ids(1) == sum_ids(4));
    CHECK_THROWS_AS(run_chunked(10, 2, 3, 0, [](std::size_t b, std::size_t, int&) {
                        if (b == 4) throw NumericError("boom");
                    }),
                    NumericError);
}
