#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace trajphase {

using RngStream = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent generator for trajectory `index` of a run seeded with `seed`.
inline RngStream derive_stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(splitmix64(index)),
                      static_cast<std::uint32_t>(splitmix64(index) >> 32)};
    return RngStream(seq);
}

/// Worker count: `requested` if positive, else hardware concurrency, capped by
/// the TRAJPHASE_THREADS environment variable when set.
inline int resolve_thread_count(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("TRAJPHASE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(1, n);
}

/// Neumaier-compensated running sum.
template <class T>
struct CompensatedSum {
    T sum{};
    T carry{};

    void add(const T& x) {
        const T t = sum + x;
        carry += compensation(sum, x, t);
        sum = t;
    }
    T value() const { return sum + carry; }

private:
    static double compensation(double s, double x, double t) {
        return std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    }
    template <class C>
    static C compensation(const C& s, const C& x, const C& t) {
        return C(compensation(s.real(), x.real(), t.real()), compensation(s.imag(), x.imag(), t.imag()));
    }
};

/// Splits [0, n) into fixed-size chunks, runs `fn(begin, end, acc)` on each
/// chunk with a fresh accumulator, and returns the accumulators in chunk order.
/// Chunking does not depend on the thread count, so ordered reductions over the
/// result are reproducible.
template <class Acc, class Fn>
std::vector<Acc> run_chunked(std::size_t n, std::size_t chunk, int threads, const Acc& prototype, Fn&& fn) {
    chunk = std::max<std::size_t>(chunk, 1);
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<Acc> accs(n_chunks, prototype);
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n_chunks)));

    std::mutex err_mutex;
    std::exception_ptr error;
    std::size_t next = 0;
    std::mutex next_mutex;
    auto worker = [&]() {
        while (true) {
            std::size_t c;
            {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (next >= n_chunks || error) return;
                c = next++;
            }
            try {
                fn(c * chunk, std::min(n, (c + 1) * chunk), accs[c]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    return accs;
}

}  // namespace trajphase
