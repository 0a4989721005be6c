#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace snslab {

inline int default_jobs() {
    if (const char* env = std::getenv("SNSLAB_JOBS")) {
        const int j = std::atoi(env);
        if (j >= 1) return j;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? int(hc) : 1;
}

/// Runs fn(i) for i in [0, n) on `jobs` threads. Work items are claimed through
/// an atomic counter; determinism is the caller's job (write results only into
/// slot i, derive per-item RNG streams by index).
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    if (n == 0) return;
    jobs = std::max(1, jobs);
    if (jobs == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int nt = int(std::min<std::size_t>(std::size_t(jobs), n));
    pool.reserve(std::size_t(nt));
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace snslab
