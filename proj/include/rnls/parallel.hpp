#pragma once

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace rnls {

/// Worker count: explicit value, else RNLS_THREADS, else hardware concurrency.
inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RNLS_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Run fn(0..count-1) on up to `workers` threads. Results must be written to
/// per-index slots by the caller; completion order never matters.
template <class Fn>
void run_indexed_jobs(std::size_t count, int workers, Fn&& fn) {
    workers = std::max(1, workers);
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t nthreads = std::min<std::size_t>(workers, count);
    std::exception_ptr first_error = nullptr;
    std::mutex err_mu;
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rnls
