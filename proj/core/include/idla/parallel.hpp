#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace idla {

/// Worker count: IDLA_THREADS when set (>= 1), else the hardware count.
inline int thread_budget() {
    if (const char* env = std::getenv("IDLA_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

/// Run f(0..n-1) on a pool; jobs must be independent.  Results keyed by
/// index stay deterministic regardless of scheduling.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const int workers = std::min<std::size_t>(std::size_t(thread_budget()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                f(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace idla
