#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace kcmlab {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items must write
// only to their own index slot; results are then independent of scheduling.
template <class Fn>
void parallel_for_indexed(std::size_t n, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace kcmlab
