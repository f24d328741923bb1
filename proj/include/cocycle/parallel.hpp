#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cocycle {

// COCYCLE_THREADS overrides the hardware count; 1 runs inline
inline unsigned thread_count() {
    if (const char* env = std::getenv("COCYCLE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// fn(i) for i in [0, n); results must go to pre-indexed slots
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned t = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < t; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> g(m);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        });
    for (std::thread& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace cocycle
