#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace stargaze {

/// Runs fn(i) for every i in [0, count) across up to thread_count workers.
/// Callers write results into pre-sized slots indexed by i, so the outcome is
/// independent of scheduling. fn must not touch shared mutable state.
inline void parallel_for(std::size_t count, unsigned thread_count,
                         const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    if (thread_count <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count, count));
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = cursor.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    cursor.store(count);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Worker count resolution: explicit value, then STARGAZE_THREADS, then the
/// hardware concurrency.
inline unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("STARGAZE_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace stargaze
