#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace speclab {

// Worker count resolution: explicit request > SPECLAB_THREADS > hardware.
inline int resolve_threads(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SPECLAB_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(chunk_index) for chunk_index in [0, chunks). Each chunk owns a
// disjoint slice of preallocated output, so results are independent of
// scheduling. Exceptions are rethrown on the calling thread.
template <typename Fn>
void parallel_for_chunks(long chunks, int threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || chunks <= 1) {
        for (long c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            long c = next.fetch_add(1);
            if (c >= chunks || failed.load()) break;
            try {
                fn(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
                break;
            }
        }
    };
    int n = static_cast<int>(std::min<long>(threads, chunks));
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

} // namespace speclab
