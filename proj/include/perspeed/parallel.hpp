#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace perspeed {

/// Worker cap for internal fan-out. PERSPEED_THREADS overrides the
/// hardware default.
inline int thread_cap() {
    if (const char* env = std::getenv("PERSPEED_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Static block partition of [0, count). body(i) must be safe to call
/// concurrently for distinct i. The first exception thrown is rethrown
/// on the calling thread.
inline void parallel_for(int count, const std::function<void(int)>& body) {
    const int workers = std::min(thread_cap(), std::max(count, 1));
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int i = w; i < count; i += workers) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace perspeed
