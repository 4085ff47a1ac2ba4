#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ifpt {

// threads == 0 picks std::thread::hardware_concurrency().
struct ExecPolicy {
    unsigned threads = 0;

    unsigned resolved() const noexcept {
        if (threads != 0) return threads;
        return std::max(1u, std::thread::hardware_concurrency());
    }
};

// Runs body(i) for i in [0, n) over contiguous static chunks. Bodies must only
// write to per-index state so results do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, const ExecPolicy& exec, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(exec.resolved(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ifpt
