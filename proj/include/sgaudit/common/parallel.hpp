#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sgaudit {

/// Applies `fn` to every index in [0, count) using at most `max_in_flight`
/// worker threads. Results are stored by index, so the output order never
/// depends on completion order. The first exception thrown by `fn` is
/// rethrown after all workers have joined.
template <typename Result>
std::vector<Result> parallel_map(std::size_t count, std::size_t max_in_flight,
                                 const std::function<Result(std::size_t)>& fn) {
    std::vector<Result> results(count);
    if (count == 0) return results;
    std::size_t workers = std::clamp<std::size_t>(max_in_flight, 1, count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic_flag failed = ATOMIC_FLAG_INIT;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        results[i] = fn(i);
                    } catch (...) {
                        if (!failed.test_and_set()) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

}  // namespace sgaudit
