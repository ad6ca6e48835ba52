#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace legrag {

/// Applies fn to indexes [0, count) with at most `jobs` worker threads.
/// Results land in caller-provided storage keyed by index, so output order
/// never depends on scheduling. The first exception is rethrown after all
/// workers finish.
inline void parallel_for(std::size_t count, std::size_t jobs,
                         const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Enforces a minimum interval between acquisitions across threads.
class RateLimiter {
public:
    explicit RateLimiter(std::chrono::milliseconds min_interval = {})
        : min_interval_(min_interval) {}

    void acquire() {
        if (min_interval_.count() <= 0) return;
        std::unique_lock lock(mutex_);
        const auto now = std::chrono::steady_clock::now();
        const auto earliest = last_ + min_interval_;
        if (now < earliest) {
            lock.unlock();
            std::this_thread::sleep_for(earliest - now);
            lock.lock();
        }
        last_ = std::chrono::steady_clock::now();
    }

private:
    std::chrono::milliseconds min_interval_;
    std::chrono::steady_clock::time_point last_{};
    std::mutex mutex_;
};

} // namespace legrag
