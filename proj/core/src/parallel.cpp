#include "oracle/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace oracle {

int worker_count() {
    static const int count = [] {
        int n = static_cast<int>(std::thread::hardware_concurrency());
        if (n < 1) n = 1;
        if (const char* env = std::getenv("ORACLE_LAB_THREADS")) {
            const int cap = std::atoi(env);
            if (cap >= 1 && cap < n) n = cap;
        }
        return n;
    }();
    return count;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const int workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load(std::memory_order_relaxed)) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                break;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace oracle
