#include "omnistereo/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace omnistereo {

int thread_budget() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) {
        hw = 1;
    }
    const char* env = std::getenv("OMNISTEREO_THREADS");
    if (env == nullptr || *env == '\0') {
        return hw;
    }
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || cap < 0) {
        return hw;
    }
    if (cap == 0) {
        return hw;
    }
    return static_cast<int>(cap < hw ? cap : hw);
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) {
        return;
    }
    const int workers = std::min(thread_budget(), n);
    if (workers <= 1 || n < 256) {
        for (int i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }

    constexpr int kChunk = 64;
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const int begin = next.fetch_add(kChunk);
            if (begin >= n || failed.load()) {
                return;
            }
            const int end = std::min(begin + kChunk, n);
            try {
                for (int i = begin; i < end; ++i) {
                    fn(i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                failed.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

}  // namespace omnistereo
