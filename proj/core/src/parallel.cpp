#include "pragrank/parallel.hpp"

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "pragrank/http_backend.hpp"

namespace pragrank {

std::size_t default_concurrency() {
    if (const char* env = std::getenv(std::string(kMaxConcurrencyEnv).c_str())) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn,
                  const std::atomic<bool>* cancel) {
    if (n == 0) return;
    if (workers == 0) workers = 1;
    if (workers > n) workers = n;

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mu;
    std::size_t error_index = n;
    std::exception_ptr error;

    auto run = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            if (cancel != nullptr && cancel->load(std::memory_order_relaxed)) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
                failed = true;
            }
        }
    };

    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(run);
        for (auto& t : threads) t.join();
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace pragrank
