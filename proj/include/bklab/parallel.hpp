#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace bklab {

// Worker count from BKLAB_THREADS (unset or 0 means hardware concurrency).
inline unsigned thread_count()
{
    unsigned n = 0;
    if (const char* env = std::getenv("BKLAB_THREADS")) {
        try {
            n = static_cast<unsigned>(std::stoul(env));
        } catch (...) {
            n = 0;
        }
    }
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

// Runs fn(i) for i in [0, count). Tasks must write to disjoint outputs; the first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(thread_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w)
            pool.emplace_back(body);
        body();
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace bklab
