#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace attrikit {

// Runs fn(i) for i in [0, n) across up to `threads` workers. Workers take
// strided index ranges, so each index is processed exactly once; callers
// write into preallocated slots to keep results order-independent.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
    if (threads < 2 || n < 2) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const size_t workers = std::min<size_t>(static_cast<size_t>(threads), n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace attrikit
