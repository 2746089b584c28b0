#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace degenlab {

// Runs body(chunk, begin, end) over `threads` contiguous chunks of [0,n).
// Chunk boundaries depend only on n and threads, so callers can reduce
// per-chunk results in chunk order deterministically.
template <class Body>
void parallel_chunks(int n, int threads, Body&& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        body(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t) {
        const int b = static_cast<int>(static_cast<long long>(n) * t / threads);
        const int e = static_cast<int>(static_cast<long long>(n) * (t + 1) / threads);
        pool.emplace_back([&, t, b, e] {
            try {
                body(t, b, e);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

int default_threads();

}  // namespace degenlab
