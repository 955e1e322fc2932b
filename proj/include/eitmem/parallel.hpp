#ifndef EITMEM_PARALLEL_HPP
#define EITMEM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "eitmem/common.hpp"

namespace eitmem {

/// Runs body(i) for i in [0, n) on up to `workers` threads. Results must be
/// written to per-index slots; the exception of the lowest failing index is
/// rethrown after all workers finish.
template <typename Body>
void parallel_for(Index n, int workers, Body&& body)
{
    if (n <= 0)
        return;
    const Index threads = std::clamp<Index>(workers, 1, n);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<Index> next{0};
    auto work = [&] {
        for (Index i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (Index t = 0; t < threads; ++t)
            pool.emplace_back(work);
    }
    for (const auto& e : errors) {
        if (e)
            std::rethrow_exception(e);
    }
}

} // namespace eitmem

#endif // EITMEM_PARALLEL_HPP
