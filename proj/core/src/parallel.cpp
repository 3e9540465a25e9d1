#include "forestprune/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace forestprune {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    const int n_workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                                                std::max<std::size_t>(count, 1));
    if (n_workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) {
        const std::size_t begin = count * static_cast<std::size_t>(t) / static_cast<std::size_t>(n_workers);
        const std::size_t end = count * static_cast<std::size_t>(t + 1) / static_cast<std::size_t>(n_workers);
        pool.emplace_back([&, begin, end, t] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& worker : pool) worker.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

}  // namespace forestprune
