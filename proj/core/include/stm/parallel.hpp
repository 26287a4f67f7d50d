#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stm {

/// Number of worker threads to use when the caller passes 0.
inline unsigned default_thread_count() noexcept {
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count) using up to `threads` workers. Each index is
/// visited exactly once; the first exception thrown by any call is rethrown.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = default_thread_count();
    const std::size_t workers = std::min<std::size_t>(threads, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers) fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

/// Monte Carlo paths are grouped in fixed blocks of this many paths. Partial
/// sums are formed per block in path order and then combined in block order,
/// so results do not depend on the worker count.
inline constexpr std::size_t kPathBlock = 64;

/// Deterministic blocked reduction: acc_for_block(begin, end) -> Acc runs in
/// parallel, then combine(total, block_acc) folds blocks in increasing order.
template <class Acc, class BlockFn, class Combine>
Acc blocked_reduce(std::size_t count, unsigned threads, Acc init, BlockFn&& acc_for_block,
                   Combine&& combine) {
    const std::size_t blocks = (count + kPathBlock - 1) / kPathBlock;
    std::vector<Acc> partial(blocks, init);
    parallel_for(blocks, threads, [&](std::size_t b) {
        const std::size_t begin = b * kPathBlock;
        const std::size_t end = std::min(count, begin + kPathBlock);
        partial[b] = acc_for_block(begin, end);
    });
    Acc total = std::move(init);
    for (auto& p : partial) combine(total, p);
    return total;
}

}  // namespace stm
