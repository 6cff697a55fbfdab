#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace dppc {

/// Static block partition of [0, count) across `threads` workers.
/// fn(begin, end, worker) runs on disjoint ranges; worker 0 may run on the
/// calling thread. With threads <= 1 this is a plain loop.
inline void parallel_for_blocks(std::size_t count, unsigned threads,
                                const std::function<void(std::size_t, std::size_t, unsigned)>& fn) {
    if (count == 0) return;
    unsigned nw = std::max(1u, threads);
    nw = static_cast<unsigned>(std::min<std::size_t>(nw, count));
    if (nw == 1) {
        fn(0, count, 0);
        return;
    }
    std::size_t chunk = (count + nw - 1) / nw;
    std::vector<std::thread> pool;
    pool.reserve(nw - 1);
    for (unsigned w = 1; w < nw; ++w) {
        std::size_t b = std::min(count, w * chunk);
        std::size_t e = std::min(count, b + chunk);
        if (b < e) pool.emplace_back(fn, b, e, w);
    }
    fn(0, std::min(count, chunk), 0);
    for (auto& t : pool) t.join();
}

}  // namespace dppc
