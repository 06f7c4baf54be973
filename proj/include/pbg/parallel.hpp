#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace pbg {

// Deterministic work distribution: items are split into a fixed number of
// chunks that depends only on n_items (never on n_workers), workers pull
// chunks off a shared counter, and any per-chunk accumulators are reduced
// sequentially by the caller.  This makes every result bit-identical for
// any worker count.
inline constexpr int kReductionChunks = 64;

inline int chunk_count(int n_items) {
    return n_items < kReductionChunks ? n_items : kReductionChunks;
}

// fn(chunk_index, begin_item, end_item) is invoked exactly once per chunk
template <class Fn>
void parallel_chunks(int n_items, int n_workers, Fn&& fn) {
    if (n_items <= 0) return;
    if (n_workers < 1) throw std::domain_error("parallel_chunks: n_workers >= 1 required");
    int n_chunks = chunk_count(n_items);
    auto run_chunk = [&](int c) {
        long b = (long)n_items * c / n_chunks;
        long e = (long)n_items * (c + 1) / n_chunks;
        fn(c, (int)b, (int)e);
    };
    if (n_workers == 1 || n_chunks == 1) {
        for (int c = 0; c < n_chunks; ++c) run_chunk(c);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::mutex err_mu;
    int nw = std::min(n_workers, n_chunks);
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w)
        pool.emplace_back([&] {
            for (;;) {
                int c = next.fetch_add(1);
                if (c >= n_chunks || failed.load()) return;
                try {
                    run_chunk(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

} // namespace pbg
