#ifndef BEATNOTE_PARALLEL_HPP
#define BEATNOTE_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace beatnote {

// Runs fn(i) for i in [0, n) on up to n_threads threads (0 = hardware
// concurrency). Tasks must be independent and write only to per-index
// slots; callers reduce results in index order, which keeps every output
// bit-identical regardless of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned n_threads, Fn&& fn) {
    if (n == 0) return;
    if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(n_threads, n));

    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto drain = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) threads.emplace_back(drain);
    drain();
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace beatnote

#endif  // BEATNOTE_PARALLEL_HPP
