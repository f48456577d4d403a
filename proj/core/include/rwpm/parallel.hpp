#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rwpm {

// Runs fn(task_index) for task_index in [0, n_tasks) on up to `workers`
// threads. Tasks must write their results into per-task slots (no shared
// mutable state); any ordered reduction over the slots is then independent of
// the worker count and schedule. workers <= 1 runs inline.
template <typename Fn>
void parallel_for_tasks(std::size_t n_tasks, unsigned workers, Fn&& fn) {
    if (workers <= 1 || n_tasks <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    unsigned nthreads = workers < hw ? workers : hw;
    if (nthreads > n_tasks) nthreads = static_cast<unsigned>(n_tasks);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline unsigned default_workers() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace rwpm
