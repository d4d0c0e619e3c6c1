#include "thinlayer/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace thinlayer {
namespace {

std::atomic<int> g_workers{0};
// Nested loops run serially on the calling worker.
thread_local bool t_inside = false;

void run_guarded(const std::function<void()>& fn, std::exception_ptr& failure, std::mutex& m) {
    t_inside = true;
    try {
        fn();
    } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
    }
    t_inside = false;
}

}  // namespace

int worker_count() {
    const int w = g_workers.load();
    if (w > 0) return w;
    return std::max(1u, std::thread::hardware_concurrency());
}

void set_worker_count(int workers) { g_workers.store(std::max(workers, 0)); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const auto workers = static_cast<std::size_t>(worker_count());
    if (workers <= 1 || count < 2 * workers || t_inside) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> threads;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t begin = 0; begin < count; begin += chunk) {
        const std::size_t end = std::min(count, begin + chunk);
        threads.emplace_back([&, begin, end] {
            run_guarded([&] {
                for (std::size_t i = begin; i < end; ++i) body(i);
            }, failure, failure_mutex);
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

void parallel_tasks(std::size_t count, const std::function<void(std::size_t)>& body) {
    const auto workers = std::min(static_cast<std::size_t>(worker_count()), count);
    if (workers <= 1 || t_inside) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            run_guarded([&] {
                for (std::size_t i = next++; i < count; i = next++) body(i);
            }, failure, failure_mutex);
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace thinlayer
