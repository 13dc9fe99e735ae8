#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace hobake {

/// Fixed-size pool running index-parallel loops. The calling thread takes part,
/// so a pool of size 1 spawns no threads.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t threads = default_threads()) : size_(std::max<std::size_t>(1, threads)) {
        for (std::size_t w = 1; w < size_; ++w)
            workers_.emplace_back([this, w] { worker_loop(w); });
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
        }
        wake_.notify_all();
    }

    std::size_t size() const noexcept { return size_; }

    /// Reads HOBAKE_THREADS, falling back to the hardware concurrency.
    static std::size_t default_threads() {
        if (const char* env = std::getenv("HOBAKE_THREADS")) {
            const long n = std::strtol(env, nullptr, 10);
            if (n > 0)
                return static_cast<std::size_t>(n);
        }
        return std::max(1u, std::thread::hardware_concurrency());
    }

    /// Calls body(task, worker) for task in [0, tasks); worker < size().
    void parallel_for(std::size_t tasks, const std::function<void(std::size_t, std::size_t)>& body) {
        if (tasks == 0)
            return;
        if (size_ == 1 || tasks == 1) {
            for (std::size_t t = 0; t < tasks; ++t)
                body(t, 0);
            return;
        }
        std::unique_lock run_lock(run_mutex_);
        {
            std::lock_guard lock(mutex_);
            body_ = &body;
            tasks_ = tasks;
            next_.store(0);
            pending_ = size_ - 1;
            error_ = nullptr;
            ++generation_;
        }
        wake_.notify_all();
        drain(0);
        std::unique_lock lock(mutex_);
        done_.wait(lock, [this] { return pending_ == 0; });
        body_ = nullptr;
        if (error_)
            std::rethrow_exception(error_);
    }

private:
    void drain(std::size_t worker) {
        for (;;) {
            const std::size_t t = next_.fetch_add(1);
            if (t >= tasks_)
                return;
            try {
                (*body_)(t, worker);
            } catch (...) {
                std::lock_guard lock(mutex_);
                if (!error_)
                    error_ = std::current_exception();
            }
        }
    }

    void worker_loop(std::size_t worker) {
        std::size_t seen = 0;
        for (;;) {
            {
                std::unique_lock lock(mutex_);
                wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
                if (stop_)
                    return;
                seen = generation_;
            }
            drain(worker);
            {
                std::lock_guard lock(mutex_);
                --pending_;
            }
            done_.notify_one();
        }
    }

    std::size_t size_;
    std::mutex run_mutex_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
    std::size_t tasks_ = 0;
    std::atomic<std::size_t> next_{0};
    std::size_t pending_ = 0;
    std::size_t generation_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
    std::vector<std::jthread> workers_;
};

/// Runs body(begin, end, worker) over [0, n) split into chunks of `chunk`.
template <class Body>
void parallel_chunks(WorkerPool* pool, std::size_t n, std::size_t chunk, Body&& body) {
    const std::size_t tasks = (n + chunk - 1) / chunk;
    auto task = [&](std::size_t t, std::size_t worker) { body(t * chunk, std::min(n, (t + 1) * chunk), worker); };
    if (!pool) {
        for (std::size_t t = 0; t < tasks; ++t)
            task(t, 0);
        return;
    }
    pool->parallel_for(tasks, task);
}

/// Chunk length for reductions in deterministic mode; independent of the thread count.
inline constexpr std::size_t reduction_chunk = 4096;

/// Sum of term(i) over [0, n). Deterministic mode fixes the partial-sum tree by
/// `reduction_chunk`; otherwise the vector is split once per thread.
template <class Term>
double parallel_sum(WorkerPool* pool, std::size_t n, bool deterministic, Term&& term) {
    const std::size_t threads = pool ? pool->size() : 1;
    const std::size_t chunk =
        deterministic ? reduction_chunk : std::max<std::size_t>(1, (n + threads - 1) / std::max<std::size_t>(1, threads));
    const std::size_t tasks = n == 0 ? 0 : (n + chunk - 1) / chunk;
    std::vector<double> partial(tasks, 0.0);
    parallel_chunks(pool, n, chunk, [&](std::size_t b, std::size_t e, std::size_t) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i)
            s += term(i);
        partial[b / chunk] = s;
    });
    double total = 0.0;
    for (double s : partial)
        total += s;
    return total;
}

} // namespace hobake
