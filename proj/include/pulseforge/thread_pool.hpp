#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace pf {

/// Fixed pool executing independent index ranges. Results are written into
/// caller-indexed slots, so reductions stay deterministic regardless of
/// completion order.
class ThreadPool {
public:
    explicit ThreadPool(int workers) {
        workers = std::max(1, workers);
        for (int i = 0; i < workers; ++i)
            threads_.emplace_back([this] { run(); });
    }
    ~ThreadPool() {
        {
            std::unique_lock lk(mu_);
            done_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    int size() const { return static_cast<int>(threads_.size()); }

    /// Run fn(0..n-1); blocks until all complete. The first exception (by
    /// index) is rethrown.
    void parallel_for(int n, const std::function<void(int)>& fn) {
        if (n <= 0) return;
        if (size() == 1 || n == 1) {
            for (int i = 0; i < n; ++i) fn(i);
            return;
        }
        auto st = std::make_shared<Batch>();
        st->n = n;
        st->remaining = n;
        st->fn = &fn;
        st->errs.resize(n);

        auto drain = [st] {
            for (;;) {
                const int i = st->next.fetch_add(1);
                if (i >= st->n) return;
                try {
                    (*st->fn)(i);
                } catch (...) {
                    st->errs[i] = std::current_exception();
                }
                if (st->remaining.fetch_sub(1) == 1) {
                    std::lock_guard lk(st->mu);
                    st->cv.notify_all();
                }
            }
        };
        {
            std::unique_lock lk(mu_);
            for (int i = 0; i + 1 < size(); ++i) tasks_.push(drain);
        }
        cv_.notify_all();
        drain();  // caller participates
        std::unique_lock lk(st->mu);
        st->cv.wait(lk, [&] { return st->remaining.load() == 0; });
        for (auto& e : st->errs)
            if (e) std::rethrow_exception(e);
    }

private:
    struct Batch {
        std::atomic<int> next{0};
        std::atomic<int> remaining{0};
        int n = 0;
        const std::function<void(int)>* fn = nullptr;  // valid while remaining > 0
        std::vector<std::exception_ptr> errs;
        std::mutex mu;
        std::condition_variable cv;
    };

    void run() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock lk(mu_);
                cv_.wait(lk, [this] { return done_ || !tasks_.empty(); });
                if (done_ && tasks_.empty()) return;
                task = std::move(tasks_.front());
                tasks_.pop();
            }
            task();
        }
    }

    std::vector<std::thread> threads_;
    std::queue<std::function<void()>> tasks_;
    std::mutex mu_;
    std::condition_variable cv_;
    bool done_ = false;
};

}  // namespace pf
