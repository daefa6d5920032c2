#include "weaklim/parallel.hpp"

#include <atomic>

namespace weaklim {

namespace {
std::atomic<int> g_threads{1};
constexpr std::size_t kChunks = 256;
}  // namespace

void set_thread_count(int k) { g_threads.store(k < 1 ? 1 : k); }
int thread_count() { return g_threads.load(); }

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
    if (count == 0) return;
    const int workers = std::min<std::size_t>(g_threads.load(), count);
    if (workers <= 1) {
        body(0, count);
        return;
    }
    const std::size_t chunks = std::min(kChunks, count);
    std::atomic<std::size_t> next{0};
    auto run = [&]() {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            std::size_t begin = c * count / chunks;
            std::size_t end = (c + 1) * count / chunks;
            body(begin, end);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

double parallel_sum(std::size_t count, const std::function<double(std::size_t)>& term) {
    if (count == 0) return 0.0;
    const std::size_t chunks = std::min(kChunks, count);
    std::vector<double> partial(chunks, 0.0);
    const int workers = std::min<std::size_t>(g_threads.load(), chunks);
    std::atomic<std::size_t> next{0};
    auto run = [&]() {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            std::size_t begin = c * count / chunks;
            std::size_t end = (c + 1) * count / chunks;
            double s = 0;
            for (std::size_t i = begin; i < end; ++i) s += term(i);
            partial[c] = s;
        }
    };
    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (int t = 1; t < workers; ++t) pool.emplace_back(run);
        run();
        for (auto& th : pool) th.join();
    }
    double total = 0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace weaklim
