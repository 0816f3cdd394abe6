#pragma once

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace alignforge {

// Index-ordered parallel map: out[i] = fn(in[i], i). Completion order is
// irrelevant because results land at their input index. fn must handle its
// own domain failures; an escaped exception is rethrown after join.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& in, int workers, Fn fn)
    -> std::vector<decltype(fn(in[0], size_t(0)))> {
    using Out = decltype(fn(in[0], size_t(0)));
    std::vector<Out> out(in.size());
    if (in.empty()) return out;

    int n = std::max(1, std::min<int>(workers, int(in.size())));
    if (n == 1) {
        for (size_t i = 0; i < in.size(); i++) out[i] = fn(in[i], i);
        return out;
    }

    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= in.size() || failed.load()) return;
            try {
                out[i] = fn(in[i], i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(size_t(n));
    for (int t = 0; t < n; t++) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(error);
    return out;
}

} // namespace alignforge
