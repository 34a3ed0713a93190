#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace gpwide {

namespace detail {

inline unsigned& thread_cap_storage() {
    static unsigned cap = [] {
        unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("GPWIDE_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) hw = std::min(hw, static_cast<unsigned>(v));
        }
        return hw;
    }();
    return cap;
}

}  // namespace detail

/// Width cap for data-parallel loops; defaults to hardware parallelism,
/// bounded by the GPWIDE_THREADS environment variable.
inline unsigned thread_cap() { return detail::thread_cap_storage(); }

inline void set_thread_cap(unsigned cap) { detail::thread_cap_storage() = std::max(1u, cap); }

namespace detail {

/// Runs fn(chunk_index, begin, end) over a partition of [0, n) on up to
/// thread_cap() threads. Chunk boundaries depend only on n and the cap, so
/// runs with identical configuration partition identically.
inline void parallel_chunks(int n, unsigned width,
                            const std::function<void(unsigned, int, int)>& fn) {
    if (width <= 1 || n < 2) {
        fn(0, 0, n);
        return;
    }
    const unsigned chunks = std::min<unsigned>(width, static_cast<unsigned>(n));
    std::vector<std::thread> threads;
    threads.reserve(chunks);
    for (unsigned c = 0; c < chunks; ++c) {
        const int begin = static_cast<int>(static_cast<long long>(n) * c / chunks);
        const int end = static_cast<int>(static_cast<long long>(n) * (c + 1) / chunks);
        threads.emplace_back([&, c, begin, end] { fn(c, begin, end); });
    }
    for (auto& t : threads) t.join();
}

}  // namespace detail

}  // namespace gpwide
