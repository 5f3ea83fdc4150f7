#include "sqsolve/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "sqsolve/errors.hpp"

namespace sqsolve::stats {

double quantile(std::vector<double> sample, double q)
{
    sample.erase(std::remove_if(sample.begin(), sample.end(), [](double v) { return std::isnan(v); }),
                 sample.end());
    if (sample.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("quantile level must be in [0, 1]");
    std::sort(sample.begin(), sample.end());
    const double pos = q * static_cast<double>(sample.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sample.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sample[lo] + frac * (sample[hi] - sample[lo]);
}

std::vector<double> frequencies(std::span<const std::size_t> counts)
{
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    std::vector<double> out(counts.size(), 0.0);
    if (total == 0.0) return out;
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<double>(counts[i]) / total;
    return out;
}

double total_variation(std::span<const double> p, std::span<const double> q)
{
    if (p.size() != q.size()) throw InvalidInput("distributions have different supports");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
    return 0.5 * acc;
}

std::size_t default_thread_count()
{
    if (const char* env = std::getenv("SQSOLVE_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn)
{
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace sqsolve::stats
