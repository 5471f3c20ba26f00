#include "cforge/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

namespace cforge {

Norms NormAccumulator::norms() const {
    Norms n;
    if (count_ == 0) return n;
    n.sup = std::sqrt(max_);
    n.l2 = std::sqrt(sum_ / double(count_));
    return n;
}

unsigned thread_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CARTAN_FORGE_THREADS")) {
        try {
            long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 256));
        } catch (...) {
        }
    }
    return hw;
}

void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                     std::size_t nchunks) {
    if (n == 0) return;
    nchunks = std::max<std::size_t>(1, std::min(nchunks, n));
    const std::size_t per = (n + nchunks - 1) / nchunks;
    nchunks = (n + per - 1) / per;
    const unsigned nt = std::min<unsigned>(thread_count(), static_cast<unsigned>(nchunks));
    auto run = [&](std::size_t c) { body(c, c * per, std::min(n, (c + 1) * per)); };
    if (nt <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) run(c);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::mutex mtx;
    std::exception_ptr first;
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t c = t; c < nchunks; c += nt) run(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mtx);
                if (!first) first = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& f) {
    std::vector<double> part(64, 0.0);
    parallel_chunks(n, [&](std::size_t c, std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) s += f(i);
        part[c] = s;
    });
    double s = 0.0;
    for (double v : part) s += v;
    return s;
}

Rng::result_type Rng::operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng Rng::split() { return Rng((*this)() ^ 0x6a09e667f3bcc909ULL); }

double Rng::uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double fit_loglog_rate(const std::vector<double>& eps, const std::vector<double>& err) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < eps.size() && i < err.size(); ++i) {
        if (err[i] > 0.0 && eps[i] > 0.0) {
            x.push_back(std::log(eps[i]));
            y.push_back(std::log(err[i]));
        }
    }
    if (x.size() < 2) return std::numeric_limits<double>::infinity();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(x.size());
    my /= double(x.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace cforge
