#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace cforge {

// Residual summary: sup is the max pointwise magnitude, l2 the root mean square
// over grid points of the pointwise Euclidean norm (scale neutral, so it can be
// compared against h^2 directly).
struct Norms {
    double sup = 0.0;
    double l2 = 0.0;
};

// Accumulates pointwise squared magnitudes into Norms.
class NormAccumulator {
public:
    void add(double sq) {
        sum_ += sq;
        if (sq > max_) max_ = sq;
        ++count_;
    }
    void merge(const NormAccumulator& o) {
        sum_ += o.sum_;
        if (o.max_ > max_) max_ = o.max_;
        count_ += o.count_;
    }
    Norms norms() const;
    std::size_t count() const { return count_; }

private:
    double sum_ = 0.0;
    double max_ = 0.0;
    std::size_t count_ = 0;
};

// Thread cap from CARTAN_FORGE_THREADS (defaults to the hardware count).
unsigned thread_count();

// Runs body(begin, end) over a fixed partition of [0, n) into chunks. The
// partition does not depend on the thread count, so chunked reductions give
// identical bits whatever CARTAN_FORGE_THREADS says.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t chunk, std::size_t begin, std::size_t end)>& body,
                     std::size_t nchunks = 64);

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    parallel_chunks(n, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) body(i);
    });
}

// Deterministic sum of f(i) over [0, n).
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& f);

// SplitMix64: small, splittable, and good enough for sampling directions.
class Rng {
public:
    using result_type = std::uint64_t;
    explicit Rng(std::uint64_t seed = 0x5eedULL) : state_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }
    result_type operator()();
    Rng split();
    double uniform();          // [0, 1)
    double normal();           // standard normal via Box-Muller

private:
    std::uint64_t state_;
};

// Least squares slope of log(err) against log(eps). Entries with err == 0 are
// dropped; fewer than two usable points gives +infinity (exact convergence).
double fit_loglog_rate(const std::vector<double>& eps, const std::vector<double>& err);

} // namespace cforge
