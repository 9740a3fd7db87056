#pragma once

// Shared small utilities: inline-storage vectors for low-dimensional points
// and partials, a deterministic RNG, pairwise summation, and thread helpers.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace vfspec {

/// Vector of doubles with inline storage for the first `N` entries.
/// Dimensions in this library are almost always <= 3, so the common case
/// never allocates.
template <std::size_t N>
class InlineVec {
public:
    InlineVec() = default;
    explicit InlineVec(std::size_t n, double fill = 0.0) { resize(n, fill); }
    InlineVec(std::initializer_list<double> init) {
        resize(init.size());
        std::copy(init.begin(), init.end(), begin());
    }
    explicit InlineVec(std::span<const double> v) {
        resize(v.size());
        std::copy(v.begin(), v.end(), begin());
    }

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    double* data() { return size_ <= N ? inline_.data() : heap_.data(); }
    const double* data() const { return size_ <= N ? inline_.data() : heap_.data(); }

    double& operator[](std::size_t i) { return data()[i]; }
    double operator[](std::size_t i) const { return data()[i]; }

    double* begin() { return data(); }
    double* end() { return data() + size_; }
    const double* begin() const { return data(); }
    const double* end() const { return data() + size_; }

    void resize(std::size_t n, double fill = 0.0) {
        if (n > N) heap_.assign(n, fill);
        else std::fill(inline_.begin(), inline_.begin() + n, fill);
        size_ = n;
    }

    void push_back(double v) {
        if (size_ < N) {
            inline_[size_] = v;
        } else {
            if (size_ == N) heap_.assign(inline_.begin(), inline_.end());
            heap_.push_back(v);
        }
        ++size_;
    }

    operator std::span<const double>() const { return {data(), size_}; }
    std::span<const double> span() const { return {data(), size_}; }

    friend bool operator==(const InlineVec& a, const InlineVec& b) {
        return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
    }

private:
    std::size_t size_ = 0;
    std::array<double, N> inline_{};
    std::vector<double> heap_;
};

using Vec = InlineVec<4>;

/// Dense n x n matrix with inline storage for n <= 3.
class Mat {
public:
    Mat() = default;
    explicit Mat(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    std::size_t dim() const { return n_; }
    double& at(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    static Mat identity(std::size_t n) {
        Mat m(n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    InlineVec<9>& raw() { return data_; }
    const InlineVec<9>& raw() const { return data_; }

private:
    std::size_t n_ = 0;
    InlineVec<9> data_;
};

/// Deterministic uniform generator. The engine is std::mt19937_64 (fully
/// specified by the standard); the value mappings below avoid the
/// implementation-defined std::uniform_* distributions so that a seed
/// produces identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        // Rejection sampling over the smallest covering power of two.
        std::uint64_t mask = range - 1;
        mask |= mask >> 1; mask |= mask >> 2; mask |= mask >> 4;
        mask |= mask >> 8; mask |= mask >> 16; mask |= mask >> 32;
        std::uint64_t v;
        do { v = engine_() & mask; } while (v >= range);
        return lo + static_cast<std::int64_t>(v);
    }

    bool coin() { return (engine_() & 1u) != 0; }

private:
    std::mt19937_64 engine_;
};

/// Fixed-shape pairwise summation. The reduction tree depends only on the
/// input length, so results are bit-identical regardless of how callers
/// partition work across threads.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 32) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Worker count, capped by the VFSPEC_THREADS environment variable.
inline unsigned thread_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("VFSPEC_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && v <= 256) return std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return std::min(hw, 8u);
}

/// Runs body(i) for i in [0, n). Chunk boundaries are a function of n only;
/// bodies must write to disjoint, index-addressed slots so that results do
/// not depend on the worker count.
template <typename F>
void parallel_for(std::size_t n, F&& body, unsigned threads = thread_count()) {
    if (threads <= 1 || n < 2048) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] {
            for (std::size_t i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline constexpr double kPi = 3.14159265358979323846;

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

/// Splits on `sep` and trims surrounding whitespace from each piece.
/// Empty pieces are kept so callers can report them as errors.
inline std::vector<std::string> split_trim(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = text.find(sep, start);
        out.emplace_back(trim(text.substr(start, end - start)));
        if (end == std::string_view::npos) return out;
        start = end + 1;
    }
}

}  // namespace vfspec
