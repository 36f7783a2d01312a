#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>

namespace cps {

/// Largest embedding dimension supported by the fixed-capacity point types.
inline constexpr int kMaxDim = 6;

/// Point or displacement in R^d, d <= kMaxDim.  Stored inline so bands of
/// a few hundred thousand points stay cache-friendly and allocation-free.
class Vec {
public:
    Vec() = default;

    explicit Vec(int dim) : dim_(dim) {}

    Vec(std::initializer_list<double> xs) : dim_(static_cast<int>(xs.size())) {
        int i = 0;
        for (double v : xs) x_[i++] = v;
    }

    int dim() const { return dim_; }

    double operator[](int i) const { return x_[i]; }
    double& operator[](int i) { return x_[i]; }

    Vec operator+(const Vec& o) const {
        Vec r(dim_);
        for (int i = 0; i < dim_; ++i) r.x_[i] = x_[i] + o.x_[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r(dim_);
        for (int i = 0; i < dim_; ++i) r.x_[i] = x_[i] - o.x_[i];
        return r;
    }
    Vec operator*(double a) const {
        Vec r(dim_);
        for (int i = 0; i < dim_; ++i) r.x_[i] = x_[i] * a;
        return r;
    }

    double dot(const Vec& o) const {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += x_[i] * o.x_[i];
        return s;
    }

    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    double dist(const Vec& o) const { return (*this - o).norm(); }

private:
    std::array<double, kMaxDim> x_{};
    int dim_ = 0;
};

inline Vec operator*(double a, const Vec& v) { return v * a; }

/// Integer lattice coordinates of a grid point x = h * index.
struct GridIndex {
    std::array<std::int32_t, kMaxDim> i{};
    int dim = 0;

    bool operator==(const GridIndex& o) const {
        if (dim != o.dim) return false;
        for (int k = 0; k < dim; ++k)
            if (i[k] != o.i[k]) return false;
        return true;
    }

    bool lex_less(const GridIndex& o) const {
        for (int k = 0; k < dim; ++k) {
            if (i[k] != o.i[k]) return i[k] < o.i[k];
        }
        return false;
    }
};

struct GridIndexHash {
    std::size_t operator()(const GridIndex& g) const {
        std::uint64_t h = 1469598103934665603ull;
        for (int k = 0; k < g.dim; ++k) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(g.i[k]));
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

/// Wraps t into [0, period).
inline double wrap_period(double t, double period) {
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    if (r >= period) r = 0.0;
    return r;
}

}  // namespace cps
