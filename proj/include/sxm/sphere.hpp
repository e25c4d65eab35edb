#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sxm/errors.hpp"

namespace sxm {

// Tolerance on |norm - 1| for a vector to count as a unit vector.
inline constexpr double kUnitNormTol = 1e-9;

// Norms at or below this are treated as zero (degenerate input rows).
inline constexpr double kZeroNormFloor = 1e-300;

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("dot: dimensions " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()) + " differ");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

// A direction on the (d-1)-sphere embedded in R^d, d >= 2, with
// |norm - 1| <= kUnitNormTol. Construct via normalized() or from_unit().
class UnitVector {
  public:
    static UnitVector normalized(std::span<const double> v) {
        check_dim(v.size());
        const double n = norm(v);
        if (n <= kZeroNormFloor) {
            throw ZeroVector("normalize: vector norm " + std::to_string(n) + " is zero");
        }
        std::vector<double> c(v.begin(), v.end());
        for (double& x : c) x /= n;
        return UnitVector(std::move(c), Unchecked{});
    }

    static UnitVector from_unit(std::vector<double> coords) {
        check_dim(coords.size());
        const double n = norm(coords);
        if (std::abs(n - 1.0) > kUnitNormTol) {
            throw Error("UnitVector: norm " + std::to_string(n) + " violates unit invariant");
        }
        return UnitVector(std::move(coords), Unchecked{});
    }

    std::size_t dim() const { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    std::span<const double> coords() const { return coords_; }
    const std::vector<double>& vec() const { return coords_; }

    friend bool operator==(const UnitVector& a, const UnitVector& b) {
        return a.coords_ == b.coords_;
    }

  private:
    struct Unchecked {};
    UnitVector(std::vector<double> c, Unchecked) : coords_(std::move(c)) {}

    static void check_dim(std::size_t d) {
        if (d < 2) throw Error("UnitVector: dimension must be at least 2, got " + std::to_string(d));
    }

    std::vector<double> coords_;
};

inline UnitVector normalize(std::span<const double> v) { return UnitVector::normalized(v); }

// Dot product of two unit vectors, clamped into [-1, 1] so that
// downstream acos/log-density calls never see 1 + epsilon.
inline double cosine_similarity(const UnitVector& a, const UnitVector& b) {
    return std::clamp(dot(a.coords(), b.coords()), -1.0, 1.0);
}

// Ordered collection of unit vectors sharing one dimension; point ids
// are their 0-based positions.
class PointSet {
  public:
    explicit PointSet(std::size_t dim) : dim_(dim) {
        if (dim < 2) throw Error("PointSet: dimension must be at least 2");
    }

    void add(const UnitVector& p) {
        if (p.dim() != dim_) {
            throw DimensionMismatch("PointSet::add: point dimension " + std::to_string(p.dim()) +
                                    " != " + std::to_string(dim_));
        }
        data_.insert(data_.end(), p.coords().begin(), p.coords().end());
    }

    // Renormalizes the row before storing; rounding noise in external
    // data is absorbed here.
    void add_normalized(std::span<const double> row) { add(UnitVector::normalized(row)); }

    std::size_t size() const { return data_.size() / dim_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return data_.empty(); }

    std::span<const double> operator[](std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }

    UnitVector point(std::size_t i) const {
        const auto row = (*this)[i];
        return UnitVector::normalized(row);
    }

    void append(const PointSet& other) {
        if (other.dim_ != dim_) throw DimensionMismatch("PointSet::append: dimension mismatch");
        data_.insert(data_.end(), other.data_.begin(), other.data_.end());
    }

    friend bool operator==(const PointSet& a, const PointSet& b) {
        return a.dim_ == b.dim_ && a.data_ == b.data_;
    }

  private:
    std::size_t dim_;
    std::vector<double> data_;
};

// Componentwise sum of the selected points.
inline std::vector<double> resultant(const PointSet& points, std::span<const std::uint32_t> subset) {
    if (subset.empty()) throw EmptySelection("resultant: empty selection");
    std::vector<double> sum(points.dim(), 0.0);
    for (std::uint32_t id : subset) {
        const auto row = points[id];
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += row[j];
    }
    return sum;
}

inline std::vector<double> resultant(const PointSet& points) {
    if (points.empty()) throw EmptySelection("resultant: empty point set");
    std::vector<double> sum(points.dim(), 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = points[i];
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += row[j];
    }
    return sum;
}

// Copy of the selected rows as their own PointSet (local ids 0..m-1).
inline PointSet gather(const PointSet& points, std::span<const std::uint32_t> subset) {
    PointSet out(points.dim());
    for (std::uint32_t id : subset) out.add_normalized(points[id]);
    return out;
}

inline std::vector<std::uint32_t> all_ids(const PointSet& points) {
    std::vector<std::uint32_t> ids(points.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
    return ids;
}

}  // namespace sxm
