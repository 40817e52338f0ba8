#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mickit {

struct Point {
    double x;
    double y;
};

/// A bivariate sample. Non-finite coordinates are rejected on construction.
class SampleData {
public:
    SampleData() = default;
    explicit SampleData(std::vector<Point> points);

    std::size_t size() const noexcept { return points_.size(); }
    std::span<const Point> points() const noexcept { return points_; }
    const Point& operator[](std::size_t i) const noexcept { return points_[i]; }

    /// The sample with x and y exchanged.
    SampleData transposed() const;

private:
    std::vector<Point> points_;
};

} // namespace mickit
