#include "mickit/sample.hpp"

#include "mickit/errors.hpp"

#include <cmath>
#include <string>

namespace mickit {

SampleData::SampleData(std::vector<Point> points) : points_{std::move(points)}
{
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i].x) || !std::isfinite(points_[i].y)) {
            throw InputError("sample point " + std::to_string(i) + " has a non-finite coordinate");
        }
    }
}

SampleData SampleData::transposed() const
{
    std::vector<Point> t;
    t.reserve(points_.size());
    for (const auto& p : points_) {
        t.push_back({p.y, p.x});
    }
    return SampleData(std::move(t));
}

} // namespace mickit
