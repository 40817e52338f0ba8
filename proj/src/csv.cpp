#include "mickit/csv.hpp"

#include "mickit/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string_view>
#include <vector>

namespace mickit {
namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::optional<double> parse_number(std::string_view field)
{
    field = trim(field);
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        return std::nullopt;
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

} // namespace

SampleData read_csv_sample(std::istream& in)
{
    std::vector<Point> points;
    std::string line;
    std::size_t line_no = 0;
    bool first_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) {
            view.remove_prefix(3);
        }
        if (view.empty()) {
            continue;
        }
        auto fields = split(view);
        const std::string where = "line " + std::to_string(line_no);
        if (fields.size() != 2) {
            throw InputError(where + ": expected 2 columns, found " + std::to_string(fields.size()));
        }
        auto x = parse_number(fields[0]);
        auto y = parse_number(fields[1]);
        if (first_row) {
            first_row = false;
            if (!x && !y) {
                continue; // header
            }
        }
        if (!x || !y) {
            throw InputError(where + ": value is not a number");
        }
        if (!std::isfinite(*x) || !std::isfinite(*y)) {
            throw InputError(where + ": value is NaN or infinite");
        }
        points.push_back({*x, *y});
    }
    if (in.bad()) {
        throw InputError("failed while reading CSV input");
    }
    return SampleData(std::move(points));
}

SampleData read_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open input file '" + path + "'");
    }
    return read_csv_sample(in);
}

} // namespace mickit
