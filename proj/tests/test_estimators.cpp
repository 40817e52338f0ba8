#include "mickit/diagnostics.hpp"
#include "mickit/errors.hpp"
#include "mickit/estimators.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <string>

using namespace mickit;

namespace {

SampleData uniform_sample(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> pts(n);
    for (auto& p : pts) {
        p.x = u(rng);
        p.y = u(rng);
    }
    return SampleData(std::move(pts));
}

SampleData two_block_sample(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 0.5);
    std::vector<Point> pts(n);
    for (auto& p : pts) {
        double shift = (rng() & 1U) ? 0.5 : 0.0;
        p.x = u(rng) + shift;
        p.y = u(rng) + shift;
    }
    return SampleData(std::move(pts));
}

SampleData monotone_sample(std::size_t n)
{
    std::vector<Point> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(n);
        pts[i] = {t, std::exp(3.0 * t) - t * t};
    }
    return SampleData(std::move(pts));
}

// Information of the rank grid given by row and column cut masks over
// distinct-valued points.
double rank_grid_information(const std::vector<std::size_t>& rx, const std::vector<std::size_t>& ry,
                             std::uint32_t row_mask, std::uint32_t col_mask, std::size_t& rows, std::size_t& cols)
{
    std::size_t n = rx.size();
    auto rg = oracle::groups_from_mask(n, row_mask, rows);
    auto cg = oracle::groups_from_mask(n, col_mask, cols);
    oracle::Matrix m(rows, std::vector<double>(cols, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        m[rg[ry[i]]][cg[rx[i]]] += 1.0;
    }
    return oracle::mi(m);
}

// MIC over all rank grids with k * l <= budget, by enumeration.
double oracle_mic_brute(const SampleData& s, std::size_t budget)
{
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& p : s.points()) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    auto rx = oracle::ranks(xs);
    auto ry = oracle::ranks(ys);
    std::size_t n = s.size();
    double best = 0.0;
    for (std::uint32_t rm = 1; rm < (1U << (n - 1)); ++rm) {
        for (std::uint32_t cm = 1; cm < (1U << (n - 1)); ++cm) {
            std::size_t k = static_cast<std::size_t>(std::popcount(rm)) + 1;
            std::size_t l = static_cast<std::size_t>(std::popcount(cm)) + 1;
            if (k * l > budget) {
                continue;
            }
            std::size_t rows = 0;
            std::size_t cols = 0;
            double info = rank_grid_information(rx, ry, rm, cm, rows, cols);
            best = std::max(best, info / std::log(static_cast<double>(std::min(k, l))));
        }
    }
    return best;
}

std::string capture_warnings(const std::function<void()>& body)
{
    std::string captured;
    auto previous = set_warning_sink([&](std::string_view msg) { captured += std::string(msg) + "\n"; });
    body();
    set_warning_sink(previous);
    return captured;
}

} // namespace

TEST_CASE("budget policy")
{
    BPolicy p;
    CHECK(p.alpha() == 0.6);
    CHECK(p.floor() == 4);
    CHECK(p.budget(100) == 15);
    CHECK(p.budget(4) == 4);
    CHECK(p.budget(10000) == 251);
    CHECK(BPolicy(0.5, 4).budget(100) == 10);
    CHECK(BPolicy(0.5, 4).budget(99) == 9);
    CHECK(BPolicy(0.5, 8).budget(20) == 8);
    CHECK_THROWS(BPolicy(0.0, 4));
    CHECK_THROWS(BPolicy(1.0, 4));
}

TEST_CASE("i star equi examples")
{
    auto mono = monotone_sample(100);
    CHECK(i_star_equi(mono, 2, 2) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    SampleData pattern({{1, 1}, {1, 2}, {2, 1}, {2, 2}});
    CHECK(std::abs(i_star_equi(pattern, 2, 2)) < 1e-15);
    CHECK_THROWS_AS(i_star_equi(pattern, 2, 3), PreconditionError);
    CHECK_THROWS_AS(i_star_equi(pattern, 1, 3), PreconditionError);
}

TEST_CASE("i star equi matches exhaustive search over the free axis")
{
    // k = 2 rows, l = 3 columns: x gets three equal-count columns and y is
    // searched over every split into at most two rows.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto s = uniform_sample(30, 1000 + seed);
        std::vector<double> xs;
        std::vector<double> ys;
        for (const auto& p : s.points()) {
            xs.push_back(p.x);
            ys.push_back(p.y);
        }
        auto rx = oracle::ranks(xs);
        auto ry = oracle::ranks(ys);
        double best = 0.0;
        for (std::size_t cut = 0; cut < 30; ++cut) {
            oracle::Matrix m(2, std::vector<double>(3, 0.0));
            for (std::size_t i = 0; i < 30; ++i) {
                m[ry[i] < cut ? 0 : 1][rx[i] / 10] += 1.0;
            }
            best = std::max(best, oracle::mi(m));
        }
        CHECK(i_star_equi(s, 2, 3, SearchOptions{0}) == doctest::Approx(best).epsilon(1e-12));
        CHECK(i_star_equi(s, 2, 3) == doctest::Approx(best).epsilon(1e-12));
        CHECK(i_star_equi(s.transposed(), 3, 2) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("budget of eight populates five entries")
{
    auto m = char_matrix_e(uniform_sample(20, 3), BPolicy(0.5, 8));
    CHECK(m.budget == 8);
    std::vector<std::pair<std::size_t, std::size_t>> keys;
    for (const auto& [key, value] : m.entries) {
        keys.push_back(key);
        CHECK(value >= 0.0);
        CHECK(value <= 1.0);
    }
    std::vector<std::pair<std::size_t, std::size_t>> expected{{2, 2}, {2, 3}, {2, 4}, {3, 2}, {4, 2}};
    CHECK(keys == expected);
    CHECK(m.at(2, 4).has_value());
    CHECK(!m.at(3, 3).has_value());
}

TEST_CASE("noiseless monotone data scores one")
{
    for (std::size_t n : {4u, 8u, 10u, 57u, 100u, 1000u}) {
        auto s = monotone_sample(n);
        auto e = mic_e(s, BPolicy());
        CHECK(e.value == 1.0);
        CHECK(mic_approx(s, BPolicy()).value == 1.0);
        if (n % 2 == 0) {
            CHECK(e.argmax_k == 2);
            CHECK(e.argmax_l == 2);
            CHECK(char_matrix_e(s, BPolicy()).at(2, 2).value() == 1.0);
        }
    }
    // n = 7 allows only 2x2 grids, where a 3/4 split cannot reach ln 2.
    CHECK(mic_e(monotone_sample(7), BPolicy()).value ==
          doctest::Approx(oracle::hb(3.0 / 7.0) / std::log(2.0)).epsilon(1e-12));
    CHECK(mic_brute(monotone_sample(8), BPolicy()).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("four point independence pattern")
{
    SampleData pattern({{1, 1}, {1, 2}, {2, 1}, {2, 2}});
    auto m = char_matrix_e(pattern, BPolicy());
    CHECK(m.entries.size() == 1);
    CHECK(mic_e(pattern, BPolicy()).value == 0.0);
    CHECK(mic_brute(pattern, BPolicy()).value == 0.0);
    CHECK(mic_approx(pattern, BPolicy()).value == 0.0);
}

TEST_CASE("brute force agrees with an independent enumeration")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto s = uniform_sample(8, 50 + seed);
        BPolicy policy(0.6, 6);
        auto b = mic_brute(s, policy);
        CHECK(b.value == doctest::Approx(oracle_mic_brute(s, b.budget)).epsilon(1e-12));
    }
}

TEST_CASE("equipartition statistics never exceed the exhaustive search")
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        std::size_t n = 6 + seed % 7;
        auto s = uniform_sample(n, 200 + seed);
        BPolicy policy(0.6, 4 + seed % 6);
        auto brute = char_matrix_brute(s, policy);
        auto equi = char_matrix_e(s, policy);
        auto approx = char_matrix_approx(s, policy);
        REQUIRE(brute.entries.size() == equi.entries.size());
        for (const auto& [key, value] : equi.entries) {
            CHECK(value <= brute.entries.at(key) + 1e-12);
            CHECK(approx.entries.at(key) <= brute.entries.at(key) + 1e-12);
        }
        double top = mic_brute(s, policy).value;
        CHECK(mic_e(s, policy).value <= top + 1e-12);
        CHECK(mic_approx(s, policy).value <= top + 1e-12);
    }
    CHECK_THROWS_AS(mic_brute(uniform_sample(13, 1), BPolicy()), PreconditionError);
}

TEST_CASE("scores are invariant under increasing maps")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto s = uniform_sample(300, 400 + seed);
        std::vector<Point> mapped;
        for (const auto& p : s.points()) {
            mapped.push_back({std::exp(5.0 * p.x) - 3.0, p.y * p.y * p.y + 2.0});
        }
        SampleData t(std::move(mapped));
        auto a = mic_e(s, BPolicy());
        auto b = mic_e(t, BPolicy());
        CHECK(a.value == b.value);
        CHECK(a.argmax_k == b.argmax_k);
        CHECK(a.argmax_l == b.argmax_l);
        CHECK(mic_approx(s, BPolicy()).value == mic_approx(t, BPolicy()).value);
    }
}

TEST_CASE("transposing the sample transposes the matrix")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto s = uniform_sample(200, 500 + seed);
        auto a = char_matrix_e(s, BPolicy());
        auto b = char_matrix_e(s.transposed(), BPolicy());
        for (const auto& [key, value] : a.entries) {
            CHECK(value == b.entries.at({key.second, key.first}));
        }
        CHECK(mic_e(s, BPolicy()).value == mic_e(s.transposed(), BPolicy()).value);
    }
}

TEST_CASE("degenerate axes")
{
    std::vector<Point> flat;
    for (int i = 0; i < 20; ++i) {
        flat.push_back({static_cast<double>(i), 3.0});
    }
    SampleData s(std::move(flat));
    MicResult r;
    auto warnings = capture_warnings([&] { r = mic_e(s, BPolicy()); });
    CHECK(r.value == 0.0);
    CHECK(r.degenerate);
    CHECK(!warnings.empty());
    warnings = capture_warnings([&] { r = mic_approx(s.transposed(), BPolicy()); });
    CHECK(r.value == 0.0);
    CHECK(!warnings.empty());
    CHECK_THROWS_AS(mic_e(SampleData({{0, 0}, {1, 1}, {2, 2}}), BPolicy()), PreconditionError);
}

TEST_CASE("ties never separate equal values")
{
    std::mt19937_64 rng(7);
    std::vector<Point> pts;
    for (int i = 0; i < 200; ++i) {
        pts.push_back({static_cast<double>(rng() % 5), static_cast<double>(rng() % 3)});
    }
    SampleData s(std::move(pts));
    auto e = mic_e(s, BPolicy());
    CHECK(e.value >= 0.0);
    CHECK(e.value <= 1.0);
    // Duplicated points carry the same information as weighted ones.
    std::vector<Point> doubled;
    for (const auto& p : s.points()) {
        doubled.push_back(p);
        doubled.push_back(p);
    }
    auto d = char_matrix_e(SampleData(doubled), BPolicy(0.6, 4));
    auto single = char_matrix_e(s, BPolicy(0.6, 4));
    for (const auto& [key, value] : single.entries) {
        CHECK(d.entries.at(key) == doctest::Approx(value).epsilon(1e-12));
    }
}

TEST_CASE("superclumps keep the monotone score and bound the exact search")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto s = uniform_sample(400, 600 + seed);
        auto exact = char_matrix_e(s, BPolicy(), SearchOptions{0});
        auto fast = char_matrix_e(s, BPolicy());
        for (const auto& [key, value] : exact.entries) {
            CHECK(fast.entries.at(key) <= value + 1e-12);
        }
    }
    CHECK(mic_e(monotone_sample(5000), BPolicy()).value == 1.0);
}

TEST_CASE("consistency trends")
{
    auto median_of = [](auto make, std::size_t n, int seeds) {
        std::vector<double> v;
        for (int s = 0; s < seeds; ++s) {
            v.push_back(mic_e(make(n, 77 + static_cast<std::uint64_t>(s)), BPolicy()).value);
        }
        return oracle::median(v);
    };
    double i100 = median_of(uniform_sample, 100, 9);
    double i1000 = median_of(uniform_sample, 1000, 9);
    CHECK(i1000 < i100);
    CHECK(i1000 < 0.25);
    double b100 = median_of(two_block_sample, 100, 5);
    double b1000 = median_of(two_block_sample, 1000, 5);
    double b10000 = median_of(two_block_sample, 10000, 3);
    CHECK(b100 <= b1000 + 1e-12);
    CHECK(b1000 <= b10000 + 1e-12);
    CHECK(b10000 > 0.9);
}
