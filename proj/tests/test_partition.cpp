#include "mickit/errors.hpp"
#include "mickit/partition.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace mickit;

namespace {

DiscreteJoint from_matrix(const oracle::Matrix& m)
{
    return DiscreteJoint(m.size(), m[0].size(), oracle::flatten(m));
}

std::vector<std::size_t> counts_of(const Equipartition& e, std::size_t n)
{
    std::vector<std::size_t> bounds{0};
    bounds.insert(bounds.end(), e.starts.begin(), e.starts.end());
    bounds.push_back(n);
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        counts.push_back(bounds[i + 1] - bounds[i]);
    }
    return counts;
}

// Best information over groupings of the free axis, by enumeration.
double oracle_best(const MasterJoint& master, std::size_t k)
{
    oracle::Matrix m(master.joint.rows(), std::vector<double>(master.joint.cols()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            m[i][j] = master.joint.at(i, j);
        }
    }
    if (master.free_axis == Axis::cols) {
        m = oracle::transpose(m);
    }
    if (m.size() == 1) {
        return oracle::mi(m);
    }
    return oracle::best_row_grouping(m, k);
}

// Groups fine indices [0, fine); cut c separates index c from c + 1.
std::vector<std::size_t> group_by_cuts(std::size_t fine, const std::vector<std::size_t>& cuts, std::size_t& groups)
{
    std::vector<std::size_t> g(fine);
    for (std::size_t i = 0; i < fine; ++i) {
        g[i] = static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), i) - cuts.begin());
    }
    groups = cuts.size() + 1;
    return g;
}

double grid_information(const oracle::Matrix& fine, const std::vector<std::size_t>& row_cuts,
                        const std::vector<std::size_t>& col_cuts)
{
    std::size_t rows = 0;
    std::size_t cols = 0;
    auto rg = group_by_cuts(fine.size(), row_cuts, rows);
    auto cg = group_by_cuts(fine[0].size(), col_cuts, cols);
    std::vector<double> mass(rows * cols, 0.0);
    for (std::size_t i = 0; i < fine.size(); ++i) {
        for (std::size_t j = 0; j < fine[i].size(); ++j) {
            mass[rg[i] * cols + cg[j]] += fine[i][j];
        }
    }
    return mutual_information(DiscreteJoint::normalized(rows, cols, mass));
}

} // namespace

TEST_CASE("partition basics")
{
    Partition p({0.5, 1.5});
    CHECK(p.parts() == 3);
    CHECK(p.bin_of(0.49) == 0);
    CHECK(p.bin_of(0.5) == 1);
    CHECK(p.bin_of(2.0) == 2);
    CHECK_THROWS(Partition({1.0, 1.0}));
    CHECK(Partition().parts() == 1);
}

TEST_CASE("equipartition examples")
{
    std::vector<double> six{1, 2, 3, 4, 5, 6};
    auto e = equipartition_counts(six, 3);
    CHECK(counts_of(e, 6) == std::vector<std::size_t>{2, 2, 2});
    CHECK(e.counts == std::vector<std::size_t>{2, 2, 2});
    CHECK(!e.coarsened);

    std::vector<double> tied{1, 1, 1, 2};
    auto t = equipartition_counts(tied, 2);
    CHECK(t.counts == std::vector<std::size_t>{3, 1});
    CHECK(t.partition.bin_of(1.0) == 0);
    CHECK(t.partition.bin_of(2.0) == 1);

    std::vector<double> few{1, 1, 2, 2, 2};
    auto f = equipartition_counts(few, 4);
    CHECK(f.coarsened);
    CHECK(f.counts == std::vector<std::size_t>{2, 3});

    CHECK_THROWS_AS(equipartition_counts(six, 0), PreconditionError);
    CHECK_THROWS_AS(equipartition_counts(six, 7), PreconditionError);
}

TEST_CASE("equipartition of distinct values is as even as any placement")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 10;
        std::size_t m = 4;
        std::vector<double> v(n);
        for (double& x : v) {
            x = u(rng);
        }
        std::sort(v.begin(), v.end());
        auto e = equipartition_counts(v, m);
        auto counts = counts_of(e, n);
        REQUIRE(counts.size() == m);
        auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        std::size_t spread = *hi - *lo;
        // Smallest spread over every choice of m - 1 gaps.
        std::size_t best = n;
        for (std::uint32_t mask = 0; mask < (1U << (n - 1)); ++mask) {
            if (std::popcount(mask) != static_cast<int>(m - 1)) {
                continue;
            }
            std::size_t groups = 0;
            auto g = oracle::groups_from_mask(n, mask, groups);
            std::vector<std::size_t> c(groups, 0);
            for (std::size_t idx : g) {
                ++c[idx];
            }
            auto [a, b] = std::minmax_element(c.begin(), c.end());
            best = std::min(best, *b - *a);
        }
        CHECK(spread == best);
        CHECK(spread <= 1);
        for (std::size_t s = 0; s < e.partition.cuts().size(); ++s) {
            double cut = e.partition.cuts()[s];
            CHECK(cut > v[e.starts[s] - 1]);
            CHECK(cut < v[e.starts[s]]);
        }
    }
}

TEST_CASE("equipartition never splits ties")
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 5 + rng() % 40;
        std::vector<double> v(n);
        for (double& x : v) {
            x = static_cast<double>(rng() % 7);
        }
        std::sort(v.begin(), v.end());
        std::size_t m = 1 + rng() % n;
        auto e = equipartition_counts(v, m);
        for (std::size_t s : e.starts) {
            CHECK(v[s - 1] < v[s]);
        }
        std::size_t distinct = static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
        CHECK(e.coarsened == (distinct < m));
        CHECK(e.counts.size() == std::min(m, distinct));
    }
}

TEST_CASE("apply grid")
{
    std::vector<Point> quad{{0.1, 0.1}, {0.9, 0.1}, {0.1, 0.9}, {0.9, 0.9}};
    auto j = apply_grid(quad, Grid{Partition({0.5}), Partition({0.5})});
    for (double v : j.mass()) {
        CHECK(v == doctest::Approx(0.25));
    }
    std::vector<Point> lump{{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.1}};
    auto d = apply_grid(lump, Grid{Partition({0.5}), Partition({0.5})});
    CHECK(d.at(0, 0) == doctest::Approx(1.0));
    CHECK(mutual_information(d) == 0.0);

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Point> pts(50);
        for (auto& p : pts) {
            p = {u(rng), u(rng)};
        }
        std::vector<double> xc{u(rng) * 0.3, 0.3 + u(rng) * 0.3, 0.7};
        std::vector<double> yc{0.2 + u(rng) * 0.5};
        auto joint = apply_grid(pts, Grid{Partition(xc), Partition(yc)});
        REQUIRE(joint.rows() == 2);
        REQUIRE(joint.cols() == 4);
        std::vector<double> counts(8, 0.0);
        for (const auto& p : pts) {
            std::size_t c = 0;
            for (double cut : xc) {
                c += p.x >= cut ? 1 : 0;
            }
            std::size_t r = p.y >= yc[0] ? 1 : 0;
            counts[r * 4 + c] += 1.0;
        }
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(joint.mass()[i] == doctest::Approx(counts[i] / 50.0).epsilon(1e-15));
        }
    }
}

TEST_CASE("three column dynamic program example")
{
    // Columns (0.3, 0), (0, 0.3), (0.2, 0.2) with rows as the fixed axis.
    DiscreteJoint joint(2, 3, {0.3, 0.0, 0.2, 0.0, 0.3, 0.2});
    MasterJoint master{joint, Axis::cols};
    auto dp = optimize_partition_dp(master, 2);
    double expected = std::log(2.0) - 0.7 * oracle::hb(2.0 / 7.0);
    CHECK(dp.information == doctest::Approx(expected).epsilon(1e-12));
    REQUIRE(dp.partition.cuts().size() == 1);
    CHECK(dp.partition.cuts()[0] == 1.0);
    auto brute = brute_force_partition(master, 2);
    CHECK(brute.partition == dp.partition);
    CHECK(std::abs(brute.information - expected) < 1e-12);
}

TEST_CASE("product masters prefer a single part")
{
    std::vector<double> r{0.2, 0.5, 0.3};
    std::vector<double> c{0.1, 0.4, 0.25, 0.25};
    std::vector<double> mass;
    for (double a : r) {
        for (double b : c) {
            mass.push_back(a * b);
        }
    }
    MasterJoint master{DiscreteJoint::normalized(3, 4, mass), Axis::cols};
    for (std::size_t k = 2; k <= 5; ++k) {
        auto dp = optimize_partition_dp(master, k);
        CHECK(std::abs(dp.information) < 1e-12);
        CHECK(dp.partition.parts() == 1);
    }
}

TEST_CASE("single cell masters")
{
    MasterJoint master{DiscreteJoint(3, 1, {0.2, 0.3, 0.5}), Axis::cols};
    auto brute = brute_force_partition(master, 3);
    CHECK(brute.partition.parts() == 1);
    CHECK(brute.information == 0.0);
    CHECK(optimize_partition_dp(master, 2).partition.parts() == 1);
    CHECK_THROWS_AS(optimize_partition_dp(master, 1), PreconditionError);
}

TEST_CASE("dynamic program equals exhaustive search")
{
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t m = 1 + rng() % 12;
        std::size_t other = 1 + rng() % 5;
        std::size_t k = 2 + rng() % 5;
        Axis axis = trial % 2 == 0 ? Axis::cols : Axis::rows;
        auto mat = oracle::random_matrix(rng, axis == Axis::rows ? m : other, axis == Axis::rows ? other : m,
                                         trial % 3 == 0 ? 0.5 : 0.0);
        MasterJoint master{from_matrix(mat), axis};
        auto dp = optimize_partition_dp(master, k);
        auto brute = brute_force_partition(master, k);
        double truth = oracle_best(master, k);
        CHECK(std::abs(dp.information - truth) < 1e-9);
        CHECK(std::abs(brute.information - truth) < 1e-9);
        CHECK(dp.partition.parts() <= k);

        // The reported partition achieves the reported information.
        std::size_t groups = 0;
        std::vector<std::size_t> cuts;
        for (double c : dp.partition.cuts()) {
            cuts.push_back(static_cast<std::size_t>(c) - 1);
        }
        auto g = group_by_cuts(m, cuts, groups);
        auto rows_major = axis == Axis::rows ? mat : oracle::transpose(mat);
        CHECK(std::abs(oracle::mi(oracle::group_rows(rows_major, g, groups)) - dp.information) < 1e-9);
    }
}

TEST_CASE("optimal information is nondecreasing in the number of parts")
{
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        auto mat = oracle::random_matrix(rng, 4, 15);
        MasterJoint master{from_matrix(mat), Axis::cols};
        double previous = 0.0;
        for (std::size_t k = 2; k <= 16; ++k) {
            double v = optimize_partition_dp(master, k).information;
            CHECK(v >= previous - 1e-12);
            previous = v;
        }
        CHECK(previous == doctest::Approx(oracle::mi(mat)).epsilon(1e-10));
    }
}

TEST_CASE("incremental search agrees with the dynamic program")
{
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t m = 3 + rng() % 20;
        auto mat = oracle::random_matrix(rng, m, 3, 0.3);
        auto flat = oracle::flatten(mat);
        auto search = PartitionSearch::dense(m, 3, flat);
        MasterJoint master{from_matrix(mat), Axis::rows};
        search.advance();
        for (std::size_t k = 2; k <= 6; ++k) {
            double v = search.advance();
            auto dp = optimize_partition_dp(master, k);
            CHECK(std::abs(v - dp.information) < 1e-10);
            CHECK(search.partition(k) == dp.partition);
        }
    }
}

TEST_CASE("coarsening never increases information")
{
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 200; ++trial) {
        auto mat = oracle::random_matrix(rng, 8, 8);
        std::vector<std::size_t> rc;
        std::vector<std::size_t> cc;
        for (std::size_t i = 0; i < 7; ++i) {
            if (rng() % 2) {
                rc.push_back(i);
            }
            if (rng() % 2) {
                cc.push_back(i);
            }
        }
        CHECK(grid_information(mat, rc, cc) <= mutual_information(from_matrix(mat)) + 1e-12);
    }
}

TEST_CASE("merging adjacent columns")
{
    // |I(Z') - I(Z)| <= pi H_b(nu / pi).
    std::mt19937_64 rng(59);
    int violations = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t rows = 2 + rng() % 6;
        std::size_t cols = 2 + rng() % 6;
        auto mat = oracle::random_matrix(rng, rows, cols, trial % 5 == 0 ? 0.4 : 0.0);
        std::size_t c = rng() % (cols - 1);
        oracle::Matrix merged(rows, std::vector<double>(cols - 1));
        double nu = 0.0;
        double pi = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                std::size_t target = j <= c ? j : j - 1;
                merged[i][target] += mat[i][j];
            }
            nu += mat[i][c];
            pi += mat[i][c] + mat[i][c + 1];
        }
        double change = std::abs(mutual_information(from_matrix(mat)) - mutual_information(from_matrix(merged)));
        double bound = pi > 0.0 ? pi * oracle::hb(nu / pi) : 0.0;
        if (change > bound + 1e-12) {
            ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("realigning a grid to a coarser master grid")
{
    // A fine 48x48 joint stands in for the distribution; the master grid uses
    // every fourth fine line. Each line of G that is not a master line is
    // replaced by the two master lines around it.
    constexpr std::size_t fine = 48;
    constexpr std::size_t step = 4;
    std::mt19937_64 rng(61);
    int violations = 0;
    int tested = 0;
    for (int trial = 0; trial < 500; ++trial) {
        auto mat = oracle::random_matrix(rng, fine, fine, 0.7);
        auto random_cuts = [&] {
            std::vector<std::size_t> cuts;
            std::size_t count = 1 + rng() % 3;
            while (cuts.size() < count) {
                std::size_t c = rng() % (fine - 1);
                if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) {
                    cuts.push_back(c);
                }
            }
            std::sort(cuts.begin(), cuts.end());
            return cuts;
        };
        // Cut c separates fine index c from c + 1; a master line sits after
        // every index congruent to step - 1.
        auto rc = random_cuts();
        auto cc = random_cuts();
        auto realign = [&](const std::vector<std::size_t>& cuts) {
            std::vector<std::size_t> out;
            for (std::size_t c : cuts) {
                if (c % step == step - 1) {
                    out.push_back(c);
                    continue;
                }
                std::size_t block = c / step;
                if (block > 0) {
                    out.push_back(block * step - 1);
                }
                if (block * step + step - 1 < fine - 1) {
                    out.push_back(block * step + step - 1);
                }
            }
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            return out;
        };
        auto dissonant_blocks = [&](const std::vector<std::size_t>& cuts) {
            std::vector<bool> hit(fine / step, false);
            for (std::size_t c : cuts) {
                if (c % step != step - 1) {
                    hit[c / step] = true;
                }
            }
            return hit;
        };
        auto hr = dissonant_blocks(rc);
        auto hc = dissonant_blocks(cc);
        double delta = 0.0;
        for (std::size_t i = 0; i < fine; ++i) {
            for (std::size_t j = 0; j < fine; ++j) {
                if (hr[i / step] || hc[j / step]) {
                    delta += mat[i][j];
                }
            }
        }
        if (delta > 0.5) {
            continue;
        }
        ++tested;
        double change = std::abs(grid_information(mat, rc, cc) - grid_information(mat, realign(rc), realign(cc)));
        if (change > 2.0 * (oracle::hb(delta) + delta) + 1e-12) {
            ++violations;
        }
    }
    CHECK(tested > 100);
    CHECK(violations == 0);
}
