#include "cbm/gf2.hpp"
#include "cbm/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

namespace {

// Independent dense Gaussian elimination over GF(2); the rank oracle.
std::size_t naive_rank(std::size_t n, const std::vector<std::vector<std::uint32_t>>& rows) {
    std::vector<std::vector<std::uint8_t>> m;
    for (const auto& support : rows) {
        std::vector<std::uint8_t> row(n, 0);
        for (auto idx : support) row[idx] ^= 1u;
        m.push_back(std::move(row));
    }
    std::size_t rank = 0;
    for (std::size_t col = 0; col < n && rank < m.size(); ++col) {
        std::size_t pivot = rank;
        while (pivot < m.size() && m[pivot][col] == 0) ++pivot;
        if (pivot == m.size()) continue;
        std::swap(m[rank], m[pivot]);
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r != rank && m[r][col]) {
                for (std::size_t cc = 0; cc < n; ++cc) m[r][cc] ^= m[rank][cc];
            }
        }
        ++rank;
    }
    return rank;
}

std::vector<std::uint32_t> random_support(cbm::RandomSource& rng, std::uint32_t n) {
    const auto size = 1 + rng.below(std::min<std::uint64_t>(n, 6));
    return rng.k_subset(n, static_cast<std::uint32_t>(size));
}

} // namespace

TEST_SUITE_BEGIN("gf2");

TEST_CASE("first row is independent, duplicates are not") {
    cbm::Gf2System sys(8);
    CHECK(sys.add_row({1, 2, 3}) == 1);
    CHECK(sys.rank() == 1);
    CHECK(sys.add_row({1, 2, 3}) == 0);
    CHECK(sys.rank() == 1);
    CHECK(sys.row_count() == 2);
}

TEST_CASE("three-row reference system on n=4") {
    cbm::Gf2System sys(4);
    CHECK(sys.add_row({0, 1, 2}) == 1);
    CHECK(sys.add_row({0, 1, 3}) == 1);
    CHECK(sys.add_row({0, 2, 3}) == 1);
    CHECK(sys.rank() == 3);
    // {1} is the xor of all three rows; {2} is outside the row space
    CHECK(sys.in_row_space({0}));
    CHECK_FALSE(sys.in_row_space({1}));
    CHECK(sys.singleton_in_row_space(0));
    CHECK_FALSE(sys.singleton_in_row_space(1));
    CHECK(sys.in_row_space({}));
    CHECK(sys.determined_count() == 1);
    CHECK(count_solutions_brute_force(sys) == 2); // 2^{4-3}
}

TEST_CASE("identity rows reach full rank") {
    cbm::Gf2System sys(5);
    for (std::uint32_t i = 0; i < 5; ++i) CHECK(sys.add_singleton(i) == 1);
    CHECK(sys.rank() == 5);
    CHECK(sys.determined_count() == 5);
    CHECK(count_solutions_brute_force(sys) == 1);
}

TEST_CASE("out-of-range index is rejected") {
    cbm::Gf2System sys(4);
    CHECK_THROWS_AS(sys.add_row({0, 4}), std::out_of_range);
    CHECK_THROWS_AS((void)sys.in_row_space({7}), std::out_of_range);
}

TEST_CASE("rank agrees with naive dense elimination on random 50x100 systems") {
    cbm::RandomSource rng(123);
    for (int trial = 0; trial < 10; ++trial) {
        const std::uint32_t n = 100;
        cbm::Gf2System sys(n);
        std::vector<std::vector<std::uint32_t>> rows;
        for (int r = 0; r < 50; ++r) {
            rows.push_back(random_support(rng, n));
            sys.add_row(rows.back());
        }
        CHECK(sys.rank() == naive_rank(n, rows));
    }
}

TEST_CASE("rank is invariant under row insertion order") {
    cbm::RandomSource rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t n = 24;
        std::vector<std::vector<std::uint32_t>> rows;
        for (int r = 0; r < 12; ++r) rows.push_back(random_support(rng, n));
        cbm::Gf2System a(n);
        for (const auto& row : rows) a.add_row(row);
        // shuffle
        std::vector<std::size_t> order(rows.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);
        cbm::Gf2System b(n);
        for (auto idx : order) b.add_row(rows[idx]);
        CHECK(a.rank() == b.rank());
    }
}

TEST_CASE("membership is closed under symmetric difference with inserted rows") {
    cbm::RandomSource rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const std::uint32_t n = 20;
        cbm::Gf2System sys(n);
        std::vector<std::vector<std::uint32_t>> rows;
        for (int r = 0; r < 8; ++r) {
            rows.push_back(random_support(rng, n));
            sys.add_row(rows.back());
        }
        const auto s = random_support(rng, n);
        if (!sys.in_row_space(s)) continue;
        for (const auto& row : rows) {
            std::vector<std::uint8_t> flags(n, 0);
            for (auto idx : s) flags[idx] ^= 1u;
            for (auto idx : row) flags[idx] ^= 1u;
            std::vector<std::uint32_t> sym_diff;
            for (std::uint32_t i = 0; i < n; ++i)
                if (flags[i]) sym_diff.push_back(i);
            CHECK(sys.in_row_space(sym_diff));
        }
    }
}

TEST_CASE("solution count equals 2^(n - rank) for n <= 16") {
    cbm::RandomSource rng(55);
    for (int trial = 0; trial < 40; ++trial) {
        const std::uint32_t n = 6 + static_cast<std::uint32_t>(rng.below(11)); // 6..16
        cbm::Gf2System sys(n);
        const auto m = rng.below(12);
        for (std::uint64_t r = 0; r < m; ++r) sys.add_row(random_support(rng, n));
        CHECK(count_solutions_brute_force(sys) == (std::uint64_t{1} << (n - sys.rank())));
    }
}

TEST_CASE("coset classes partition the variables and mark the zero class") {
    cbm::Gf2System sys(4);
    sys.add_row({0, 1, 2});
    sys.add_row({0, 1, 3});
    sys.add_row({0, 2, 3});
    const auto classes = sys.coset_classes();
    std::uint32_t total = 0;
    for (auto sz : classes.sizes) total += sz;
    CHECK(total == 4);
    REQUIRE(classes.zero_class >= 0);
    CHECK(classes.sizes[static_cast<std::size_t>(classes.zero_class)] == 1); // variable 0 only
    // i and j share a class iff {i, j} is in the row space
    for (std::uint32_t i = 0; i < 4; ++i) {
        for (std::uint32_t j = 0; j < 4; ++j) {
            const bool same = sys.coset_rep(i) == sys.coset_rep(j);
            std::vector<std::uint32_t> pair;
            if (i != j) pair = {std::min(i, j), std::max(i, j)};
            CHECK(same == sys.in_row_space(pair));
        }
    }
}

TEST_CASE("repeated indices in a support cancel in pairs") {
    cbm::Gf2System sys(6);
    const std::uint32_t twice[4] = {2, 2, 3, 3};
    CHECK(sys.add_row(std::span<const std::uint32_t>(twice, 4)) == 0); // the zero row
    CHECK(sys.rank() == 0);
}

TEST_SUITE_END();
