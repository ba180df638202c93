// Word-parallel GF(2) linear algebra with incremental row reduction.
//
// A Gf2System holds parity constraints as bit-packed rows over n variables
// and maintains a reduced row-echelon basis while rows are inserted, so the
// three queries the rest of the library lives on are cheap:
//
//   rank()                O(1)            free entropy = (1 - rank/n) ln 2
//   in_row_space(S)       O(rank * n/64)  Gibbs bracket <sigma_S> in {0,1}
//   coset classes         O(n * n/64)     exact overlap moments <Q_1^k>
//
// Because the basis is fully reduced (each pivot column appears in exactly
// one basis row), the map from a vector to its canonical coset
// representative is linear, which is what makes the coset-class machinery
// exact rather than Monte Carlo.
//
// Concurrency: single writer while rows are added; all query methods are
// const and reduce scratch copies, so a frozen system can be shared across
// threads.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cbm {

class Gf2System {
public:
    explicit Gf2System(std::size_t n);

    std::size_t n() const { return n_; }
    std::size_t words() const { return words_; }
    std::size_t rank() const { return rank_; }
    std::size_t row_count() const { return rows_.size(); }
    const std::vector<std::vector<std::uint32_t>>& rows() const { return rows_; }

    // Inserts the row with the given support. Returns 1 if the rank grew,
    // 0 if the row was already in the span. Repeated indices cancel in
    // pairs (GF(2)).
    int add_row(std::span<const std::uint32_t> support);
    int add_row(std::initializer_list<std::uint32_t> support) {
        return add_row(std::span<const std::uint32_t>(support.begin(), support.size()));
    }
    int add_singleton(std::uint32_t index);

    // True iff the indicator vector of the support reduces to zero against
    // the basis. Does not mutate the system.
    bool in_row_space(std::span<const std::uint32_t> support) const;
    bool in_row_space(std::initializer_list<std::uint32_t> support) const {
        return in_row_space(std::span<const std::uint32_t>(support.begin(), support.size()));
    }
    bool singleton_in_row_space(std::uint32_t index) const;

    // Number of variables i with e_i in the row space.
    std::size_t determined_count() const;

    // Canonical coset representative of e_i in F_2^n / row space.
    std::vector<std::uint64_t> coset_rep(std::uint32_t index) const;

    // Variables grouped by coset representative. Two variables i, j share a
    // class iff <sigma_i sigma_j> = 1; class of the zero rep collects the
    // determined variables.
    struct CosetClasses {
        std::vector<std::vector<std::uint64_t>> reps;
        std::vector<std::uint32_t> sizes;
        std::ptrdiff_t zero_class = -1; // index into reps/sizes, or -1
    };
    CosetClasses coset_classes() const;

private:
    void pack(std::span<const std::uint32_t> support, std::vector<std::uint64_t>& out) const;
    void reduce(std::vector<std::uint64_t>& v) const;
    static bool is_zero(const std::vector<std::uint64_t>& v);

    std::size_t n_;
    std::size_t words_;
    std::size_t rank_ = 0;
    std::vector<std::vector<std::uint32_t>> rows_;    // inserted supports, insertion order
    std::vector<std::vector<std::uint64_t>> basis_;   // reduced row-echelon basis
    std::vector<std::uint32_t> basis_pivot_;          // pivot column of each basis row
    std::vector<std::int32_t> pivot_row_;             // column -> basis row index, or -1
};

// Exact count of {0,1}-solutions by exhaustive enumeration; n <= 24 guard.
// Test oracle for the 2^{n-rank} identity.
std::uint64_t count_solutions_brute_force(const Gf2System& system);

} // namespace cbm
