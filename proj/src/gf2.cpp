#include "cbm/gf2.hpp"

#include <bit>
#include <stdexcept>
#include <unordered_map>

namespace cbm {

// Basis invariant maintained throughout: rows are in reduced row-echelon
// form, every row's support lies at or above its pivot column, and each
// pivot column appears in exactly one row. Reduction of any vector is then
// a single forward pass, and the vector -> coset-representative map is
// linear.

Gf2System::Gf2System(std::size_t n) : n_(n), words_((n + 63) / 64), pivot_row_(n, -1) {
    if (n == 0) throw std::invalid_argument("Gf2System: n must be positive");
}

void Gf2System::pack(std::span<const std::uint32_t> support, std::vector<std::uint64_t>& out) const {
    out.assign(words_, 0);
    for (auto idx : support) {
        if (idx >= n_) throw std::out_of_range("Gf2System: variable index out of range");
        out[idx >> 6] ^= std::uint64_t{1} << (idx & 63);
    }
}

bool Gf2System::is_zero(const std::vector<std::uint64_t>& v) {
    for (auto w : v)
        if (w != 0) return false;
    return true;
}

// Clears every pivot column from v; non-pivot bits are left in place.
void Gf2System::reduce(std::vector<std::uint64_t>& v) const {
    for (std::size_t w = 0; w < words_; ++w) {
        std::uint64_t skip = 0;
        std::uint64_t pending = v[w];
        while (pending != 0) {
            const int b = std::countr_zero(pending);
            const auto col = static_cast<std::uint32_t>((w << 6) + static_cast<std::size_t>(b));
            const std::int32_t r = pivot_row_[col];
            if (r >= 0) {
                const auto& row = basis_[static_cast<std::size_t>(r)];
                for (std::size_t k = w; k < words_; ++k) v[k] ^= row[k];
            }
            skip |= std::uint64_t{1} << b;
            pending = v[w] & ~skip;
        }
    }
}

int Gf2System::add_row(std::span<const std::uint32_t> support) {
    rows_.emplace_back(support.begin(), support.end());
    std::vector<std::uint64_t> v;
    pack(support, v);
    reduce(v);
    std::uint32_t pivot = 0;
    bool found = false;
    for (std::size_t w = 0; w < words_ && !found; ++w) {
        if (v[w] != 0) {
            pivot = static_cast<std::uint32_t>((w << 6) + static_cast<std::size_t>(std::countr_zero(v[w])));
            found = true;
        }
    }
    if (!found) return 0;
    // back-eliminate the fresh pivot from every existing basis row
    const std::size_t pw = pivot >> 6;
    const std::uint64_t pmask = std::uint64_t{1} << (pivot & 63);
    for (auto& row : basis_) {
        if (row[pw] & pmask) {
            for (std::size_t k = 0; k < words_; ++k) row[k] ^= v[k];
        }
    }
    pivot_row_[pivot] = static_cast<std::int32_t>(basis_.size());
    basis_pivot_.push_back(pivot);
    basis_.push_back(std::move(v));
    ++rank_;
    return 1;
}

int Gf2System::add_singleton(std::uint32_t index) {
    const std::uint32_t support[1] = {index};
    return add_row(std::span<const std::uint32_t>(support, 1));
}

bool Gf2System::in_row_space(std::span<const std::uint32_t> support) const {
    std::vector<std::uint64_t> v;
    pack(support, v);
    for (std::size_t w = 0; w < words_; ++w) {
        std::uint64_t bits = v[w];
        while (bits != 0) {
            const int b = std::countr_zero(bits);
            const auto col = static_cast<std::uint32_t>((w << 6) + static_cast<std::size_t>(b));
            const std::int32_t r = pivot_row_[col];
            if (r < 0) return false; // a non-pivot bit can never be cleared
            const auto& row = basis_[static_cast<std::size_t>(r)];
            for (std::size_t k = w; k < words_; ++k) v[k] ^= row[k];
            bits = v[w];
        }
    }
    return true;
}

bool Gf2System::singleton_in_row_space(std::uint32_t index) const {
    if (index >= n_) throw std::out_of_range("Gf2System: variable index out of range");
    const std::int32_t r = pivot_row_[index];
    if (r < 0) return false;
    // e_index lies in the span iff the row owning that pivot is exactly e_index
    const auto& row = basis_[static_cast<std::size_t>(r)];
    int pop = 0;
    for (auto w : row) {
        pop += std::popcount(w);
        if (pop > 1) return false;
    }
    return pop == 1;
}

std::size_t Gf2System::determined_count() const {
    std::size_t count = 0;
    for (const auto& row : basis_) {
        int pop = 0;
        for (auto w : row) {
            pop += std::popcount(w);
            if (pop > 1) break;
        }
        if (pop == 1) ++count;
    }
    return count;
}

std::vector<std::uint64_t> Gf2System::coset_rep(std::uint32_t index) const {
    if (index >= n_) throw std::out_of_range("Gf2System: variable index out of range");
    std::vector<std::uint64_t> v(words_, 0);
    v[index >> 6] = std::uint64_t{1} << (index & 63);
    const std::int32_t r = pivot_row_[index];
    if (r >= 0) {
        // e_index ^ (pivot row) strips the pivot bit and leaves only
        // non-pivot columns: already canonical
        const auto& row = basis_[static_cast<std::size_t>(r)];
        for (std::size_t k = 0; k < words_; ++k) v[k] ^= row[k];
    }
    return v;
}

namespace {

struct WordVecHash {
    std::size_t operator()(const std::vector<std::uint64_t>& v) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (auto w : v) {
            h ^= w;
            h *= 0x100000001b3ULL;
            h ^= h >> 29;
        }
        return static_cast<std::size_t>(h);
    }
};

} // namespace

Gf2System::CosetClasses Gf2System::coset_classes() const {
    CosetClasses out;
    std::unordered_map<std::vector<std::uint64_t>, std::size_t, WordVecHash> index;
    index.reserve(n_ * 2);
    for (std::uint32_t i = 0; i < n_; ++i) {
        auto rep = coset_rep(i);
        const bool zero = is_zero(rep);
        auto [it, inserted] = index.try_emplace(std::move(rep), out.reps.size());
        if (inserted) {
            out.reps.push_back(it->first);
            out.sizes.push_back(0);
            if (zero) out.zero_class = static_cast<std::ptrdiff_t>(out.reps.size() - 1);
        }
        ++out.sizes[it->second];
    }
    return out;
}

std::uint64_t count_solutions_brute_force(const Gf2System& system) {
    const std::size_t n = system.n();
    if (n > 24) throw std::invalid_argument("count_solutions_brute_force: n too large");
    std::uint64_t count = 0;
    for (std::uint64_t cfg = 0; cfg < (std::uint64_t{1} << n); ++cfg) {
        bool ok = true;
        for (const auto& row : system.rows()) {
            unsigned parity = 0;
            for (auto idx : row) parity ^= static_cast<unsigned>(cfg >> idx) & 1u;
            if (parity != 0) { ok = false; break; }
        }
        if (ok) ++count;
    }
    return count;
}

} // namespace cbm
