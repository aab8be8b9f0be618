#include "reflecta/coset_union.hpp"

#include <algorithm>

#include "reflecta/errors.hpp"

namespace reflecta {

namespace {

constexpr std::size_t kMaxCosetExpansion = std::size_t(1) << 16;

std::vector<Vec> canonical_reps(const std::vector<Vec>& reps, const Lattice& base) {
    std::vector<Vec> out;
    out.reserve(reps.size());
    for (const Vec& r : reps) out.push_back(reduce_mod(base, r));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool is_prime(const Int& p) {
    if (p < 2) return false;
    for (Int d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

}  // namespace

CosetUnion coset_union(const std::vector<Vec>& reps, const Lattice& base) {
    if (reps.empty())
        throw validation_error("empty-union", "a coset union needs at least one representative");
    for (const Vec& r : reps)
        if (static_cast<int>(r.size()) != base.dim)
            throw validation_error("dimension-mismatch",
                                   "representative/base dimension mismatch");
    return CosetUnion{base.dim, base, canonical_reps(reps, base)};
}

CosetUnion cu_full(const Lattice& L) { return CosetUnion{L.dim, L, {vec_zero(L.dim)}}; }

bool cu_contains(const CosetUnion& a, const Vec& v) {
    if (static_cast<int>(v.size()) != a.dim)
        throw validation_error("dimension-mismatch", "vector/union dimension mismatch");
    Vec red = reduce_mod(a.base, v);
    return std::binary_search(a.reps.begin(), a.reps.end(), red);
}

CosetUnion cu_rebase(const CosetUnion& a, const Lattice& finer) {
    if (finer.dim != a.dim)
        throw validation_error("dimension-mismatch", "base/union dimension mismatch");
    if (!sublattice_of(finer, a.base))
        throw validation_error("not-a-refinement", "new base must be contained in the old base");
    if (finer == a.base) return a;
    if (lattice_rank(finer) != lattice_rank(a.base))
        throw validation_error("infinite-refinement",
                               "rebasing to a lower-rank base would need infinitely many cosets");
    FiniteQuotient q = quotient(a.base, finer);
    if (q.order() * a.reps.size() > kMaxCosetExpansion)
        throw budget_error("coset expansion exceeds the safety bound");
    std::vector<Vec> reps;
    reps.reserve(q.order() * a.reps.size());
    for (const Vec& r : a.reps)
        for (const Vec& e : q.elements()) reps.push_back(vec_add(r, e));
    return coset_union(reps, finer);
}

CosetUnion cu_minkowski(const CosetUnion& a, const CosetUnion& b) {
    if (a.dim != b.dim)
        throw validation_error("dimension-mismatch", "union dimension mismatch");
    Lattice base = lat_sum(a.base, b.base);
    std::vector<Vec> reps;
    reps.reserve(a.reps.size() * b.reps.size());
    for (const Vec& x : a.reps)
        for (const Vec& y : b.reps) reps.push_back(vec_add(x, y));
    return coset_union(reps, base);
}

CosetUnion cu_negate(const CosetUnion& a) {
    std::vector<Vec> reps;
    reps.reserve(a.reps.size());
    for (const Vec& x : a.reps) reps.push_back(vec_neg(x));
    return coset_union(reps, a.base);
}

CosetUnion cu_translate(const CosetUnion& a, const Vec& t) {
    if (static_cast<int>(t.size()) != a.dim)
        throw validation_error("dimension-mismatch", "translation/union dimension mismatch");
    std::vector<Vec> reps;
    reps.reserve(a.reps.size());
    for (const Vec& x : a.reps) reps.push_back(vec_add(x, t));
    return coset_union(reps, a.base);
}

CosetUnion cu_scale(const CosetUnion& a, const Int& c) {
    if (c == 0) throw validation_error("zero-scale", "scaling a coset union by zero");
    std::vector<Vec> reps;
    reps.reserve(a.reps.size());
    for (const Vec& x : a.reps) reps.push_back(vec_scale(x, c));
    return coset_union(reps, lat_scale(a.base, c));
}

bool cu_subset(const CosetUnion& a, const CosetUnion& b) {
    if (a.dim != b.dim)
        throw validation_error("dimension-mismatch", "union dimension mismatch");
    Lattice common = lat_intersect(a.base, b.base);
    if (lattice_rank(common) != lattice_rank(a.base)) {
        // A full coset of a.base is infinite in a direction b cannot
        // absorb with finitely many cosets of b.base.
        return false;
    }
    CosetUnion ar = cu_rebase(a, common);
    for (const Vec& r : ar.reps)
        if (!cu_contains(b, r)) return false;
    return true;
}

bool cu_equal(const CosetUnion& a, const CosetUnion& b) {
    if (a.dim != b.dim) return false;
    if (a.base == b.base) return a.reps == b.reps;
    return cu_subset(a, b) && cu_subset(b, a);
}

CosetUnionOrEmpty cu_intersect(const CosetUnion& a, const CosetUnion& b) {
    if (a.dim != b.dim)
        throw validation_error("dimension-mismatch", "union dimension mismatch");
    // (ra + A) and (rb + B) overlap iff rb - ra lies in A + B, and then the
    // overlap is a single coset of A meet B.  A witness point is ra + u for
    // any splitting rb - ra = u + v with u in A, v in B.
    const Lattice common = lat_intersect(a.base, b.base);
    const std::size_t na = a.base.rows.size();
    Mat stacked = a.base.rows;
    stacked.insert(stacked.end(), b.base.rows.begin(), b.base.rows.end());
    Mat work = stacked;
    Mat U;
    int rk = 0;
    if (!stacked.empty()) rk = detail::hnf_rows(work, &U);
    Lattice sum{a.dim, Mat(work.begin(), work.begin() + rk)};

    std::vector<Vec> witnesses;
    for (const Vec& ra : a.reps) {
        for (const Vec& rb : b.reps) {
            Vec d = vec_sub(rb, ra);
            auto c = coords_in_basis(sum, d);
            if (!c) continue;
            // d = sum_i c_i * H_i and H_i = sum_k U[i][k] * stacked_k, so the
            // A-part of the splitting collects the first na stacked rows.
            Vec u = vec_zero(a.dim);
            for (std::size_t i = 0; i < static_cast<std::size_t>(rk); ++i) {
                if ((*c)[i] == 0) continue;
                for (std::size_t k = 0; k < na; ++k) {
                    if (U[i][k] == 0) continue;
                    Int w = (*c)[i] * U[i][k];
                    for (std::size_t j = 0; j < u.size(); ++j) u[j] += w * stacked[k][j];
                }
            }
            witnesses.push_back(vec_add(ra, u));
        }
    }
    CosetUnionOrEmpty out;
    if (witnesses.empty()) return out;
    out.empty = false;
    out.value = coset_union(witnesses, common);
    return out;
}

bool cu_is_group(const CosetUnion& a) {
    if (!cu_contains(a, vec_zero(a.dim))) return false;
    if (!cu_equal(cu_negate(a), a)) return false;
    return cu_subset(cu_minkowski(a, a), a);
}

Lattice cu_span(const CosetUnion& a) {
    Mat rows = a.base.rows;
    rows.insert(rows.end(), a.reps.begin(), a.reps.end());
    return hnf_in_dim(a.dim, rows);
}

bool check_key_lemma(const Lattice& Lambda, const CosetUnion& L, const CosetUnion& Lp,
                     const Lattice& H) {
    const Lattice two_lambda = lat_scale(Lambda, 2);
    auto stable = [&](const CosetUnion& u) {
        return cu_subset(cu_minkowski(u, cu_full(two_lambda)), u);
    };
    if (!cu_contains(L, vec_zero(L.dim)))
        throw validation_error("zero-missing", "L must contain 0");
    if (!cu_contains(Lp, vec_zero(Lp.dim)))
        throw validation_error("zero-missing", "L' must contain 0");
    if (!stable(L) || !stable(Lp))
        throw validation_error("not-coset-union",
                               "L and L' must be unions of cosets of 2*Lambda");
    if (!sublattice_of(H, Lambda))
        throw validation_error("not-a-sublattice", "H must be a sublattice of Lambda");
    if (lattice_rank(H) != lattice_rank(Lambda))
        throw validation_error("index-not-prime", "H must have prime index in Lambda");
    Int ratio_sq = determinant_sq(H) / determinant_sq(Lambda);
    Int idx = sqrt(ratio_sq);
    if (idx * idx != ratio_sq)
        throw validation_error("index-not-prime", "H must have prime index in Lambda");
    if (idx == 2) throw validation_error("index-two", "index two is excluded by hypothesis");
    if (!is_prime(idx))
        throw validation_error("index-not-prime", "H must have prime index in Lambda");
    CosetUnionOrEmpty meet = cu_intersect(cu_full(H), L);
    if (!meet.empty && !cu_subset(meet.value, Lp))
        throw validation_error("hypothesis-fails",
                               "the intersection of H with L must lie inside L'");
    return cu_subset(L, Lp);
}

}  // namespace reflecta
