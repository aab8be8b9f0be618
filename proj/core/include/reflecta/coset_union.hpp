#pragma once

#include <vector>

#include "reflecta/lattice.hpp"

namespace reflecta {

/// A finite union of cosets of a base lattice: { r + base : r in reps }.
/// Representatives are stored canonically (reduced mod base, deduplicated,
/// sorted), so two values with the same base are extensionally equal iff
/// they are structurally equal.  The base can have any rank, including
/// zero (a plain finite set of vectors).
struct CosetUnion {
    int dim = 0;
    Lattice base;
    std::vector<Vec> reps;

    bool operator==(const CosetUnion&) const = default;
};

/// Canonicalizing constructor.  Errors: dimension mismatches, empty rep
/// list (the empty set is not a representable value).
CosetUnion coset_union(const std::vector<Vec>& reps, const Lattice& base);

/// The lattice itself as a one-coset union (representative 0).
CosetUnion cu_full(const Lattice& L);

bool cu_contains(const CosetUnion& a, const Vec& v);

/// Re-expresses `a` over a finer base contained in a's base.  The number of
/// representatives multiplies by the index of the refinement.
/// Throws budget_error if that expansion would be unreasonably large.
CosetUnion cu_rebase(const CosetUnion& a, const Lattice& finer);

CosetUnion cu_minkowski(const CosetUnion& a, const CosetUnion& b);
CosetUnion cu_negate(const CosetUnion& a);
CosetUnion cu_translate(const CosetUnion& a, const Vec& t);
CosetUnion cu_scale(const CosetUnion& a, const Int& c);  // c non-zero

bool cu_subset(const CosetUnion& a, const CosetUnion& b);
bool cu_equal(const CosetUnion& a, const CosetUnion& b);

/// Intersection; the empty intersection is reported via the boolean, since
/// the empty set has no CosetUnion encoding.
struct CosetUnionOrEmpty {
    bool empty = true;
    CosetUnion value;  // meaningful only when !empty
};
CosetUnionOrEmpty cu_intersect(const CosetUnion& a, const CosetUnion& b);

/// Whether the union is a subgroup of (Z^dim, +): contains 0, closed under
/// addition and negation.
bool cu_is_group(const CosetUnion& a);

/// The subgroup generated by the union: base + Z-span of the reps.
Lattice cu_span(const CosetUnion& a);

/// Hypothesis check for unions of cosets of 2*Lambda: given 0-containing
/// unions L and Lp of cosets of 2*Lambda, and a sublattice H of Lambda of
/// odd prime index whose intersection with L lies inside Lp, the whole of
/// L lies inside Lp (and Lp has at least as many cosets as L).  Returns
/// the conclusion L <= Lp.
/// Errors (distinct codes): H of non-prime index, H of index two,
/// 0 missing from L or Lp, unions not stable under 2*Lambda translation,
/// hypothesis intersection not contained in Lp.
bool check_key_lemma(const Lattice& Lambda, const CosetUnion& L, const CosetUnion& Lp,
                     const Lattice& H);

}  // namespace reflecta
