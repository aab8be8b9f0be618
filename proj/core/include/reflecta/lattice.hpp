#pragma once

#include <optional>
#include <map>
#include <vector>

#include "reflecta/ints.hpp"

namespace reflecta {

/// A sublattice of Z^dim, stored as a row-style Hermite normal form basis:
/// row pivots move strictly right, pivots are positive, and entries above a
/// pivot are non-negative and smaller than the pivot.  The basis may have
/// fewer rows than `dim` (non-full-rank lattices are first-class values);
/// an empty row list is the zero lattice.
///
/// The HNF basis is a canonical representative of the lattice, so
/// structural equality is semantic equality.
struct Lattice {
    int dim = 0;
    Mat rows;  // HNF rows; linearly independent

    bool operator==(const Lattice&) const = default;
};

/// Row-style HNF of an arbitrary generating set.  Dependent or duplicate
/// generators are allowed and are compressed away.
/// Errors: empty input (the ambient dimension would be ambiguous),
/// inconsistent row lengths.
Lattice hnf(const Mat& rows);

/// Same as `hnf` but with an explicit ambient dimension so the zero lattice
/// (no generators) is representable.
Lattice hnf_in_dim(int dim, const Mat& rows);

Lattice lattice_zero(int dim);
Lattice lattice_full(int dim);

/// Diagonal lattice d_1 Z x ... x d_n Z.  Entries must be positive.
Lattice lattice_diag(const std::vector<Int>& diag);

int lattice_rank(const Lattice& L);

/// det(M M^t) for the basis matrix M; basis-independent, positive for any
/// non-zero lattice, and equal to the squared covolume.  For the zero
/// lattice the empty product is 1.
Int determinant_sq(const Lattice& L);

/// |det M| for a full-rank lattice (rank == dim).
/// Errors: not full rank.
Int determinant_abs(const Lattice& L);

bool member(const Lattice& L, const Vec& v);

/// Canonical coset representative of v + L: pivot coordinates are reduced
/// into [0, pivot) by back-substitution.  Two vectors are congruent mod L
/// iff their reductions are equal.
Vec reduce_mod(const Lattice& L, Vec v);

/// Coordinates of v in the HNF basis of L, if v lies in L.
std::optional<Vec> coords_in_basis(const Lattice& L, const Vec& v);

bool sublattice_of(const Lattice& inner, const Lattice& outer);

Lattice lat_sum(const Lattice& a, const Lattice& b);
Lattice lat_intersect(const Lattice& a, const Lattice& b);

/// c * L for a non-zero integer c.
Lattice lat_scale(const Lattice& L, const Int& c);

/// A basis a_1..a_n of A together with divisors d_1 | d_2 | ... | d_r such
/// that d_1 a_1, ..., d_r a_r is a basis of the sublattice B (r = rank B).
/// The divisors are the elementary divisors of B inside A.
/// Errors: B not contained in A.
struct StackedBasis {
    Mat basis;                  // rows: basis of A (ambient coordinates)
    std::vector<Int> divisors;  // r positive entries, each dividing the next
};
StackedBasis stacked_basis(const Lattice& A, const Lattice& B);

/// All sublattices of index p (p prime) in L.  There are
/// (p^r - 1)/(p - 1) of them for r = rank L, one per hyperplane of the
/// rank-r space over F_p.
/// Errors: p not prime, L the zero lattice.
std::vector<Lattice> maximal_sublattices(const Lattice& L, const Int& p);

/// For M of prime index p in L, scaling by a prime q lands qL inside M
/// exactly when q = p.  Returns that boolean for the given q.
/// Errors: M not of prime index in L, q not prime.
bool check_lemma_max_sublattice(const Lattice& L, const Lattice& M, const Int& q);

/// The finite abelian group A / M for a full-rank sublattice M of A,
/// materialized as canonical coset representatives with exact arithmetic.
class FiniteQuotient {
public:
    FiniteQuotient(Lattice ambient, Lattice modulus, std::vector<Vec> elements);

    const Lattice& ambient() const { return ambient_; }
    const Lattice& modulus() const { return modulus_; }
    const std::vector<Vec>& elements() const { return elements_; }
    std::size_t order() const { return elements_.size(); }

    /// Canonical representative of v + modulus (v must lie in ambient).
    Vec reduce(const Vec& v) const;

    /// Index of the class of v in `elements`.
    int index_of(const Vec& v) const;

private:
    Lattice ambient_;
    Lattice modulus_;
    std::vector<Vec> elements_;
    std::map<Vec, int> index_;
};

/// Builds A / M.  Errors: M not a sublattice of A, M not full rank in A.
/// Throws budget_error if the index exceeds an internal safety bound.
FiniteQuotient quotient(const Lattice& A, const Lattice& M);

/// Internal building blocks, exposed for reuse and for independent testing.
namespace detail {

/// Row-HNF with optional transform: fills U (unimodular, rows aligned with
/// the output) so that U * input = [H; 0].  Returns the number of non-zero
/// rows (the rank); H rows come first in `work`.
int hnf_rows(Mat& work, Mat* U);

/// Integer row kernel of `rows`: basis of { x : x * rows = 0 }.
Mat kernel(const Mat& rows);

/// Smith normal form of a square-or-rectangular matrix C with tracked
/// transforms: returns diagonal divisors and fills left / right-inverse
/// transforms so that left * C * right = diag and right_inv undoes right.
struct SmithResult {
    std::vector<Int> divisors;  // positive, divisibility chain, rank entries
    Mat left;                   // rows x rows unimodular
    Mat right_inv;              // cols x cols unimodular; right_inv = right^{-1}
};
SmithResult smith(const Mat& C);

}  // namespace detail

}  // namespace reflecta
