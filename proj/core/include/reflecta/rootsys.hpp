#pragma once

/// Exact finite root systems with length classes, reflections, integer
/// pairings, and the maximal-subsystem catalog consumed by the affine
/// classification.
///
/// All realizations live in integer coordinates (half-integer families are
/// rescaled by 2), so every inner product and every Cartan pairing is exact.

#include <string>
#include <vector>

#include "reflecta/ints.hpp"

namespace reflecta {

enum class Family { A, B, C, D, E6, E7, E8, F4, G2, BC };

/// Type label of a finite root system.  The rank is the number of simple
/// roots; for the exceptional families it is fixed by the family.
struct RootSystemType {
    Family family;
    int rank;

    bool operator==(const RootSystemType&) const = default;
};

std::string family_name(Family f);
std::string type_name(const RootSystemType& t);

enum class LengthClass { Short, Long, Divisible };

/// A root in a fixed scaled realization.  `norm_sq` is the squared length in
/// the scaled metric; `length_class` distinguishes short/long roots and, for
/// the non-reduced family, the doubled roots 2ε_i.
struct FiniteRoot {
    Vec coords;
    Int norm_sq;
    LengthClass length_class;
};

/// A finite root system in its standard integer realization.  `roots` is
/// sorted lexicographically by coordinates; indices into it are the canonical
/// root identifiers used throughout the library.
struct FiniteRootSystem {
    RootSystemType type;
    int dim = 0;     ///< ambient coordinate dimension of the realization
    int lacing = 1;  ///< m: 1 (ADE), 2 (B/C/F4), 3 (G2), 4 (non-reduced)
    std::vector<FiniteRoot> roots;
    /// Precomputed action s_α(β) = roots[reflections[α·size()+β]]; building it
    /// certifies pairing integrality and reflection closure.
    std::vector<int> reflections;

    int size() const { return static_cast<int>(roots.size()); }
    /// True when only one non-divisible length class occurs (A/D/E); by
    /// convention such roots are all classed Long.
    bool simply_laced() const { return lacing == 1; }
};

/// A subset of a parent system closed under mutual reflections.
struct FiniteSubsystem {
    const FiniteRootSystem* parent = nullptr;
    std::vector<int> roots;  ///< sorted indices into parent->roots
};

/// Builds the standard realization.  Realizations: A_n in the sum-zero
/// sublattice of Z^{n+1}; B/C/D and the non-reduced family in Z^n via ±ε_i,
/// ±ε_i±ε_j, ±2ε_i; G2 in the sum-zero sublattice of Z³; E6/E7/E8/F4 with
/// doubled integer coordinates.  Throws validation_error on an invalid rank.
FiniteRootSystem build(RootSystemType type);

/// Index of the root with the given coordinates, or -1.
int root_index(const FiniteRootSystem& R, const Vec& coords);

/// Exact inner product of two coordinate vectors.
Int dot(const Vec& a, const Vec& b);

/// Cartan pairing 2(β,α)/(α,α); throws validation_error if it is not an
/// integer (never for two roots of one system).
Int pairing(const Vec& beta, const Vec& alpha);

/// s_α(β) = β − pairing(β,α)·α on coordinate vectors.
Vec reflect_vec(const Vec& alpha, const Vec& beta);

/// Reflection on root indices; the result is always a valid index.
int reflect(const FiniteRootSystem& R, int alpha, int beta);

/// Sorted indices of all roots in the given length class.
std::vector<int> class_roots(const FiniteRootSystem& R, LengthClass c);

/// Smallest subsystem containing `seed`: closes ±seed under mutual
/// reflections.  Returns sorted indices.
std::vector<int> closure(const FiniteRootSystem& R, const std::vector<int>& seed);

/// True when `subset` (sorted indices) is nonempty and closed under mutual
/// reflections.
bool is_finite_subsystem(const FiniteRootSystem& R, const std::vector<int>& subset);

/// True when `subset` is a proper subsystem and adjoining any further root
/// and closing yields all of R.
bool is_finite_maximal(const FiniteRootSystem& R, const std::vector<int>& subset);

/// Validates closure and wraps the subset.
FiniteSubsystem make_subsystem(const FiniteRootSystem& R, std::vector<int> roots);

/// All maximal proper subsystems, deterministically ordered (by size, then
/// lexicographically).  Generated from structural seed families (length-class
/// sets, partition forms for B/C and the non-reduced family, simple-system
/// node deletions with and without the lowest root, for both orientations of
/// the diagram), closed under the reflection action and filtered by the
/// direct maximality test.  Throws validation_error when the rank exceeds
/// `rank_bound`.
std::vector<std::vector<int>> finite_maximal_subsystems(const FiniteRootSystem& R,
                                                        int rank_bound = 8);

/// Ground-truth maximal-subsystem enumeration: closes every subset of a
/// positive system and keeps the inclusion-maximal proper results.  Requires
/// at most `max_positive` positive roots (default 18); throws budget_error
/// beyond that.
std::vector<std::vector<int>> brute_force_maximal_subsystems(const FiniteRootSystem& R,
                                                             int max_positive = 18);

/// Indecomposable positive roots of a nonempty subsystem, with positivity
/// decided by the deterministic functional whose weight on coordinate i is
/// N^(dim−1−i), N = 1 + the largest coordinate magnitude in R.  Every root of
/// the subsystem is an integer combination of the result with signs matching
/// its functional value.
std::vector<int> simple_system(const FiniteRootSystem& R, const std::vector<int>& subset);

/// Functional value used for positivity (nonzero for every root).
Int positivity_value(const FiniteRootSystem& R, const Vec& coords);

}  // namespace reflecta
