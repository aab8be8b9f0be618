#pragma once

/// Brute-force ground truth in a finite quotient: an affine reflection
/// system is reduced modulo a full-rank lattice M chosen so that every
/// translation fiber in play is M-periodic.  In the resulting finite model,
/// reflection closure, maximality of closed subsets, and enumeration of all
/// maximal closed proper subsets are decided exhaustively, independent of
/// the structural classification layer.

#include <boost/dynamic_bitset.hpp>
#include <vector>

#include "reflecta/ars.hpp"

namespace reflecta {

/// A subset of the model's root set, one bit per (finite root, group
/// element) pair, indexed as root * order + element.
using ModelSet = boost::dynamic_bitset<>;

/// Finite image of an affine reflection system.  The translation group is
/// span(lambda_s) / M with M = 2·lacing · (intersection of every base
/// lattice of the instance and all requested extra lattices), which makes
/// every fiber a finite union of group elements and every reflection
/// computation exact.
struct QuotientModel {
    FiniteRootSystem gradient;
    ExtensionDatum datum;
    FiniteQuotient group;
    Lattice modulus;
    int order = 0;

    /// Membership of each group element in the fiber image, per length
    /// class (empty for an absent divisible fiber).
    std::vector<std::vector<char>> class_in;

    /// All valid (root, element) pairs.
    ModelSet full;

    // Precomputed arithmetic. `add_tab` is only populated for small groups;
    // otherwise addition falls back to lattice arithmetic.
    std::vector<int> neg_tab;
    std::vector<int> scale_tab;  // (c+4)*order + g, for pairings c in [-4,4]
    std::vector<int> add_tab;
    std::vector<int> pair_tab;  // pairing(roots[a], roots[b]) as int

    int size() const { return gradient.size(); }
    int index(int root, int element) const { return root * order + element; }
    bool valid(int root, int element) const {
        return full.test(static_cast<std::size_t>(index(root, element)));
    }
    int add(int g, int h) const;
    int scale(int c, int g) const;
};

/// Effective size budget for model construction: `override_` when positive,
/// else the REFLECTA_ORACLE_BUDGET environment variable, else 4096.
long oracle_budget(long override_ = 0);

/// Builds the finite model.  `extra_lattices` are additional periods the
/// modulus must refine (candidate subgroups, offset bases) so that sets
/// built over them are representable.  Throws budget_error when the group
/// order exceeds the budget, and validation_error ("not-periodic") if some
/// fiber fails to be M-periodic.
QuotientModel build_model(const AffineReflectionSystem& parent,
                          const std::vector<Lattice>& extra_lattices = {},
                          long budget = 0);

/// Least reflection-closed superset of `seed`:  repeatedly adds
/// s_{(a,g)}(b,h) = (s_a(b), h − ⟨b,a∨⟩·g) for members (a,g), (b,h).
/// Throws validation_error ("not-a-model-set") if seed has bits outside the
/// model's root set.
ModelSet closure(const QuotientModel& model, ModelSet seed);

/// Whether the closed proper subset S is maximal: every excluded element
/// closes to the full set when adjoined.  Exhaustive (one closure per orbit
/// of the complement under reflections by S).  Throws validation_error
/// ("not-closed" / "not-proper") when the preconditions fail.
bool oracle_is_maximal(const QuotientModel& model, const ModelSet& S);

/// All maximal reflection-closed proper subsets of the model, deterministic
/// order.  Fast seeding generates candidates per gradient (the full gradient
/// plus every finite maximal subsystem) from subgroup/coset fiber patterns
/// and their consistent translations, with an exact maximality filter; a
/// completion loop then searches exhaustively for any closed proper set not
/// below a listed one (such a set exists exactly when the list is still
/// incomplete) and grows every find into a further maximal set, so the
/// returned list is complete, not heuristically so.
/// Requires gradient rank ≤ 3 (validation_error "rank-bound") and stays
/// within the work budget (budget_error).
std::vector<ModelSet> oracle_enumerate_maximal(const QuotientModel& model);

/// Image of a fibered subsystem in the model.  Every fiber of the spec must
/// be M-periodic (validation_error "not-periodic" otherwise — pass the
/// offset bases as extra lattices when building the model).
ModelSet model_set_of_spec(const QuotientModel& model, const SubsystemSpec& spec);

/// Bit index of a real root in the model, or -1 when the finite part is
/// unknown, the translation lies outside the modeled span, or the pair is
/// not a model root.
int model_index_of(const QuotientModel& model, const AffineRoot& root);

/// The real root represented by a model bit (canonical translation
/// representative).
AffineRoot model_lift(const QuotientModel& model, int bit_index);

}  // namespace reflecta
