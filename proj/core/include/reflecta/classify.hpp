#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reflecta/ars.hpp"

namespace reflecta {

/// Construction recipes for the maximal subsystems of an irreducible affine
/// reflection system, grouped by the shape of the gradient:
///
///   L4_1_*  — full-gradient forms when the gradient is not of type B
///             (simply laced, F4, G2, and C with the long roots restricted),
///   T4_3_*  — full-fiber lifts of maximal gradient subsystems, same scope,
///   L5_1_*  — full-gradient forms for gradients of type B,
///   T5_3_*  — gradient lifts for type B,
///   NR_*    — the non-reduced (type BC) forms.
enum class FamilyId {
    L4_1_1,
    L4_1_2,
    L4_1_3,
    T4_3_2a,
    T4_3_2b,
    T4_3_2c,
    L5_1_1,
    L5_1_2,
    L5_1_3,
    T5_3_2a,
    T5_3_2b,
    NR_AJ,
    NR_PhiC,
    NR_PhiC_ext,
    NR_BI,
    NR_PhiB_ext,
    NR_P6_5_1,
    NR_P6_5_2,
    NR_P6_5_3a,
    NR_P6_5_3b,
};

/// Stable ASCII tag, e.g. "L4_1_3".
std::string family_tag(FamilyId id);

/// Inverse of family_tag.
std::optional<FamilyId> family_from_tag(const std::string& tag);

/// All twenty family ids in declaration order.
const std::vector<FamilyId>& all_families();

/// Whether every instance of the family is closed under root addition
/// (alpha, beta in the subsystem and alpha+beta a root imply alpha+beta in
/// the subsystem).  This is a theorem about the catalogue; is_closed()
/// recomputes the property per instance and must agree.
bool closedness_expected(FamilyId id);

/// The family that describes the image of an instance under dualisation,
/// given the type of the original (reduced) gradient.  Throws
/// validation_error("non-reduced-dual") for BC families.
FamilyId dual_family(FamilyId id, const RootSystemType& gradient_type);

/// Parameters for construct().  Which members are read depends on the
/// family; unread members are ignored.
struct FamilyParams {
    /// Coset-union parameter: the restricted-class offset set.
    std::optional<CosetUnion> S;
    /// Subgroup parameter.
    std::optional<Lattice> H;
    /// Axis subset for NR_AJ, values in [0, rank).
    std::vector<int> J;
    /// Parent root indices of the gradient subsystem for the lift families.
    std::vector<int> gradient_roots;
    /// Values of the base-point function on the simple system of the full
    /// gradient (empty: all zero).
    std::vector<Vec> p_simple_values;
    /// Base point for the divisible layer, used by the NR_* families whose
    /// divisible fibers are not full.  The value is anchored at the
    /// divisible root sitting over the short simple root.
    std::optional<Vec> p_divisible_seed;
    /// Divisible-class offset set for NR_P6_5_3b; for NR_PhiB_ext the
    /// offsets of the retained cosets relative to the seed.
    std::optional<CosetUnion> Yd;
};

/// Builds the instance of `family` over `parent` described by `params`.
/// Throws validation_error with a named reason when a hypothesis of the
/// family fails (for example "lambda_ell = m*lambda_s excludes L4_1_1"),
/// and verifies the result is a proper subsystem before returning it.
SubsystemSpec construct(std::shared_ptr<const AffineReflectionSystem> parent, FamilyId family,
                        const FamilyParams& params);

/// Tri-state certificate.
enum class Cert { Verified, Undecided, Refuted };

std::string cert_name(Cert c);

/// Exhaustive maximality check through the finite quotient model.  Returns
/// Undecided when the model exceeds the budget — never a wrong boolean.
/// Refuted covers both "not maximal" and "not proper".
Cert is_maximal(const SubsystemSpec& spec, long budget = 0);

/// Closure under root addition, with every violating sum reported as a
/// canonical representative (deduplicated, deterministically ordered).
struct ClosednessReport {
    bool closed = true;
    std::vector<AffineRoot> witnesses;
};

ClosednessReport is_closed(const SubsystemSpec& spec, long budget = 0);

/// Which side of dualisation is closed.
enum class DualClosedness { ClosedHere, ClosedInDual, Both };

/// Evaluates is_closed on the spec and on its dual.  Requires a reduced
/// parent (throws validation_error("non-reduced-dual") otherwise); throws
/// validation_error("neither-closed") if both sides fail, which cannot
/// happen for a maximal subsystem.
DualClosedness closed_or_dual_closed(const SubsystemSpec& spec, long budget = 0);

/// One catalogue entry produced by enumerate_maximal.
struct EnumeratedSpec {
    SubsystemSpec spec;
    Cert cert = Cert::Undecided;
};

/// Per-family description of the parameter space, including whether the
/// family is exhausted or truncated at the prime bound.
struct FamilyDescriptor {
    std::string tag;
    std::string parameter;
    bool truncated_at_prime_bound = false;
};

struct EnumerationReport {
    std::vector<EnumeratedSpec> specs;
    std::vector<FamilyDescriptor> families;
    std::vector<std::string> notes;
};

/// Enumerates the maximal subsystems of `parent`: every family is
/// instantiated over all admissible parameters, with subgroup parameters of
/// unbounded prime index cut off at `prime_bound` and base-point functions
/// ranging over a transversal of the coarsest common refinement of the
/// instance's lattices (at most `p_value_bound` assignments; exceeding the
/// cap raises budget_error).  Results are deduplicated extensionally,
/// certified through the quotient model, and deterministically ordered.
/// Candidates the model refutes are dropped and reported in `notes`.
/// Requires a valid parent whose gradient is not of type A1.
EnumerationReport enumerate_maximal(std::shared_ptr<const AffineReflectionSystem> parent,
                                    const Int& prime_bound, long p_value_bound = 200000,
                                    long budget = 0);

}  // namespace reflecta
