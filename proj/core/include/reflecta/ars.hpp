#pragma once

/// Affine reflection systems: a finite gradient system together with fiber
/// data (one coset union per length class) describing which translations are
/// attached to each root.  This header provides datum validation, affine
/// reflections, duality, linear base-point functions on root fibers, and the
/// fibered-subsystem checker used by the classification layers.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reflecta/coset_union.hpp"
#include "reflecta/rootsys.hpp"

namespace reflecta {

/// Translation fibers of an affine system over a finite gradient, all living
/// in Z^nullity.  `lambda_s` / `lambda_ell` are attached to the short / long
/// length classes (for a single-length gradient the two must agree and all
/// roots read the long slot); `lambda_d` exists exactly for the non-reduced
/// family and, unlike the others, need not contain zero.  `lambda0` is the
/// fiber over 0 (the isotropic directions); it is carried and serialized but
/// plays no role in real-root subsystem computations.
struct ExtensionDatum {
    int nullity = 0;
    Lattice lambda0;
    CosetUnion lambda_s;
    CosetUnion lambda_ell;
    std::optional<CosetUnion> lambda_d;
};

/// Outcome of checking a datum against a gradient.  `violations` holds one
/// stable identifier per failed requirement, e.g. "lambda_s+lambda_ell" for
/// the additive relation Λs + Λℓ ⊆ Λs, "lambda_ell+2*lambda_s" for
/// Λℓ + 2Λs ⊆ Λℓ, "mild-assumption" for the rank-2 subgroup requirement,
/// "span" for the full-rank requirement on the union of all fibers.
struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Checks every additive relation the reflection action imposes between the
/// class fibers (derived pair-by-pair from the gradient's actual Cartan
/// pairings, so class triples and the non-reduced cross relations are covered
/// exactly), zero membership for the non-divisible fibers, presence/absence
/// of `lambda_d`, the rank-2 subgroup requirement, and the spanning
/// condition.  Relation failures are reported, not thrown.
ValidationReport validate_datum(const FiniteRootSystem& gradient, const ExtensionDatum& datum);

/// A finite gradient plus validated fiber data.  Construct via `make_system`.
struct AffineReflectionSystem {
    FiniteRootSystem gradient;
    ExtensionDatum datum;

    int nullity() const { return datum.nullity; }
};

/// Validates and assembles.  Throws validation_error (code "invalid-datum",
/// message listing the violations) when validation fails.
AffineReflectionSystem make_system(FiniteRootSystem gradient, ExtensionDatum datum);

/// Fiber of the given length class.  Throws validation_error when the
/// divisible fiber is requested but absent.
const CosetUnion& lambda_for(const ExtensionDatum& datum, LengthClass c);

/// A real root of an affine system: a gradient root plus a translation.
struct AffineRoot {
    FiniteRoot finite_part;
    Vec translation;

    bool operator==(const AffineRoot& o) const {
        return finite_part.coords == o.finite_part.coords && translation == o.translation;
    }
};

/// Convenience constructor resolving the gradient root by coordinates.
/// Throws validation_error ("not-a-root") for unknown coordinates.
AffineRoot affine_root(const FiniteRootSystem& gradient, const Vec& finite_coords,
                       Vec translation);

/// s_a(b) for real roots: the finite parts reflect as usual and the
/// translation becomes  tr(b) − ⟨b, a∨⟩ · tr(a).
/// Throws validation_error ("not-a-root") if a finite part does not belong
/// to `gradient`.
AffineRoot reflect_affine(const FiniteRootSystem& gradient, const AffineRoot& a,
                          const AffineRoot& b);

/// Whether `r` is a real root of `A`, i.e. its translation lies in the fiber
/// of its length class.
bool in_real_roots(const AffineReflectionSystem& A, const AffineRoot& r);

/// Type of the dual gradient: B and C swap, every other family is its own
/// dual.
RootSystemType dual_type(const RootSystemType& t);

/// Dual system in the integral convention: the short fiber of the dual is
/// the old long fiber, the long fiber of the dual is m times the old short
/// fiber, and the zero fiber is scaled by m (m = lacing).  Applying `dual`
/// twice scales every fiber by m.  Throws validation_error
/// ("non-reduced-dual") for a non-reduced gradient.
AffineReflectionSystem dual(const AffineReflectionSystem& A);

/// A Z-linear base-point function on the roots of a finite subsystem,
/// determined by its values on a simple system and extended through the
/// reflection recurrence  p(s_a(b)) = p(b) − ⟨b, a∨⟩ p(a).
///
/// Divisible roots are special: when short roots are present their base
/// points are either the doubled short values (default) or, when an
/// independent seed value is supplied for one divisible root, the values
/// obtained by transporting that seed along long-root reflections only.
/// The seed makes the divisible layer genuinely independent of the short
/// layer (its offset 2·p(ε) − p(2ε) is the same for every axis).
class PFunction {
public:
    const FiniteSubsystem& domain() const { return domain_; }
    const std::vector<int>& simple_roots() const { return simple_roots_; }
    const std::vector<Vec>& simple_values() const { return simple_values_; }
    const std::optional<std::pair<int, Vec>>& divisible_seed() const { return seed_; }

    bool defined_at(int root_index) const;
    /// Value at a domain root (by parent root index).  Throws
    /// validation_error ("p-undefined") outside the domain.
    const Vec& value_at(int root_index) const;

private:
    friend PFunction extend_p(const FiniteSubsystem& domain, std::vector<int> simple_roots,
                              std::vector<Vec> values,
                              std::optional<std::pair<int, Vec>> divisible_seed);
    friend PFunction p_from_table(FiniteSubsystem domain, std::vector<std::optional<Vec>> table,
                                  std::vector<int> simple_roots, std::vector<Vec> simple_values,
                                  std::optional<std::pair<int, Vec>> seed, bool verify_nd_only);

    FiniteSubsystem domain_;
    std::vector<int> simple_roots_;
    std::vector<Vec> simple_values_;
    std::optional<std::pair<int, Vec>> seed_;
    std::vector<std::optional<Vec>> table_;  // indexed by parent root index
};

/// Builds the function from values on a simple system of `domain` (indices
/// into the parent system; one value per simple root).  Propagation covers
/// the whole domain and re-derivations along different reflection paths are
/// compared, so an inconsistent input cannot slip through.
/// Errors (validation_error): "value-count", "not-in-domain",
/// "not-a-simple-system" (propagation does not reach the whole domain),
/// "inconsistent-values", "seed-not-divisible", "seed-unsupported" (seed
/// given on a divisible root whose halved root is absent, so the value
/// belongs on the simple system instead).
PFunction extend_p(const FiniteSubsystem& domain, std::vector<int> simple_roots,
                   std::vector<Vec> values,
                   std::optional<std::pair<int, Vec>> divisible_seed = std::nullopt);

/// Assembles a function from an explicit value table (one entry per domain
/// root) and re-verifies the reflection recurrence on it.  Used by duality,
/// which transforms values rather than re-propagating them.  When
/// `verify_nd_only` is set the recurrence is only enforced where it is
/// required (outside the short/divisible interplay).
PFunction p_from_table(FiniteSubsystem domain, std::vector<std::optional<Vec>> table,
                       std::vector<int> simple_roots, std::vector<Vec> simple_values,
                       std::optional<std::pair<int, Vec>> seed, bool verify_nd_only);

/// Fiber prescription for one length class of a fibered subsystem: either
/// the marker "use the parent fiber as a whole" or an explicit coset union
/// of translation offsets (added to the base point of each root).
struct YData {
    std::optional<CosetUnion> set;  // nullopt: the whole parent fiber

    static YData full() { return {}; }
    static YData of(CosetUnion cu) {
        YData y;
        y.set = std::move(cu);
        return y;
    }
    bool is_full() const { return !set.has_value(); }
};

/// A candidate fibered subsystem of an affine system: a gradient subsystem,
/// a base-point function, and per-class offset data.  The root set described
/// is  { α ⊕ y : y ∈ Y(α) }  with  Y(α) = parent fiber of α's class when the
/// class is marked full, and  Y(α) = p(α) + offsets  otherwise.
/// `family_tag` is caller-owned metadata naming the construction recipe
/// ("adhoc" when none applies); it is carried, never interpreted.
struct SubsystemSpec {
    std::shared_ptr<const AffineReflectionSystem> parent;
    FiniteSubsystem gradient_sub;
    PFunction p;
    YData y_s = YData::full();
    YData y_ell = YData::full();
    YData y_d = YData::full();
    std::string family_tag = "adhoc";
};

/// Shared-ownership wrapper used by spec factories.
std::shared_ptr<const AffineReflectionSystem> share(AffineReflectionSystem A);

/// The whole system as a spec: full gradient, zero base points, full fibers.
SubsystemSpec full_spec(std::shared_ptr<const AffineReflectionSystem> parent);

/// Full-fiber lift of a gradient subsystem: every root keeps its entire
/// parent fiber.  `roots` are parent root indices forming a subsystem.
SubsystemSpec full_fiber_spec(std::shared_ptr<const AffineReflectionSystem> parent,
                              std::vector<int> roots);

/// The effective fiber of one root of a spec (class fiber when marked full,
/// translated offsets otherwise).
CosetUnion fiber_of(const SubsystemSpec& spec, int root_index);

/// The gradient subsystem of a spec, i.e. the finite parts that occur.
/// Throws validation_error ("gradient-not-closed") when the stored root set
/// is not reflection-closed.
FiniteSubsystem gradient_of(const SubsystemSpec& spec);

/// Whether the described root set is a genuine root subsystem: the gradient
/// part is reflection-closed, every fiber sits inside the parent fiber of
/// its class, base points lie in their fibers (offset data contains zero),
/// and all fibers are closed under the affine reflection transport
/// Y(β) − ⟨β,α∨⟩·Y(α) ⊆ Y(s_α(β)), checked exactly on coset unions.
bool is_subsystem(const SubsystemSpec& spec);

/// Whether one real root belongs to the set described by the spec.
bool membership(const SubsystemSpec& spec, const AffineRoot& root);

/// Dual of a spec over the dual parent: gradient roots are dualized, length
/// classes swap, and base points / offsets at a root scale by m for a short
/// original root and are kept for a long one (the same convention as
/// `dual`).  The result is a subsystem of the dual system exactly when the
/// input is one of the original.  The family tag is carried through
/// unchanged.  Throws validation_error ("non-reduced-dual") for non-reduced
/// parents.
SubsystemSpec dual_spec(const SubsystemSpec& spec);

/// A subsystem candidate of a product of affine systems, one part per
/// component (each part self-contained over its own parent).
struct ProductSpec {
    std::vector<SubsystemSpec> parts;
};

/// All parts are subsystems of their components.
bool is_subsystem(const ProductSpec& spec);

}  // namespace reflecta
