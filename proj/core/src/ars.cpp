#include "reflecta/ars.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "reflecta/errors.hpp"

namespace reflecta {

namespace {

Vec vec_scale(const Int& c, const Vec& v) {
    Vec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = c * v[i];
    return r;
}

const char* class_letter(LengthClass c) {
    switch (c) {
        case LengthClass::Short: return "s";
        case LengthClass::Long: return "ell";
        case LengthClass::Divisible: return "d";
    }
    return "?";
}

std::string rel_name(LengthClass b, LengthClass a, const Int& c_abs) {
    std::ostringstream os;
    os << "lambda_" << class_letter(b) << "+";
    if (c_abs != 1) os << c_abs << "*";
    os << "lambda_" << class_letter(a);
    return os.str();
}

/// Λb + c·Λa ⊆ Λb, exactly.
bool additive_relation_holds(const CosetUnion& lb, const CosetUnion& la, const Int& c) {
    return cu_subset(cu_minkowski(lb, cu_scale(la, c)), lb);
}

}  // namespace

ValidationReport validate_datum(const FiniteRootSystem& gradient, const ExtensionDatum& datum) {
    ValidationReport report;
    auto flag = [&](const std::string& name) {
        if (std::find(report.violations.begin(), report.violations.end(), name) ==
            report.violations.end())
            report.violations.push_back(name);
    };

    const int k = datum.nullity;
    bool dims_ok = k >= 0 && datum.lambda0.dim == k && datum.lambda_s.dim == k &&
                   datum.lambda_ell.dim == k &&
                   (!datum.lambda_d || datum.lambda_d->dim == k);
    if (!dims_ok) {
        report.violations.push_back("dimension-mismatch");
        return report;
    }

    const bool non_reduced = gradient.type.family == Family::BC;
    if (non_reduced && !datum.lambda_d) flag("lambda_d-missing");
    if (!non_reduced && datum.lambda_d) flag("lambda_d-unexpected");

    if (!cu_contains(datum.lambda_s, vec_zero(k))) flag("zero-not-in-lambda_s");
    if (!cu_contains(datum.lambda_ell, vec_zero(k))) flag("zero-not-in-lambda_ell");

    auto lambda_of = [&](LengthClass c) -> const CosetUnion* {
        switch (c) {
            case LengthClass::Short: return &datum.lambda_s;
            case LengthClass::Long: return &datum.lambda_ell;
            case LengthClass::Divisible:
                return datum.lambda_d ? &*datum.lambda_d : nullptr;
        }
        return nullptr;
    };

    // Every additive relation between class fibers that the reflection
    // action realizes on this gradient, collected pair by pair:
    // s_a(b) = b - <b,a~>a forces Λ(b) - <b,a~>·Λ(a) ⊆ Λ(b), since
    // reflections preserve length classes.
    std::map<std::tuple<int, int, Int>, std::set<Int>> grouped;
    for (const auto& rb : gradient.roots) {
        for (const auto& ra : gradient.roots) {
            Int c = pairing(rb.coords, ra.coords);
            if (c == 0) continue;
            grouped[{static_cast<int>(rb.length_class), static_cast<int>(ra.length_class),
                     abs(c)}]
                .insert(c);
        }
    }
    // A single-length gradient realizes no cross-class pairs; the two
    // reduced fiber slots are still required to be consistent with each
    // other, which for lacing 1 pins them equal.
    if (gradient.simply_laced()) {
        if (!additive_relation_holds(datum.lambda_s, datum.lambda_ell, 1) ||
            !additive_relation_holds(datum.lambda_s, datum.lambda_ell, -1))
            flag("lambda_s+lambda_ell");
        if (!additive_relation_holds(datum.lambda_ell, datum.lambda_s, 1) ||
            !additive_relation_holds(datum.lambda_ell, datum.lambda_s, -1))
            flag("lambda_ell+lambda_s");
    }
    for (const auto& [key, signed_cs] : grouped) {
        auto [cb, ca, cabs] = key;
        const CosetUnion* lb = lambda_of(static_cast<LengthClass>(cb));
        const CosetUnion* la = lambda_of(static_cast<LengthClass>(ca));
        if (lb == nullptr || la == nullptr) continue;  // absent divisible fiber
        for (const Int& c : signed_cs) {
            if (!additive_relation_holds(*lb, *la, -c)) {
                flag(rel_name(static_cast<LengthClass>(cb), static_cast<LengthClass>(ca), cabs));
                break;
            }
        }
    }

    // Rank-2 two-length gradients leave the subgroup property of one slot
    // undetermined by the relations above, so it is imposed: the fiber
    // carried by the class ±ε_i±ε_j (the one whose members are pairwise
    // non-orthogonal only across classes) must be a group.
    if (gradient.type.rank == 2) {
        if (gradient.type.family == Family::B || gradient.type.family == Family::BC) {
            if (!cu_is_group(datum.lambda_ell)) flag("mild-assumption");
        } else if (gradient.type.family == Family::C) {
            if (!cu_is_group(datum.lambda_s)) flag("mild-assumption");
        }
    }

    Lattice span = lat_sum(cu_span(datum.lambda_s), cu_span(datum.lambda_ell));
    if (datum.lambda_d) span = lat_sum(span, cu_span(*datum.lambda_d));
    span = lat_sum(span, datum.lambda0);
    if (lattice_rank(span) != k) flag("span");

    return report;
}

AffineReflectionSystem make_system(FiniteRootSystem gradient, ExtensionDatum datum) {
    ValidationReport report = validate_datum(gradient, datum);
    if (!report.ok()) {
        std::ostringstream os;
        os << "extension datum rejected:";
        for (const auto& v : report.violations) os << " " << v;
        throw validation_error("invalid-datum", os.str());
    }
    return AffineReflectionSystem{std::move(gradient), std::move(datum)};
}

const CosetUnion& lambda_for(const ExtensionDatum& datum, LengthClass c) {
    switch (c) {
        case LengthClass::Short: return datum.lambda_s;
        case LengthClass::Long: return datum.lambda_ell;
        case LengthClass::Divisible:
            if (!datum.lambda_d)
                throw validation_error("lambda_d-missing",
                                       "divisible fiber requested from a reduced datum");
            return *datum.lambda_d;
    }
    throw validation_error("spec-structure", "unknown length class");
}

AffineRoot affine_root(const FiniteRootSystem& gradient, const Vec& finite_coords,
                       Vec translation) {
    int idx = root_index(gradient, finite_coords);
    if (idx < 0) throw validation_error("not-a-root", "unknown gradient root coordinates");
    return AffineRoot{gradient.roots[static_cast<std::size_t>(idx)], std::move(translation)};
}

AffineRoot reflect_affine(const FiniteRootSystem& gradient, const AffineRoot& a,
                          const AffineRoot& b) {
    int ia = root_index(gradient, a.finite_part.coords);
    int ib = root_index(gradient, b.finite_part.coords);
    if (ia < 0 || ib < 0)
        throw validation_error("not-a-root", "finite part not a root of the gradient");
    if (a.translation.size() != b.translation.size())
        throw validation_error("spec-structure", "translation dimensions differ");
    int it = reflect(gradient, ia, ib);
    Int c = pairing(b.finite_part.coords, a.finite_part.coords);
    Vec tr = vec_sub(b.translation, vec_scale(c, a.translation));
    return AffineRoot{gradient.roots[static_cast<std::size_t>(it)], std::move(tr)};
}

bool in_real_roots(const AffineReflectionSystem& A, const AffineRoot& r) {
    int idx = root_index(A.gradient, r.finite_part.coords);
    if (idx < 0) return false;
    const CosetUnion& fiber =
        lambda_for(A.datum, A.gradient.roots[static_cast<std::size_t>(idx)].length_class);
    return cu_contains(fiber, r.translation);
}

RootSystemType dual_type(const RootSystemType& t) {
    RootSystemType d = t;
    if (t.family == Family::B)
        d.family = Family::C;
    else if (t.family == Family::C)
        d.family = Family::B;
    return d;
}

AffineReflectionSystem dual(const AffineReflectionSystem& A) {
    if (A.gradient.type.family == Family::BC)
        throw validation_error("non-reduced-dual",
                               "duality is undefined for the non-reduced family");
    const Int m = A.gradient.lacing;
    ExtensionDatum d;
    d.nullity = A.datum.nullity;
    d.lambda0 = lat_scale(A.datum.lambda0, m);
    d.lambda_s = A.datum.lambda_ell;
    d.lambda_ell = cu_scale(A.datum.lambda_s, m);
    return make_system(build(dual_type(A.gradient.type)), std::move(d));
}

// ---------------------------------------------------------------------------
// Base-point functions
// ---------------------------------------------------------------------------

namespace {

/// Index of the halved root for a divisible root, or -1.
int half_index(const FiniteRootSystem& R, const FiniteRoot& r) {
    if (r.length_class != LengthClass::Divisible) return -1;
    Vec half(r.coords.size());
    for (std::size_t i = 0; i < r.coords.size(); ++i) half[i] = r.coords[i] / 2;
    return root_index(R, half);
}

struct EdgePolicy {
    const FiniteRootSystem* R = nullptr;
    std::vector<char> in_domain;   // by parent root index
    std::vector<char> paired;      // divisible root whose half is in the domain

    /// Whether transporting the value of `b` with reflector `a` is part of
    /// the defining recurrence.  Divisible roots with their half present are
    /// kept independent of the short layer: their values travel only along
    /// long reflectors, and they are never used as reflectors themselves.
    bool allowed(int b, int a) const {
        const auto& rb = (*R).roots[static_cast<std::size_t>(b)];
        const auto& ra = (*R).roots[static_cast<std::size_t>(a)];
        if (ra.length_class == LengthClass::Divisible && paired[static_cast<std::size_t>(a)])
            return false;
        if (rb.length_class == LengthClass::Divisible && paired[static_cast<std::size_t>(b)])
            return ra.length_class == LengthClass::Long;
        return true;
    }
};

EdgePolicy make_policy(const FiniteSubsystem& domain) {
    EdgePolicy pol;
    pol.R = domain.parent;
    pol.in_domain.assign(static_cast<std::size_t>(domain.parent->size()), 0);
    for (int i : domain.roots) pol.in_domain[static_cast<std::size_t>(i)] = 1;
    pol.paired.assign(pol.in_domain.size(), 0);
    for (int i : domain.roots) {
        int h = half_index(*domain.parent, domain.parent->roots[static_cast<std::size_t>(i)]);
        if (h >= 0 && pol.in_domain[static_cast<std::size_t>(h)])
            pol.paired[static_cast<std::size_t>(i)] = 1;
    }
    return pol;
}

/// One full pass verifying the recurrence on every admissible pair.
void verify_table(const FiniteSubsystem& domain, const EdgePolicy& pol,
                  const std::vector<std::optional<Vec>>& table, bool nd_only) {
    const FiniteRootSystem& R = *domain.parent;
    for (int b : domain.roots) {
        for (int a : domain.roots) {
            if (nd_only &&
                (R.roots[static_cast<std::size_t>(b)].length_class == LengthClass::Divisible ||
                 R.roots[static_cast<std::size_t>(a)].length_class == LengthClass::Divisible))
                continue;
            if (!pol.allowed(b, a)) continue;
            int t = reflect(R, a, b);
            Int c = pairing(R.roots[static_cast<std::size_t>(b)].coords,
                            R.roots[static_cast<std::size_t>(a)].coords);
            Vec expect = vec_sub(*table[static_cast<std::size_t>(b)],
                                 vec_scale(c, *table[static_cast<std::size_t>(a)]));
            if (expect != *table[static_cast<std::size_t>(t)])
                throw validation_error("inconsistent-values",
                                       "value propagation disagrees between reflection paths");
        }
    }
}

}  // namespace

bool PFunction::defined_at(int root_index) const {
    return root_index >= 0 && root_index < static_cast<int>(table_.size()) &&
           table_[static_cast<std::size_t>(root_index)].has_value();
}

const Vec& PFunction::value_at(int root_index) const {
    if (!defined_at(root_index))
        throw validation_error("p-undefined", "base point requested outside the domain");
    return *table_[static_cast<std::size_t>(root_index)];
}

PFunction extend_p(const FiniteSubsystem& domain, std::vector<int> simple_roots,
                   std::vector<Vec> values,
                   std::optional<std::pair<int, Vec>> divisible_seed) {
    if (domain.parent == nullptr)
        throw validation_error("spec-structure", "domain has no parent system");
    const FiniteRootSystem& R = *domain.parent;
    if (simple_roots.size() != values.size())
        throw validation_error("value-count", "one value per simple root is required");
    if (simple_roots.empty())
        throw validation_error("value-count", "at least one simple root is required");

    EdgePolicy pol = make_policy(domain);
    for (int s : simple_roots)
        if (s < 0 || s >= R.size() || !pol.in_domain[static_cast<std::size_t>(s)])
            throw validation_error("not-in-domain", "simple root outside the domain");

    std::size_t dim = values.front().size();
    for (const Vec& v : values)
        if (v.size() != dim)
            throw validation_error("value-count", "values must share one dimension");

    std::vector<std::optional<Vec>> table(static_cast<std::size_t>(R.size()));
    std::vector<int> work;
    auto assign = [&](int idx, Vec v) {
        auto& slot = table[static_cast<std::size_t>(idx)];
        if (slot) {
            if (*slot != v)
                throw validation_error("inconsistent-values",
                                       "value propagation disagrees between reflection paths");
            return;
        }
        slot = std::move(v);
        work.push_back(idx);
    };
    for (std::size_t i = 0; i < simple_roots.size(); ++i) assign(simple_roots[i], values[i]);

    // Propagate over the reflection action of the simple system, skipping the
    // short/divisible interplay (those values are filled below).
    while (!work.empty()) {
        int b = work.back();
        work.pop_back();
        for (int a : simple_roots) {
            if (!pol.allowed(b, a)) continue;
            int t = reflect(R, a, b);
            Int c = pairing(R.roots[static_cast<std::size_t>(b)].coords,
                            R.roots[static_cast<std::size_t>(a)].coords);
            assign(t, vec_sub(*table[static_cast<std::size_t>(b)],
                              vec_scale(c, *table[static_cast<std::size_t>(a)])));
        }
    }

    // The independent divisible layer: transport the seed along long
    // reflectors; everything still unset defaults to the doubled short value.
    if (divisible_seed) {
        int s0 = divisible_seed->first;
        if (s0 < 0 || s0 >= R.size() || !pol.in_domain[static_cast<std::size_t>(s0)])
            throw validation_error("not-in-domain", "seed root outside the domain");
        if (R.roots[static_cast<std::size_t>(s0)].length_class != LengthClass::Divisible)
            throw validation_error("seed-not-divisible", "seed must sit on a divisible root");
        if (!pol.paired[static_cast<std::size_t>(s0)])
            throw validation_error(
                "seed-unsupported",
                "an independent seed needs the halved root in the domain; give the value "
                "on the simple system instead");
        if (divisible_seed->second.size() != dim)
            throw validation_error("value-count", "seed value dimension mismatch");
        assign(s0, divisible_seed->second);
        while (!work.empty()) {
            int b = work.back();
            work.pop_back();
            for (int a : domain.roots) {
                if (R.roots[static_cast<std::size_t>(a)].length_class != LengthClass::Long)
                    continue;
                int t = reflect(R, a, b);
                Int c = pairing(R.roots[static_cast<std::size_t>(b)].coords,
                                R.roots[static_cast<std::size_t>(a)].coords);
                assign(t, vec_sub(*table[static_cast<std::size_t>(b)],
                                  vec_scale(c, *table[static_cast<std::size_t>(a)])));
            }
        }
    }
    for (int i : domain.roots) {
        if (table[static_cast<std::size_t>(i)]) continue;
        if (pol.paired[static_cast<std::size_t>(i)]) {
            int h = half_index(R, R.roots[static_cast<std::size_t>(i)]);
            const auto& hv = table[static_cast<std::size_t>(h)];
            if (hv) {
                table[static_cast<std::size_t>(i)] = vec_scale(Int(2), *hv);
                continue;
            }
        }
        throw validation_error("not-a-simple-system",
                               "propagation from the given roots does not cover the domain");
    }

    verify_table(domain, pol, table, false);

    PFunction p;
    p.domain_ = domain;
    p.simple_roots_ = std::move(simple_roots);
    p.simple_values_ = std::move(values);
    p.seed_ = std::move(divisible_seed);
    p.table_ = std::move(table);
    return p;
}

PFunction p_from_table(FiniteSubsystem domain, std::vector<std::optional<Vec>> table,
                       std::vector<int> simple_roots, std::vector<Vec> simple_values,
                       std::optional<std::pair<int, Vec>> seed, bool verify_nd_only) {
    if (domain.parent == nullptr)
        throw validation_error("spec-structure", "domain has no parent system");
    if (static_cast<int>(table.size()) != domain.parent->size())
        throw validation_error("value-count", "table must cover the parent root list");
    for (int i : domain.roots)
        if (!table[static_cast<std::size_t>(i)])
            throw validation_error("value-count", "table misses a domain root");
    EdgePolicy pol = make_policy(domain);
    verify_table(domain, pol, table, verify_nd_only);
    PFunction p;
    p.domain_ = std::move(domain);
    p.simple_roots_ = std::move(simple_roots);
    p.simple_values_ = std::move(simple_values);
    p.seed_ = std::move(seed);
    p.table_ = std::move(table);
    return p;
}

// ---------------------------------------------------------------------------
// Fibered subsystems
// ---------------------------------------------------------------------------

std::shared_ptr<const AffineReflectionSystem> share(AffineReflectionSystem A) {
    return std::make_shared<const AffineReflectionSystem>(std::move(A));
}

namespace {

const YData& ydata_for(const SubsystemSpec& spec, LengthClass c) {
    switch (c) {
        case LengthClass::Short: return spec.y_s;
        case LengthClass::Long: return spec.y_ell;
        case LengthClass::Divisible: return spec.y_d;
    }
    throw validation_error("spec-structure", "unknown length class");
}

PFunction zero_p(const FiniteSubsystem& domain, int nullity) {
    std::vector<int> simples = simple_system(*domain.parent, domain.roots);
    std::vector<Vec> values(simples.size(), vec_zero(nullity));
    return extend_p(domain, std::move(simples), std::move(values));
}

}  // namespace

SubsystemSpec full_spec(std::shared_ptr<const AffineReflectionSystem> parent) {
    std::vector<int> all(static_cast<std::size_t>(parent->gradient.size()));
    for (int i = 0; i < parent->gradient.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    return full_fiber_spec(std::move(parent), std::move(all));
}

SubsystemSpec full_fiber_spec(std::shared_ptr<const AffineReflectionSystem> parent,
                              std::vector<int> roots) {
    SubsystemSpec spec;
    spec.gradient_sub = make_subsystem(parent->gradient, std::move(roots));
    spec.p = zero_p(spec.gradient_sub, parent->nullity());
    spec.parent = std::move(parent);
    return spec;
}

CosetUnion fiber_of(const SubsystemSpec& spec, int root_index) {
    const FiniteRootSystem& R = spec.parent->gradient;
    if (root_index < 0 || root_index >= R.size())
        throw validation_error("not-a-root", "root index out of range");
    LengthClass c = R.roots[static_cast<std::size_t>(root_index)].length_class;
    const YData& y = ydata_for(spec, c);
    if (y.is_full()) return lambda_for(spec.parent->datum, c);
    return cu_translate(*y.set, spec.p.value_at(root_index));
}

FiniteSubsystem gradient_of(const SubsystemSpec& spec) {
    if (spec.parent == nullptr || spec.gradient_sub.parent != &spec.parent->gradient)
        throw validation_error("spec-structure", "spec does not point at its parent gradient");
    if (!is_finite_subsystem(spec.parent->gradient, spec.gradient_sub.roots))
        throw validation_error("gradient-not-closed",
                               "the finite parts are not closed under reflections");
    return spec.gradient_sub;
}

bool is_subsystem(const SubsystemSpec& spec) {
    if (spec.parent == nullptr || spec.gradient_sub.parent != &spec.parent->gradient)
        throw validation_error("spec-structure", "spec does not point at its parent gradient");
    const FiniteRootSystem& R = spec.parent->gradient;
    const int k = spec.parent->nullity();
    const auto& roots = spec.gradient_sub.roots;
    if (!is_finite_subsystem(R, roots)) return false;

    // Offset data must be dimensioned correctly and contain the zero offset
    // (each base point lies in its own fiber).
    bool present[3] = {false, false, false};
    for (int i : roots) present[static_cast<int>(R.roots[static_cast<std::size_t>(i)].length_class)] = true;
    for (int ci = 0; ci < 3; ++ci) {
        if (!present[ci]) continue;
        const YData& y = ydata_for(spec, static_cast<LengthClass>(ci));
        if (y.is_full()) continue;
        if (y.set->dim != k)
            throw validation_error("spec-structure", "offset data dimension mismatch");
        if (!cu_contains(*y.set, vec_zero(k))) return false;
    }

    // Fibers sit inside the parent fibers.  Base points repeat heavily, so
    // dedupe on (class, base point).
    {
        std::set<std::pair<int, Vec>> seen;
        for (int i : roots) {
            LengthClass c = R.roots[static_cast<std::size_t>(i)].length_class;
            const YData& y = ydata_for(spec, c);
            if (y.is_full()) continue;
            const Vec& bp = spec.p.value_at(i);
            if (!seen.insert({static_cast<int>(c), bp}).second) continue;
            if (!cu_subset(cu_translate(*y.set, bp), lambda_for(spec.parent->datum, c)))
                return false;
        }
    }

    // Reflection transport, exactly:  Y(b) − ⟨b,a∨⟩·Y(a) ⊆ Y(s_a(b)).
    // The check only depends on the classes involved, the pairing value and
    // the base-point discrepancy, so identical instances are checked once.
    std::map<std::tuple<int, bool, int, bool, Int, Vec>, bool> memo;
    for (int b : roots) {
        for (int a : roots) {
            Int c = pairing(R.roots[static_cast<std::size_t>(b)].coords,
                            R.roots[static_cast<std::size_t>(a)].coords);
            if (c == 0) continue;
            int t = reflect(R, a, b);
            LengthClass cb = R.roots[static_cast<std::size_t>(b)].length_class;
            LengthClass ca = R.roots[static_cast<std::size_t>(a)].length_class;
            bool fb = ydata_for(spec, cb).is_full();
            bool fa = ydata_for(spec, ca).is_full();
            Vec bp_b = fb ? vec_zero(k) : spec.p.value_at(b);
            Vec bp_a = fa ? vec_zero(k) : spec.p.value_at(a);
            Vec bp_t = fb ? vec_zero(k) : spec.p.value_at(t);
            Vec delta = vec_sub(vec_sub(bp_b, vec_scale(c, bp_a)), bp_t);
            auto key = std::make_tuple(static_cast<int>(cb), fb, static_cast<int>(ca), fa, c,
                                       delta);
            auto it = memo.find(key);
            if (it == memo.end()) {
                CosetUnion image =
                    cu_minkowski(fiber_of(spec, b), cu_scale(fiber_of(spec, a), -c));
                it = memo.emplace(key, cu_subset(image, fiber_of(spec, t))).first;
            }
            if (!it->second) return false;
        }
    }
    return true;
}

bool membership(const SubsystemSpec& spec, const AffineRoot& root) {
    int idx = root_index(spec.parent->gradient, root.finite_part.coords);
    if (idx < 0) return false;
    if (!std::binary_search(spec.gradient_sub.roots.begin(), spec.gradient_sub.roots.end(), idx))
        return false;
    return cu_contains(fiber_of(spec, idx), root.translation);
}

// ---------------------------------------------------------------------------
// Duality for specs
// ---------------------------------------------------------------------------

namespace {

/// Bijection between the roots of a reduced system and its dual, built from
/// matched simple systems (Cartan matrices transpose) and integral coroot
/// expansions.
struct DualRootMap {
    std::vector<int> image;  // by root index of the source
};

DualRootMap build_dual_map(const FiniteRootSystem& R, const FiniteRootSystem& Rd) {
    std::vector<int> all(static_cast<std::size_t>(R.size()));
    for (int i = 0; i < R.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    std::vector<int> alld(static_cast<std::size_t>(Rd.size()));
    for (int i = 0; i < Rd.size(); ++i) alld[static_cast<std::size_t>(i)] = i;
    std::vector<int> pi = simple_system(R, all);
    std::vector<int> pid = simple_system(Rd, alld);
    const int n = static_cast<int>(pi.size());

    auto cart = [](const FiniteRootSystem& S, const std::vector<int>& simples, int i, int j) {
        return pairing(S.roots[static_cast<std::size_t>(simples[static_cast<std::size_t>(i)])].coords,
                       S.roots[static_cast<std::size_t>(simples[static_cast<std::size_t>(j)])].coords);
    };

    // Match the dual simple system so that the Cartan matrix transposes;
    // identity is tried first so self-dual realizations map to themselves.
    std::vector<int> sigma(static_cast<std::size_t>(n), -1);
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    auto backtrack = [&](auto&& self, int i) -> bool {
        if (i == n) return true;
        for (int off = 0; off < n; ++off) {
            int cand = (i + off) % n;
            if (used[static_cast<std::size_t>(cand)]) continue;
            bool ok = true;
            for (int j = 0; j <= i && ok; ++j) {
                if (sigma[static_cast<std::size_t>(j)] < 0 && j != i) continue;
                int sj = (j == i) ? cand : sigma[static_cast<std::size_t>(j)];
                ok = cart(Rd, pid, cand, sj) == cart(R, pi, j, i) &&
                     cart(Rd, pid, sj, cand) == cart(R, pi, i, j);
            }
            if (!ok) continue;
            sigma[static_cast<std::size_t>(i)] = cand;
            used[static_cast<std::size_t>(cand)] = 1;
            if (self(self, i + 1)) return true;
            sigma[static_cast<std::size_t>(i)] = -1;
            used[static_cast<std::size_t>(cand)] = 0;
        }
        return false;
    };
    if (!backtrack(backtrack, 0))
        throw validation_error("spec-structure", "dual simple systems cannot be matched");

    // Integer expansion of every root over the simple system, by reflection
    // propagation.
    Mat expansion(static_cast<std::size_t>(R.size()));
    std::vector<int> work;
    for (int i = 0; i < n; ++i) {
        Vec e = vec_zero(n);
        e[static_cast<std::size_t>(i)] = 1;
        expansion[static_cast<std::size_t>(pi[static_cast<std::size_t>(i)])] = std::move(e);
        work.push_back(pi[static_cast<std::size_t>(i)]);
    }
    while (!work.empty()) {
        int b = work.back();
        work.pop_back();
        for (int s = 0; s < n; ++s) {
            int a = pi[static_cast<std::size_t>(s)];
            int t = reflect(R, a, b);
            if (!expansion[static_cast<std::size_t>(t)].empty()) continue;
            Int c = pairing(R.roots[static_cast<std::size_t>(b)].coords,
                            R.roots[static_cast<std::size_t>(a)].coords);
            Vec e = expansion[static_cast<std::size_t>(b)];
            e[static_cast<std::size_t>(s)] -= c;
            expansion[static_cast<std::size_t>(t)] = std::move(e);
            work.push_back(t);
        }
    }

    DualRootMap map;
    map.image.assign(static_cast<std::size_t>(R.size()), -1);
    for (int r = 0; r < R.size(); ++r) {
        const Vec& e = expansion[static_cast<std::size_t>(r)];
        if (e.empty())
            throw validation_error("spec-structure", "root not reachable from the simple system");
        Vec coords = vec_zero(Rd.dim);
        const Int& nr = R.roots[static_cast<std::size_t>(r)].norm_sq;
        for (int i = 0; i < n; ++i) {
            if (e[static_cast<std::size_t>(i)] == 0) continue;
            const Int& ni =
                R.roots[static_cast<std::size_t>(pi[static_cast<std::size_t>(i)])].norm_sq;
            Int num = e[static_cast<std::size_t>(i)] * ni;
            if (num % nr != 0)
                throw validation_error("spec-structure", "non-integral coroot expansion");
            const FiniteRoot& target =
                Rd.roots[static_cast<std::size_t>(pid[static_cast<std::size_t>(
                    sigma[static_cast<std::size_t>(i)])])];
            Vec scaled = vec_scale(num / nr, target.coords);
            coords = vec_add(coords, scaled);
        }
        int idx = root_index(Rd, coords);
        if (idx < 0)
            throw validation_error("spec-structure", "dual image is not a root");
        map.image[static_cast<std::size_t>(r)] = idx;
    }
    return map;
}

}  // namespace

SubsystemSpec dual_spec(const SubsystemSpec& spec) {
    if (spec.parent == nullptr || spec.gradient_sub.parent != &spec.parent->gradient)
        throw validation_error("spec-structure", "spec does not point at its parent gradient");
    const FiniteRootSystem& R = spec.parent->gradient;
    if (R.type.family == Family::BC)
        throw validation_error("non-reduced-dual",
                               "duality is undefined for the non-reduced family");
    auto dual_parent = share(dual(*spec.parent));
    const FiniteRootSystem& Rd = dual_parent->gradient;
    DualRootMap map = build_dual_map(R, Rd);
    const Int m = R.lacing;

    auto factor = [&](int old_root) -> Int {
        return R.roots[static_cast<std::size_t>(old_root)].length_class == LengthClass::Short
                   ? m
                   : Int(1);
    };

    SubsystemSpec out;
    out.family_tag = spec.family_tag;

    std::vector<int> roots;
    roots.reserve(spec.gradient_sub.roots.size());
    for (int r : spec.gradient_sub.roots)
        roots.push_back(map.image[static_cast<std::size_t>(r)]);
    std::sort(roots.begin(), roots.end());
    out.gradient_sub = make_subsystem(Rd, std::move(roots));

    std::vector<std::optional<Vec>> table(static_cast<std::size_t>(Rd.size()));
    for (int r : spec.p.domain().roots) {
        if (!spec.p.defined_at(r)) continue;
        table[static_cast<std::size_t>(map.image[static_cast<std::size_t>(r)])] =
            vec_scale(factor(r), spec.p.value_at(r));
    }
    std::vector<int> dual_domain;
    for (int r : spec.p.domain().roots)
        dual_domain.push_back(map.image[static_cast<std::size_t>(r)]);
    std::sort(dual_domain.begin(), dual_domain.end());
    std::vector<int> dual_simples;
    std::vector<Vec> dual_values;
    for (std::size_t i = 0; i < spec.p.simple_roots().size(); ++i) {
        int s = spec.p.simple_roots()[i];
        dual_simples.push_back(map.image[static_cast<std::size_t>(s)]);
        dual_values.push_back(vec_scale(factor(s), spec.p.simple_values()[i]));
    }
    out.p = p_from_table(make_subsystem(Rd, std::move(dual_domain)), std::move(table),
                         std::move(dual_simples), std::move(dual_values), std::nullopt, false);

    auto scale_y = [&](const YData& y, const Int& f) {
        if (y.is_full()) return YData::full();
        return YData::of(cu_scale(*y.set, f));
    };
    if (R.simply_laced()) {
        out.y_s = spec.y_s;
        out.y_ell = spec.y_ell;
    } else {
        out.y_s = scale_y(spec.y_ell, 1);
        out.y_ell = scale_y(spec.y_s, m);
    }
    out.y_d = YData::full();
    out.parent = std::move(dual_parent);
    return out;
}

bool is_subsystem(const ProductSpec& spec) {
    for (const auto& part : spec.parts)
        if (!is_subsystem(part)) return false;
    return true;
}

}  // namespace reflecta
