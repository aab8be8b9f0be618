#include "doctest.h"

#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "reflecta/ars.hpp"
#include "reflecta/errors.hpp"

using namespace reflecta;

namespace {

Mat m(std::initializer_list<std::initializer_list<long>> rows) {
    Mat out;
    for (const auto& r : rows) {
        Vec v;
        for (long x : r) v.push_back(x);
        out.push_back(std::move(v));
    }
    return out;
}

Vec v(std::initializer_list<long> xs) {
    Vec out;
    for (long x : xs) out.push_back(x);
    return out;
}

Lattice diag(long a, long b) { return lattice_diag({Int(a), Int(b)}); }

CosetUnion cuf(const Lattice& L) { return cu_full(L); }

std::vector<int> all_of(const FiniteRootSystem& R) {
    std::vector<int> out(static_cast<std::size_t>(R.size()));
    std::iota(out.begin(), out.end(), 0);
    return out;
}

// {(0,0),(1,0),(0,1)} + 2Z^2, the running non-subgroup union.
CosetUnion three_cosets() {
    return coset_union({v({0, 0}), v({1, 0}), v({0, 1})}, diag(2, 2));
}

ExtensionDatum datum2(CosetUnion s, CosetUnion ell,
                      std::optional<CosetUnion> d = std::nullopt) {
    ExtensionDatum out;
    out.nullity = 2;
    out.lambda0 = lattice_zero(2);
    out.lambda_s = std::move(s);
    out.lambda_ell = std::move(ell);
    out.lambda_d = std::move(d);
    return out;
}

ExtensionDatum datum1(CosetUnion s, CosetUnion ell) {
    ExtensionDatum out;
    out.nullity = 1;
    out.lambda0 = lattice_zero(1);
    out.lambda_s = std::move(s);
    out.lambda_ell = std::move(ell);
    return out;
}

// B-type system whose short fiber is the three-coset union and whose long
// fiber is 2Z^2.
ExtensionDatum funny_b_datum() { return datum2(three_cosets(), cuf(diag(2, 2))); }

// C-type mirror: full short fiber, three-coset long fiber.
ExtensionDatum funny_c_datum() { return datum2(cuf(lattice_full(2)), three_cosets()); }

ExtensionDatum bc24_datum() {
    return datum2(cuf(lattice_full(2)), cuf(diag(1, 2)),
                  coset_union({v({1, 0})}, diag(2, 4)));
}

template <class F>
std::string thrown_code(F&& f) {
    try {
        f();
    } catch (const validation_error& e) {
        return e.code();
    }
    return "<nothrow>";
}

}  // namespace

// ---------------------------------------------------------------------------
// Datum validation
// ---------------------------------------------------------------------------

TEST_CASE("validating well-formed data reports no violations") {
    CHECK(validate_datum(build({Family::C, 2}), funny_c_datum()).ok());
    CHECK(validate_datum(build({Family::B, 2}), funny_b_datum()).ok());
    CHECK(validate_datum(build({Family::BC, 2}), bc24_datum()).ok());
    // Full fibers everywhere with a two-coset divisible fiber.
    CHECK(validate_datum(build({Family::BC, 2}),
                         datum2(cuf(lattice_full(2)), cuf(lattice_full(2)),
                                coset_union({v({1, 0}), v({1, 1})}, diag(2, 2))))
              .ok());
}

TEST_CASE("rank-2 subgroup requirement is reported for non-group fibers") {
    // All additive relations hold for a three-coset long fiber over B2, yet
    // the fiber is not a subgroup.
    ValidationReport r =
        validate_datum(build({Family::B, 2}), datum2(cuf(lattice_full(2)), three_cosets()));
    CHECK(r.violations == std::vector<std::string>{"mild-assumption"});

    // The same configuration on the C side constrains the short slot.
    ValidationReport rc =
        validate_datum(build({Family::C, 2}), datum2(three_cosets(), cuf(diag(2, 2))));
    CHECK(rc.violations == std::vector<std::string>{"mild-assumption"});
}

TEST_CASE("short-plus-long stability is derived from the root pairings") {
    ValidationReport r =
        validate_datum(build({Family::B, 2}), datum2(cuf(diag(2, 2)), cuf(lattice_full(2))));
    CHECK(r.violations == std::vector<std::string>{"lambda_s+lambda_ell"});
}

TEST_CASE("the lacing coefficient appears in the long-fiber relation") {
    ValidationReport r = validate_datum(
        build({Family::G2, 2}), datum1(cuf(lattice_full(1)), cuf(lattice_diag({Int(9)}))));
    CHECK(r.violations == std::vector<std::string>{"lambda_ell+3*lambda_s"});
}

TEST_CASE("single-length gradients pin the two reduced fibers equal") {
    ValidationReport r = validate_datum(
        build({Family::A, 2}), datum1(cuf(lattice_full(1)), cuf(lattice_diag({Int(2)}))));
    CHECK(r.violations == std::vector<std::string>{"lambda_ell+lambda_s"});
}

TEST_CASE("divisible fiber presence must match the gradient family") {
    ValidationReport missing = validate_datum(
        build({Family::BC, 2}), datum2(cuf(lattice_full(2)), cuf(lattice_full(2))));
    CHECK(missing.violations == std::vector<std::string>{"lambda_d-missing"});

    ValidationReport stray = validate_datum(
        build({Family::B, 2}),
        datum2(cuf(lattice_full(2)), cuf(lattice_full(2)), cuf(diag(2, 2))));
    CHECK(stray.violations == std::vector<std::string>{"lambda_d-unexpected"});
}

TEST_CASE("zero membership is required for the reduced fibers only") {
    ValidationReport r = validate_datum(
        build({Family::B, 2}),
        datum2(coset_union({v({1, 0})}, diag(2, 2)), cuf(diag(2, 2))));
    CHECK(r.violations == std::vector<std::string>{"zero-not-in-lambda_s"});
    // bc24_datum's divisible fiber misses zero and that is fine (covered by
    // the well-formed case above).
}

TEST_CASE("fibers must span the translation directions up to finite index") {
    Lattice line = hnf_in_dim(2, m({{1, 0}}));
    ValidationReport r = validate_datum(build({Family::B, 2}), datum2(cuf(line), cuf(line)));
    CHECK(r.violations == std::vector<std::string>{"span"});
}

TEST_CASE("mismatched dimensions short-circuit validation") {
    ExtensionDatum d = funny_b_datum();
    d.nullity = 1;
    ValidationReport r = validate_datum(build({Family::B, 2}), d);
    CHECK(r.violations == std::vector<std::string>{"dimension-mismatch"});
}

TEST_CASE("nullity zero is a legal degenerate configuration") {
    ExtensionDatum d;
    d.nullity = 0;
    d.lambda0 = lattice_zero(0);
    d.lambda_s = cuf(lattice_full(0));
    d.lambda_ell = cuf(lattice_full(0));
    CHECK(validate_datum(build({Family::A, 1}), d).ok());
    AffineReflectionSystem sys = make_system(build({Family::A, 1}), d);
    CHECK(sys.nullity() == 0);
    CHECK(in_real_roots(sys, affine_root(sys.gradient, v({1, -1}), Vec{})));
}

TEST_CASE("assembling a system rejects invalid data with the violation list") {
    try {
        make_system(build({Family::B, 2}), datum2(cuf(lattice_full(2)), three_cosets()));
        FAIL("expected a validation error");
    } catch (const validation_error& e) {
        CHECK(e.code() == "invalid-datum");
        CHECK(std::string(e.what()).find("mild-assumption") != std::string::npos);
    }
}

TEST_CASE("fiber lookup by length class") {
    ExtensionDatum bc = bc24_datum();
    CHECK(cu_equal(lambda_for(bc, LengthClass::Short), cuf(lattice_full(2))));
    CHECK(cu_equal(lambda_for(bc, LengthClass::Divisible),
                   coset_union({v({1, 0})}, diag(2, 4))));
    ExtensionDatum b = funny_b_datum();
    CHECK(thrown_code([&] { (void)lambda_for(b, LengthClass::Divisible); }) ==
          "lambda_d-missing");
}

// ---------------------------------------------------------------------------
// Affine roots and reflections
// ---------------------------------------------------------------------------

TEST_CASE("affine reflection moves the translation by the pairing multiple") {
    FiniteRootSystem R = build({Family::B, 2});
    AffineRoot a = affine_root(R, v({1, -1}), v({1, 0}));
    AffineRoot b = affine_root(R, v({0, 1}), v({0, 0}));
    AffineRoot r = reflect_affine(R, a, b);
    CHECK(r == affine_root(R, v({1, 0}), v({1, 0})));

    CHECK(thrown_code([&] { (void)affine_root(R, v({3, 3}), v({0, 0})); }) == "not-a-root");
}

TEST_CASE("affine reflections are involutions and preserve real roots") {
    AffineReflectionSystem sys =
        make_system(build({Family::B, 2}), datum2(cuf(lattice_full(2)), cuf(diag(1, 2))));
    const FiniteRootSystem& R = sys.gradient;

    // A few translations inside each fiber.
    auto samples = [&](int root) {
        const CosetUnion& fiber =
            lambda_for(sys.datum, R.roots[static_cast<std::size_t>(root)].length_class);
        std::vector<Vec> out;
        for (long x = -2; x <= 2 && out.size() < 3; ++x)
            for (long y = -2; y <= 2 && out.size() < 3; ++y)
                if (cu_contains(fiber, v({x, y}))) out.push_back(v({x, y}));
        return out;
    };
    for (int ia = 0; ia < R.size(); ++ia) {
        for (int ib = 0; ib < R.size(); ++ib) {
            for (const Vec& ta : samples(ia)) {
                for (const Vec& tb : samples(ib)) {
                    AffineRoot a{R.roots[static_cast<std::size_t>(ia)], ta};
                    AffineRoot b{R.roots[static_cast<std::size_t>(ib)], tb};
                    AffineRoot r = reflect_affine(R, a, b);
                    CHECK(in_real_roots(sys, r));
                    CHECK(reflect_affine(R, a, r) == b);
                }
            }
        }
    }
}

TEST_CASE("reflections never change the length class") {
    for (RootSystemType t : {RootSystemType{Family::B, 2}, RootSystemType{Family::G2, 2},
                             RootSystemType{Family::BC, 2}, RootSystemType{Family::BC, 3}}) {
        FiniteRootSystem R = build(t);
        for (int a = 0; a < R.size(); ++a)
            for (int b = 0; b < R.size(); ++b)
                CHECK(R.roots[static_cast<std::size_t>(reflect(R, a, b))].length_class ==
                      R.roots[static_cast<std::size_t>(b)].length_class);
    }
}

TEST_CASE("real-root membership consults the class fiber") {
    AffineReflectionSystem sys = make_system(build({Family::BC, 2}), bc24_datum());
    CHECK(in_real_roots(sys, affine_root(sys.gradient, v({1, 0}), v({7, -5}))));
    CHECK(in_real_roots(sys, affine_root(sys.gradient, v({2, 0}), v({1, 0}))));
    CHECK(in_real_roots(sys, affine_root(sys.gradient, v({2, 0}), v({3, 4}))));
    // The divisible fiber does not contain zero.
    CHECK_FALSE(in_real_roots(sys, affine_root(sys.gradient, v({2, 0}), v({0, 0}))));
    CHECK_FALSE(in_real_roots(sys, affine_root(sys.gradient, v({1, 1}), v({0, 1}))));
    AffineRoot outside{FiniteRoot{v({3, 3}), Int(18), LengthClass::Long}, v({0, 0})};
    CHECK_FALSE(in_real_roots(sys, outside));
}

// ---------------------------------------------------------------------------
// Duality of systems
// ---------------------------------------------------------------------------

TEST_CASE("dual types swap the two-length families") {
    CHECK(dual_type({Family::B, 3}) == RootSystemType{Family::C, 3});
    CHECK(dual_type({Family::C, 3}) == RootSystemType{Family::B, 3});
    CHECK(dual_type({Family::A, 2}) == RootSystemType{Family::A, 2});
    CHECK(dual_type({Family::G2, 2}) == RootSystemType{Family::G2, 2});
}

TEST_CASE("the dual system swaps fibers and scales the short one") {
    AffineReflectionSystem cstar = make_system(build({Family::C, 2}), funny_c_datum());
    AffineReflectionSystem d = dual(cstar);
    CHECK(d.gradient.type == RootSystemType{Family::B, 2});
    CHECK(cu_equal(d.datum.lambda_s, three_cosets()));
    CHECK(cu_equal(d.datum.lambda_ell, cuf(diag(2, 2))));
}

TEST_CASE("simply-laced systems are self-dual") {
    AffineReflectionSystem a =
        make_system(build({Family::A, 2}), datum1(cuf(lattice_full(1)), cuf(lattice_full(1))));
    AffineReflectionSystem d = dual(a);
    CHECK(d.gradient.type == a.gradient.type);
    CHECK(cu_equal(d.datum.lambda_s, a.datum.lambda_s));
    CHECK(cu_equal(d.datum.lambda_ell, a.datum.lambda_ell));
    CHECK(d.datum.lambda0 == a.datum.lambda0);
}

TEST_CASE("applying duality twice scales every fiber by the lacing number") {
    ExtensionDatum orig = funny_b_datum();
    orig.lambda0 = diag(1, 2);
    AffineReflectionSystem sys = make_system(build({Family::B, 2}), orig);
    AffineReflectionSystem dd = dual(dual(sys));
    CHECK(dd.gradient.type == sys.gradient.type);
    CHECK(cu_equal(dd.datum.lambda_s, cu_scale(orig.lambda_s, 2)));
    CHECK(cu_equal(dd.datum.lambda_ell, cu_scale(orig.lambda_ell, 2)));
    CHECK(dd.datum.lambda0 == lat_scale(orig.lambda0, 4));
}

TEST_CASE("non-reduced systems have no dual") {
    AffineReflectionSystem sys = make_system(build({Family::BC, 2}), bc24_datum());
    CHECK(thrown_code([&] { (void)dual(sys); }) == "non-reduced-dual");
}

// ---------------------------------------------------------------------------
// Base-point functions
// ---------------------------------------------------------------------------

TEST_CASE("base points extend linearly from a simple system") {
    FiniteRootSystem R = build({Family::B, 2});
    FiniteSubsystem dom = make_subsystem(R, all_of(R));
    int e2 = root_index(R, v({0, 1}));
    int e1me2 = root_index(R, v({1, -1}));
    PFunction p = extend_p(dom, {e2, e1me2}, {v({1, 0}), v({0, 0})});
    CHECK(p.value_at(root_index(R, v({1, 0}))) == v({1, 0}));
    CHECK(p.value_at(root_index(R, v({1, 1}))) == v({2, 0}));
    CHECK(p.value_at(root_index(R, v({-1, 0}))) == v({-1, 0}));
    CHECK(p.value_at(root_index(R, v({0, -1}))) == v({-1, 0}));

    // The same function from a different generating pair.
    PFunction q = extend_p(dom, {root_index(R, v({1, 0})), root_index(R, v({-1, 1}))},
                           {v({1, 0}), v({0, 0})});
    for (int i = 0; i < R.size(); ++i) CHECK(q.value_at(i) == p.value_at(i));

    CHECK_FALSE(p.defined_at(-1));
    CHECK(thrown_code([&] { (void)p.value_at(999); }) == "p-undefined");
}

TEST_CASE("over-determined values must agree along every reflection path") {
    FiniteRootSystem R = build({Family::B, 2});
    FiniteSubsystem dom = make_subsystem(R, all_of(R));
    int e1 = root_index(R, v({1, 0}));
    int e2 = root_index(R, v({0, 1}));
    int e12 = root_index(R, v({1, 1}));
    CHECK(thrown_code([&] {
              (void)extend_p(dom, {e1, e2, e12}, {v({1, 0}), v({1, 0}), v({5, 5})});
          }) == "inconsistent-values");
    // Consistent redundancy is accepted.
    PFunction p = extend_p(dom, {e1, e2, e12}, {v({1, 0}), v({1, 0}), v({2, 0})});
    CHECK(p.value_at(root_index(R, v({1, -1}))) == v({0, 0}));
}

TEST_CASE("propagation must reach the whole domain") {
    FiniteRootSystem R = build({Family::B, 2});
    FiniteSubsystem dom = make_subsystem(R, all_of(R));
    CHECK(thrown_code([&] {
              (void)extend_p(dom, {root_index(R, v({0, 1}))}, {v({0, 0})});
          }) == "not-a-simple-system");
}

TEST_CASE("simple roots must lie in the domain and match the value count") {
    FiniteRootSystem R = build({Family::B, 2});
    int e1 = root_index(R, v({1, 0}));
    int me1 = root_index(R, v({-1, 0}));
    int e2 = root_index(R, v({0, 1}));
    FiniteSubsystem axis = make_subsystem(R, {std::min(e1, me1), std::max(e1, me1)});
    CHECK(thrown_code([&] { (void)extend_p(axis, {e2}, {v({0, 0})}); }) == "not-in-domain");
    FiniteSubsystem dom = make_subsystem(R, all_of(R));
    CHECK(thrown_code([&] { (void)extend_p(dom, {e1, e2}, {v({0, 0})}); }) == "value-count");
}

TEST_CASE("divisible base points default to the doubled short values") {
    FiniteRootSystem R = build({Family::BC, 2});
    FiniteSubsystem dom = make_subsystem(R, all_of(R));
    PFunction p = extend_p(dom, {root_index(R, v({0, 1})), root_index(R, v({1, -1}))},
                           {v({1, 0}), v({0, 0})});
    CHECK(p.value_at(root_index(R, v({2, 0}))) == v({2, 0}));
    CHECK(p.value_at(root_index(R, v({0, 2}))) == v({2, 0}));
    CHECK(p.value_at(root_index(R, v({0, -2}))) == v({-2, 0}));
}

TEST_CASE("a divisible seed rides long reflections only") {
    FiniteRootSystem R = build({Family::BC, 2});
    FiniteSubsystem dom = make_subsystem(R, all_of(R));
    int e2 = root_index(R, v({0, 1}));
    int e1me2 = root_index(R, v({1, -1}));
    PFunction p = extend_p(dom, {e2, e1me2}, {v({1, 0}), v({0, 0})},
                           std::pair<int, Vec>{root_index(R, v({0, 2})), v({0, 1})});
    CHECK(p.value_at(root_index(R, v({0, 2}))) == v({0, 1}));
    CHECK(p.value_at(root_index(R, v({2, 0}))) == v({0, 1}));
    CHECK(p.value_at(root_index(R, v({-2, 0}))) == v({-4, 1}));
    CHECK(p.value_at(root_index(R, v({0, -2}))) == v({-4, 1}));
    // Short values are untouched by the seed.
    CHECK(p.value_at(root_index(R, v({1, 0}))) == v({1, 0}));
    // The seeded layer need not be odd: p(2e2) + p(-2e2) != 0.
    CHECK(vec_add(p.value_at(root_index(R, v({0, 2}))),
                  p.value_at(root_index(R, v({0, -2})))) == v({-4, 2}));
    CHECK(p.divisible_seed().has_value());
}

TEST_CASE("seeds are rejected off the divisible layer") {
    FiniteRootSystem R = build({Family::BC, 2});
    FiniteSubsystem dom = make_subsystem(R, all_of(R));
    int e2 = root_index(R, v({0, 1}));
    int e1me2 = root_index(R, v({1, -1}));
    CHECK(thrown_code([&] {
              (void)extend_p(dom, {e2, e1me2}, {v({0, 0}), v({0, 0})},
                             std::pair<int, Vec>{e2, v({0, 1})});
          }) == "seed-not-divisible");
}

TEST_CASE("doubled roots without their halves carry plain linear values") {
    FiniteRootSystem R = build({Family::BC, 2});
    // The even subsystem: both root lengths of a C2 shape, no short roots.
    std::vector<int> even = {
        root_index(R, v({-2, 0})), root_index(R, v({-1, -1})), root_index(R, v({-1, 1})),
        root_index(R, v({0, -2})), root_index(R, v({0, 2})),   root_index(R, v({1, -1})),
        root_index(R, v({1, 1})),  root_index(R, v({2, 0}))};
    std::sort(even.begin(), even.end());
    FiniteSubsystem dom = make_subsystem(R, even);

    int te2 = root_index(R, v({0, 2}));
    int e1me2 = root_index(R, v({1, -1}));
    PFunction p = extend_p(dom, {te2, e1me2}, {v({0, 1}), v({1, 0})});
    CHECK(p.value_at(root_index(R, v({2, 0}))) == v({2, 1}));
    CHECK(p.value_at(root_index(R, v({1, 1}))) == v({1, 1}));
    CHECK(p.value_at(root_index(R, v({0, -2}))) == v({0, -1}));

    // With no halved root present there is no independent layer to seed.
    CHECK(thrown_code([&] {
              (void)extend_p(dom, {te2, e1me2}, {v({0, 1}), v({1, 0})},
                             std::pair<int, Vec>{te2, v({5, 5})});
          }) == "seed-unsupported");
}

TEST_CASE("mixed components split into seeded and plain divisible axes") {
    FiniteRootSystem R = build({Family::BC, 2});
    std::vector<int> roots = {root_index(R, v({-2, 0})), root_index(R, v({-1, 0})),
                              root_index(R, v({0, -2})), root_index(R, v({0, 2})),
                              root_index(R, v({1, 0})),  root_index(R, v({2, 0}))};
    std::sort(roots.begin(), roots.end());
    FiniteSubsystem dom = make_subsystem(R, roots);
    PFunction p = extend_p(dom, {root_index(R, v({1, 0})), root_index(R, v({0, 2}))},
                           {v({1, 0}), v({0, 1})});
    // Doubled roots with halves present: doubled short values.
    CHECK(p.value_at(root_index(R, v({2, 0}))) == v({2, 0}));
    CHECK(p.value_at(root_index(R, v({-2, 0}))) == v({-2, 0}));
    // The lone doubled axis reflects linearly on its own.
    CHECK(p.value_at(root_index(R, v({0, -2}))) == v({0, -1}));
}

TEST_CASE("tables round-trip and corrupted tables are rejected") {
    FiniteRootSystem R = build({Family::B, 2});
    FiniteSubsystem dom = make_subsystem(R, all_of(R));
    int e2 = root_index(R, v({0, 1}));
    int e1me2 = root_index(R, v({1, -1}));
    PFunction p = extend_p(dom, {e2, e1me2}, {v({1, 0}), v({0, 0})});

    std::vector<std::optional<Vec>> table;
    for (int i = 0; i < R.size(); ++i) table.push_back(p.value_at(i));
    PFunction q = p_from_table(dom, table, {e2, e1me2}, {v({1, 0}), v({0, 0})},
                               std::nullopt, false);
    for (int i = 0; i < R.size(); ++i) CHECK(q.value_at(i) == p.value_at(i));

    table[static_cast<std::size_t>(root_index(R, v({1, 1})))] = v({9, 9});
    CHECK(thrown_code([&] {
              (void)p_from_table(dom, table, {e2, e1me2}, {v({1, 0}), v({0, 0})},
                                 std::nullopt, false);
          }) == "inconsistent-values");
}

// ---------------------------------------------------------------------------
// Fibered subsystems
// ---------------------------------------------------------------------------

namespace {

std::shared_ptr<const AffineReflectionSystem> funny_b_system() {
    return share(make_system(build({Family::B, 2}), funny_b_datum()));
}

// Gradient = all of B2, base points zero, short offsets the four cosets
// {(0,0),(0,2),(1,0),(1,2)} of H = 2Z x 4Z, long offsets H.
SubsystemSpec coset_pattern_spec(std::shared_ptr<const AffineReflectionSystem> sys,
                                 std::vector<Vec> short_reps) {
    const FiniteRootSystem& R = sys->gradient;
    SubsystemSpec spec;
    spec.gradient_sub = make_subsystem(R, all_of(R));
    spec.p = extend_p(spec.gradient_sub, {root_index(R, v({0, 1})), root_index(R, v({1, -1}))},
                      {v({0, 0}), v({0, 0})});
    Lattice H = diag(2, 4);
    spec.y_s = YData::of(coset_union(short_reps, H));
    spec.y_ell = YData::of(cuf(H));
    spec.parent = std::move(sys);
    return spec;
}

std::vector<Vec> four_reps() { return {v({0, 0}), v({0, 2}), v({1, 0}), v({1, 2})}; }

// Repackages the offset data of a spec as an extension datum (zero fiber
// trivial, full classes borrowing the parent fiber).
ExtensionDatum datum_of_offsets(const SubsystemSpec& spec) {
    ExtensionDatum d;
    d.nullity = spec.parent->nullity();
    d.lambda0 = lattice_zero(d.nullity);
    d.lambda_s = spec.y_s.is_full() ? spec.parent->datum.lambda_s : *spec.y_s.set;
    d.lambda_ell = spec.y_ell.is_full() ? spec.parent->datum.lambda_ell : *spec.y_ell.set;
    if (spec.parent->gradient.type.family == Family::BC)
        d.lambda_d = spec.y_d.is_full() ? spec.parent->datum.lambda_d : spec.y_d.set;
    return d;
}

}  // namespace

TEST_CASE("the whole system is a subsystem of itself") {
    auto sys = funny_b_system();
    SubsystemSpec spec = full_spec(sys);
    CHECK(is_subsystem(spec));
    CHECK(gradient_of(spec).roots == all_of(sys->gradient));
    CHECK(spec.y_s.is_full());
    CHECK(membership(spec, affine_root(sys->gradient, v({0, 1}), v({1, 0}))));
    CHECK_FALSE(membership(spec, affine_root(sys->gradient, v({0, 1}), v({1, 1}))));
}

TEST_CASE("full-fiber lifts of a length class form subsystems") {
    auto sys = funny_b_system();
    SubsystemSpec spec = full_fiber_spec(sys, class_roots(sys->gradient, LengthClass::Long));
    CHECK(is_subsystem(spec));
    CHECK(gradient_of(spec).roots == class_roots(sys->gradient, LengthClass::Long));
    // Excluded finite parts are not members regardless of translation.
    CHECK_FALSE(membership(spec, affine_root(sys->gradient, v({0, 1}), v({0, 0}))));
    CHECK(membership(spec, affine_root(sys->gradient, v({1, 1}), v({2, 0}))));
}

TEST_CASE("the four-coset pattern over the funny B system is a subsystem") {
    SubsystemSpec spec = coset_pattern_spec(funny_b_system(), four_reps());
    CHECK(is_subsystem(spec));
    CHECK(gradient_of(spec).roots == all_of(spec.parent->gradient));

    // Fibers: short roots carry the four cosets, long roots carry H only.
    CHECK(membership(spec, affine_root(spec.parent->gradient, v({0, 1}), v({1, 2}))));
    CHECK_FALSE(membership(spec, affine_root(spec.parent->gradient, v({1, 1}), v({1, 2}))));
    CHECK(membership(spec, affine_root(spec.parent->gradient, v({1, 1}), v({2, 4}))));

    // Its offsets form a valid datum over the gradient in their own right.
    CHECK(validate_datum(spec.parent->gradient, datum_of_offsets(spec)).ok());
}

TEST_CASE("adjoining a coset that breaks reflection transport is detected") {
    std::vector<Vec> reps = four_reps();
    reps.push_back(v({1, 1}));  // doubled, (2,2) falls outside H
    SubsystemSpec spec = coset_pattern_spec(funny_b_system(), reps);
    CHECK_FALSE(is_subsystem(spec));
}

TEST_CASE("fibers escaping the parent fiber are detected") {
    auto sys = funny_b_system();
    SubsystemSpec spec = full_spec(sys);
    spec.y_ell = YData::of(cuf(lattice_full(2)));  // not inside 2Z^2
    CHECK_FALSE(is_subsystem(spec));
}

TEST_CASE("offset data missing the zero offset is detected") {
    auto sys = funny_b_system();
    SubsystemSpec spec = full_spec(sys);
    spec.y_ell = YData::of(coset_union({v({0, 2})}, diag(2, 4)));
    CHECK_FALSE(is_subsystem(spec));
}

TEST_CASE("proper subgroup fibers with non-zero base points form subsystems") {
    auto sys = share(make_system(
        build({Family::G2, 2}), datum1(cuf(lattice_full(1)), cuf(lattice_full(1)))));
    const FiniteRootSystem& R = sys->gradient;
    SubsystemSpec spec;
    spec.gradient_sub = make_subsystem(R, all_of(R));
    std::vector<int> simples = simple_system(R, all_of(R));
    spec.p = extend_p(spec.gradient_sub, simples, {v({5}), v({-3})});
    spec.y_s = YData::of(cuf(lattice_diag({Int(2)})));
    spec.y_ell = YData::of(cuf(lattice_diag({Int(2)})));
    spec.parent = sys;
    CHECK(is_subsystem(spec));
    CHECK(gradient_of(spec).roots == all_of(R));
    CHECK(validate_datum(R, datum_of_offsets(spec)).ok());

    // A non-subgroup offset set cannot absorb its own differences.
    spec.y_s = YData::of(coset_union({v({0}), v({1})}, lattice_diag({Int(5)})));
    spec.y_ell = spec.y_s;
    CHECK_FALSE(is_subsystem(spec));
}

TEST_CASE("seeded divisible fibers participate in transport checks") {
    auto sys = share(make_system(build({Family::BC, 2}), bc24_datum()));
    const FiniteRootSystem& R = sys->gradient;
    int e2 = root_index(R, v({0, 1}));
    int e1me2 = root_index(R, v({1, -1}));

    SubsystemSpec spec;
    spec.gradient_sub = make_subsystem(R, all_of(R));
    spec.p = extend_p(spec.gradient_sub, {e2, e1me2}, {v({0, 0}), v({0, 0})},
                      std::pair<int, Vec>{root_index(R, v({0, 2})), v({1, 0})});
    spec.y_d = YData::of(cuf(diag(2, 4)));
    spec.parent = sys;
    CHECK(is_subsystem(spec));
    CHECK(cu_equal(fiber_of(spec, root_index(R, v({2, 0}))),
                   coset_union({v({1, 0})}, diag(2, 4))));
    CHECK(validate_datum(R, datum_of_offsets(spec)).ok());

    // A seed landing outside the parent divisible fiber is caught by the
    // containment check.
    SubsystemSpec bad = spec;
    bad.p = extend_p(bad.gradient_sub, {e2, e1me2}, {v({0, 0}), v({0, 0})},
                     std::pair<int, Vec>{root_index(R, v({0, 2})), v({1, 1})});
    CHECK_FALSE(is_subsystem(bad));
}

TEST_CASE("structural problems throw instead of answering") {
    auto sys = funny_b_system();
    const FiniteRootSystem& R = sys->gradient;

    // Non-closed gradient part: answer is a clean "no" for the subsystem
    // question but the gradient accessor refuses.
    SubsystemSpec open;
    open.parent = sys;
    open.gradient_sub.parent = &R;
    open.gradient_sub.roots = {root_index(R, v({1, 0}))};
    CHECK_FALSE(is_subsystem(open));
    CHECK(thrown_code([&] { (void)gradient_of(open); }) == "gradient-not-closed");

    // Offsets present but base points unavailable on part of the gradient.
    int e1 = root_index(R, v({1, 0}));
    int me1 = root_index(R, v({-1, 0}));
    int e2 = root_index(R, v({0, 1}));
    int me2 = root_index(R, v({0, -1}));
    std::vector<int> four = {e1, me1, e2, me2};
    std::sort(four.begin(), four.end());
    std::vector<int> axis = {std::min(e1, me1), std::max(e1, me1)};

    SubsystemSpec partial;
    partial.parent = sys;
    partial.gradient_sub = make_subsystem(R, four);
    partial.p = extend_p(make_subsystem(R, axis), {e1}, {v({0, 0})});
    partial.y_s = YData::of(cuf(diag(2, 2)));
    CHECK(thrown_code([&] { (void)is_subsystem(partial); }) == "p-undefined");
}

// ---------------------------------------------------------------------------
// Duality of specs
// ---------------------------------------------------------------------------

TEST_CASE("the dual of the full spec is the full spec of the dual") {
    SubsystemSpec d = dual_spec(full_spec(funny_b_system()));
    CHECK(d.parent->gradient.type == RootSystemType{Family::C, 2});
    CHECK(d.y_s.is_full());
    CHECK(d.y_ell.is_full());
    CHECK(is_subsystem(d));
    CHECK(gradient_of(d).roots == all_of(d.parent->gradient));
}

TEST_CASE("dualizing swaps and scales the offset data") {
    SubsystemSpec spec = coset_pattern_spec(funny_b_system(), four_reps());
    SubsystemSpec d = dual_spec(spec);
    CHECK(d.parent->gradient.type == RootSystemType{Family::C, 2});
    CHECK(cu_equal(*d.y_s.set, cuf(diag(2, 4))));
    CHECK(cu_equal(*d.y_ell.set, cu_scale(coset_union(four_reps(), diag(2, 4)), 2)));
    CHECK(is_subsystem(d));

    SubsystemSpec dd = dual_spec(d);
    CHECK(dd.parent->gradient.type == RootSystemType{Family::B, 2});
    CHECK(cu_equal(*dd.y_s.set, cu_scale(coset_union(four_reps(), diag(2, 4)), 2)));
    CHECK(cu_equal(*dd.y_ell.set, cu_scale(cuf(diag(2, 4)), 2)));
    CHECK(is_subsystem(dd));
}

TEST_CASE("dualizing preserves the subsystem verdict both ways") {
    std::vector<Vec> reps = four_reps();
    reps.push_back(v({1, 1}));
    SubsystemSpec bad = coset_pattern_spec(funny_b_system(), reps);
    CHECK_FALSE(is_subsystem(bad));
    CHECK_FALSE(is_subsystem(dual_spec(bad)));
}

TEST_CASE("base points scale per root class under duality") {
    auto sys = share(make_system(
        build({Family::G2, 2}), datum1(cuf(lattice_full(1)), cuf(lattice_full(1)))));
    const FiniteRootSystem& R = sys->gradient;
    SubsystemSpec spec;
    spec.gradient_sub = make_subsystem(R, all_of(R));
    std::vector<int> simples = simple_system(R, all_of(R));
    spec.p = extend_p(spec.gradient_sub, simples, {v({5}), v({-3})});
    spec.y_s = YData::of(cuf(lattice_diag({Int(2)})));
    spec.y_ell = YData::of(cuf(lattice_diag({Int(2)})));
    spec.parent = sys;
    spec.family_tag = "pattern-under-test";

    SubsystemSpec d = dual_spec(spec);
    CHECK(d.family_tag == "pattern-under-test");
    CHECK(is_subsystem(d));
    REQUIRE(d.p.simple_values().size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        Int f = R.roots[static_cast<std::size_t>(simples[i])].length_class == LengthClass::Short
                    ? 3
                    : 1;
        Vec expect = spec.p.simple_values()[i];
        for (auto& x : expect) x *= f;
        CHECK(d.p.simple_values()[i] == expect);
    }

    auto bc = share(make_system(build({Family::BC, 2}), bc24_datum()));
    CHECK(thrown_code([&] { (void)dual_spec(full_spec(bc)); }) == "non-reduced-dual");
}

TEST_CASE("products are subsystems exactly when every part is") {
    ProductSpec prod;
    prod.parts.push_back(full_spec(funny_b_system()));
    prod.parts.push_back(coset_pattern_spec(funny_b_system(), four_reps()));
    CHECK(is_subsystem(prod));

    std::vector<Vec> reps = four_reps();
    reps.push_back(v({1, 1}));
    prod.parts.push_back(coset_pattern_spec(funny_b_system(), reps));
    CHECK_FALSE(is_subsystem(prod));
}
