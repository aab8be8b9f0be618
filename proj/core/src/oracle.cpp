#include "reflecta/oracle.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "reflecta/errors.hpp"

namespace reflecta {

namespace {

int slot_of(LengthClass c) { return static_cast<int>(c); }

Vec vec_sum(const Vec& a, const Vec& b) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Vec vec_mul(const Int& c, const Vec& v) {
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = c * v[i];
    return out;
}

void check_model_set(const QuotientModel& model, const ModelSet& S, const char* what) {
    if (S.size() != model.full.size() || !S.is_subset_of(model.full))
        throw validation_error("not-a-model-set",
                               std::string(what) + " is not a subset of the model's root set");
}

/// Adds one element to a closed set and closes again, reporting whether the
/// result is the full set (with early exit as soon as it is).
bool extends_to_full(const QuotientModel& model, const ModelSet& closed_set, int extra) {
    const int n = model.order;
    const int sz = model.size();
    const std::size_t target = model.full.count();

    ModelSet S = closed_set;
    std::vector<int> members;
    members.reserve(S.count() + 8);
    for (auto b = S.find_first(); b != ModelSet::npos; b = S.find_next(b))
        members.push_back(static_cast<int>(b));
    const std::size_t first_new = members.size();
    std::size_t cnt = first_new;

    auto try_add = [&](int bit) {
        if (!S.test(static_cast<std::size_t>(bit))) {
            S.set(static_cast<std::size_t>(bit));
            members.push_back(bit);
            ++cnt;
        }
    };
    try_add(extra);
    if (cnt == target) return true;

    for (std::size_t i = first_new; i < members.size(); ++i) {
        const int rb = members[i] / n, gb = members[i] % n;
        for (std::size_t j = 0; j <= i; ++j) {
            const int ra = members[j] / n, ga = members[j] % n;
            const int c1 = model.pair_tab[rb * sz + ra];
            try_add(model.index(model.gradient.reflections[ra * sz + rb],
                                model.add(gb, model.scale(-c1, ga))));
            const int c2 = model.pair_tab[ra * sz + rb];
            try_add(model.index(model.gradient.reflections[rb * sz + ra],
                                model.add(ga, model.scale(-c2, gb))));
            if (cnt == target) return true;
        }
    }
    return false;
}

struct Subgroup {
    std::vector<char> in;
    std::vector<int> elems;  // sorted
};

Subgroup generate_subgroup(const QuotientModel& model, const std::vector<int>& gens) {
    const int n = model.order;
    Subgroup H;
    H.in.assign(n, 0);
    H.in[0] = 1;
    H.elems.push_back(0);
    for (int g : gens)
        if (!H.in[g]) {
            H.in[g] = 1;
            H.elems.push_back(g);
        }
    for (std::size_t i = 0; i < H.elems.size(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            for (int s : {model.add(H.elems[i], H.elems[j]),
                          model.add(H.elems[i], model.neg_tab[H.elems[j]])}) {
                if (!H.in[s]) {
                    H.in[s] = 1;
                    H.elems.push_back(s);
                }
            }
        }
    }
    std::sort(H.elems.begin(), H.elems.end());
    return H;
}

std::vector<Subgroup> all_subgroups(const QuotientModel& model) {
    const int n = model.order;
    std::set<std::vector<int>> seen;
    std::vector<Subgroup> out;
    auto push = [&](Subgroup H) {
        if (seen.insert(H.elems).second) out.push_back(std::move(H));
    };
    push(generate_subgroup(model, {}));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::vector<int> base = out[i].elems;
        for (int g = 0; g < n; ++g) {
            if (std::binary_search(base.begin(), base.end(), g)) continue;
            auto gens = base;
            gens.push_back(g);
            push(generate_subgroup(model, gens));
        }
    }
    return out;
}

/// Ascending coset representatives of G / H (the representative of H itself,
/// which is 0, comes first).
std::vector<int> transversal(const QuotientModel& model, const Subgroup& H) {
    const int n = model.order;
    std::vector<char> covered(n, 0);
    std::vector<int> reps;
    for (int g = 0; g < n; ++g) {
        if (covered[g]) continue;
        reps.push_back(g);
        for (int h : H.elems) covered[model.add(g, h)] = 1;
    }
    return reps;
}

struct ClassOption {
    std::vector<char> in;
    bool is_union = false;
};

/// Fiber patterns tried for one length class: the whole image, one coset of
/// each subgroup (nonzero base points only for the divisible class, whose
/// image may be a shifted coset), and unions of up to five extra cosets of a
/// subgroup of index at most six.  Patterns escaping the class image are
/// dropped.
std::vector<ClassOption> class_options(const QuotientModel& model, const std::vector<char>& image,
                                       const std::vector<Subgroup>& subgroups, bool allow_offsets) {
    const int n = model.order;
    std::set<std::vector<char>> dedupe;
    std::vector<ClassOption> out;
    auto push = [&](const std::vector<char>& pat, bool uni) {
        for (int g = 0; g < n; ++g)
            if (pat[g] && !image[g]) return;
        if (dedupe.insert(pat).second) out.push_back({pat, uni});
    };

    push(image, false);
    for (const auto& H : subgroups) {
        const auto reps = transversal(model, H);
        const std::vector<int> zero_only = {0};
        const auto& offsets = allow_offsets ? reps : zero_only;
        for (int b : offsets) {
            std::vector<char> pat(n, 0);
            for (int h : H.elems) pat[model.add(b, h)] = 1;
            push(pat, false);
        }
        const int index = n / static_cast<int>(H.elems.size());
        if (index < 2 || index > 6) continue;
        const unsigned extra = static_cast<unsigned>(index - 1);
        for (unsigned mask = 1; mask + 1 < (1u << extra); ++mask) {
            for (int b : offsets) {
                std::vector<char> pat(n, 0);
                for (int h : H.elems) pat[model.add(b, h)] = 1;
                for (unsigned t = 0; t < extra; ++t) {
                    if (!(mask & (1u << t))) continue;
                    for (int h : H.elems) pat[model.add(b, model.add(reps[t + 1], h))] = 1;
                }
                push(pat, true);
            }
        }
    }
    return out;
}

/// Integer expansion of every root over the given simple system, obtained by
/// propagating unit vectors through simple reflections; a divisible root
/// expands as twice its half.
std::vector<std::vector<int>> root_coefficients(const FiniteRootSystem& R,
                                                const std::vector<int>& simples) {
    const int sz = R.size();
    const int rank = static_cast<int>(simples.size());
    std::vector<std::vector<int>> co(sz);
    std::vector<int> queue;
    for (int j = 0; j < rank; ++j) {
        co[simples[j]].assign(rank, 0);
        co[simples[j]][j] = 1;
        queue.push_back(simples[j]);
    }
    for (std::size_t i = 0; i < queue.size(); ++i) {
        const int b = queue[i];
        for (int j = 0; j < rank; ++j) {
            const int a = simples[j];
            const int t = R.reflections[a * sz + b];
            if (!co[t].empty()) continue;
            const int c = pairing(R.roots[b].coords, R.roots[a].coords).convert_to<int>();
            co[t] = co[b];
            for (int x = 0; x < rank; ++x) co[t][x] -= c * co[a][x];
            queue.push_back(t);
        }
    }
    for (int r = 0; r < sz; ++r) {
        if (!co[r].empty() || R.roots[r].length_class != LengthClass::Divisible) continue;
        Vec half(R.roots[r].coords.size());
        for (std::size_t i = 0; i < half.size(); ++i) half[i] = R.roots[r].coords[i] / 2;
        const int h = root_index(R, half);
        if (h < 0 || co[h].empty())
            throw validation_error("not-a-root", "divisible root without an expanded half");
        co[r] = co[h];
        for (int x = 0; x < rank; ++x) co[r][x] *= 2;
    }
    for (int r = 0; r < sz; ++r)
        if (co[r].empty())
            throw validation_error("not-a-simple-system",
                                   "reflection propagation missed a root while expanding");
    return co;
}

}  // namespace

int QuotientModel::add(int g, int h) const {
    if (!add_tab.empty()) return add_tab[g * order + h];
    const Vec& a = group.elements()[static_cast<std::size_t>(g)];
    const Vec& b = group.elements()[static_cast<std::size_t>(h)];
    return group.index_of(group.reduce(vec_sum(a, b)));
}

int QuotientModel::scale(int c, int g) const {
    if (c >= -4 && c <= 4) return scale_tab[(c + 4) * order + g];
    int res = 0;
    const int step = c > 0 ? g : neg_tab[g];
    for (int i = c > 0 ? c : -c; i > 0; --i) res = add(res, step);
    return res;
}

long oracle_budget(long override_) {
    if (override_ > 0) return override_;
    if (const char* env = std::getenv("REFLECTA_ORACLE_BUDGET")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return v;
    }
    return 4096;
}

QuotientModel build_model(const AffineReflectionSystem& parent,
                          const std::vector<Lattice>& extra_lattices, long budget) {
    const long limit = oracle_budget(budget);
    const FiniteRootSystem& R = parent.gradient;
    const ExtensionDatum& D = parent.datum;
    const int k = D.nullity;

    Lattice ambient = cu_span(D.lambda_s);
    Lattice core = ambient;
    auto refine = [&](const Lattice& L) { core = lat_intersect(core, L); };
    refine(D.lambda_s.base);
    refine(D.lambda_ell.base);
    if (D.lambda_d) refine(D.lambda_d->base);
    for (const Lattice& e : extra_lattices) {
        if (e.dim != k)
            throw validation_error("dimension-mismatch",
                                   "extra lattice dimension does not match the nullity");
        refine(e);
    }
    Lattice modulus = lat_scale(core, Int(2 * R.lacing));

    FiniteQuotient group = k == 0 ? FiniteQuotient(ambient, modulus, {Vec{}})
                                  : quotient(ambient, modulus);
    if (static_cast<long>(group.order()) > limit)
        throw budget_error("model order " + std::to_string(group.order()) +
                           " exceeds the budget " + std::to_string(limit));

    QuotientModel model{R, D, std::move(group), std::move(modulus), 0, {}, {}, {}, {}, {}, {}};
    model.order = static_cast<int>(model.group.order());
    const int n = model.order;
    const int sz = R.size();

    model.class_in.assign(3, {});
    for (LengthClass c : {LengthClass::Short, LengthClass::Long, LengthClass::Divisible}) {
        if (class_roots(R, c).empty()) continue;
        const CosetUnion& fiber = lambda_for(D, c);
        if (!sublattice_of(model.modulus, fiber.base))
            throw validation_error("not-periodic",
                                   "a class fiber is not periodic modulo the model modulus");
        auto& image = model.class_in[slot_of(c)];
        image.assign(n, 0);
        for (int g = 0; g < n; ++g)
            image[g] = cu_contains(fiber, model.group.elements()[static_cast<std::size_t>(g)]) ? 1 : 0;
    }

    model.neg_tab.assign(n, 0);
    model.scale_tab.assign(9 * n, 0);
    if (k > 0) {
        for (int c = -4; c <= 4; ++c) {
            for (int g = 0; g < n; ++g) {
                const Vec scaled =
                    vec_mul(Int(c), model.group.elements()[static_cast<std::size_t>(g)]);
                model.scale_tab[(c + 4) * n + g] = model.group.index_of(model.group.reduce(scaled));
            }
        }
        for (int g = 0; g < n; ++g) model.neg_tab[g] = model.scale_tab[3 * n + g];
        if (n <= 2048) {
            model.add_tab.assign(static_cast<std::size_t>(n) * n, 0);
            for (int g = 0; g < n; ++g) {
                const Vec& a = model.group.elements()[static_cast<std::size_t>(g)];
                for (int h = 0; h < n; ++h) {
                    const Vec& b = model.group.elements()[static_cast<std::size_t>(h)];
                    model.add_tab[static_cast<std::size_t>(g) * n + h] =
                        model.group.index_of(model.group.reduce(vec_sum(a, b)));
                }
            }
        }
    } else {
        model.add_tab.assign(1, 0);
    }

    model.pair_tab.assign(static_cast<std::size_t>(sz) * sz, 0);
    for (int b = 0; b < sz; ++b)
        for (int a = 0; a < sz; ++a)
            model.pair_tab[static_cast<std::size_t>(b) * sz + a] =
                pairing(R.roots[b].coords, R.roots[a].coords).convert_to<int>();

    model.full.resize(static_cast<std::size_t>(sz) * n);
    for (int r = 0; r < sz; ++r) {
        const auto& image = model.class_in[slot_of(R.roots[r].length_class)];
        for (int g = 0; g < n; ++g)
            if (image[g]) model.full.set(static_cast<std::size_t>(model.index(r, g)));
    }
    return model;
}

ModelSet closure(const QuotientModel& model, ModelSet seed) {
    check_model_set(model, seed, "closure seed");
    const int n = model.order;
    const int sz = model.size();
    ModelSet S = std::move(seed);
    std::vector<int> members;
    members.reserve(S.count());
    for (auto b = S.find_first(); b != ModelSet::npos; b = S.find_next(b))
        members.push_back(static_cast<int>(b));

    auto try_add = [&](int bit) {
        if (!model.full.test(static_cast<std::size_t>(bit)))
            throw validation_error("not-a-model-set",
                                   "reflection left the model's root set; the model is inconsistent");
        if (!S.test(static_cast<std::size_t>(bit))) {
            S.set(static_cast<std::size_t>(bit));
            members.push_back(bit);
        }
    };
    for (std::size_t i = 0; i < members.size(); ++i) {
        const int rb = members[i] / n, gb = members[i] % n;
        for (std::size_t j = 0; j <= i; ++j) {
            const int ra = members[j] / n, ga = members[j] % n;
            const int c1 = model.pair_tab[rb * sz + ra];
            try_add(model.index(model.gradient.reflections[ra * sz + rb],
                                model.add(gb, model.scale(-c1, ga))));
            const int c2 = model.pair_tab[ra * sz + rb];
            try_add(model.index(model.gradient.reflections[rb * sz + ra],
                                model.add(ga, model.scale(-c2, gb))));
        }
    }
    return S;
}

bool oracle_is_maximal(const QuotientModel& model, const ModelSet& S) {
    check_model_set(model, S, "candidate");
    if (S == model.full)
        throw validation_error("not-proper", "the full root set has no complement to test");
    if (closure(model, S) != S)
        throw validation_error("not-closed", "maximality is only defined for closed sets");

    const int n = model.order;
    const int sz = model.size();
    std::vector<int> members;
    for (auto b = S.find_first(); b != ModelSet::npos; b = S.find_next(b))
        members.push_back(static_cast<int>(b));

    ModelSet complement = model.full & ~S;
    ModelSet visited(S.size());
    for (auto b = complement.find_first(); b != ModelSet::npos; b = complement.find_next(b)) {
        if (visited.test(b)) continue;
        // Orbit of b under reflections by members of S; all members of one
        // orbit close to the same set, so one test per orbit suffices.
        std::vector<int> orbit{static_cast<int>(b)};
        visited.set(b);
        for (std::size_t i = 0; i < orbit.size(); ++i) {
            const int rx = orbit[i] / n, gx = orbit[i] % n;
            for (int m : members) {
                const int ra = m / n, ga = m % n;
                const int c = model.pair_tab[rx * sz + ra];
                const int y = model.index(model.gradient.reflections[ra * sz + rx],
                                          model.add(gx, model.scale(-c, ga)));
                if (!visited.test(static_cast<std::size_t>(y))) {
                    visited.set(static_cast<std::size_t>(y));
                    orbit.push_back(y);
                }
            }
        }
        if (!extends_to_full(model, S, static_cast<int>(b))) return false;
    }
    return true;
}

std::vector<ModelSet> oracle_enumerate_maximal(const QuotientModel& model) {
    const FiniteRootSystem& R = model.gradient;
    if (R.type.rank > 3)
        throw validation_error("rank-bound", "maximal-set enumeration is limited to rank 3");
    const int n = model.order;
    const int sz = R.size();
    const std::size_t bits = model.full.size();

    std::set<ModelSet> base_shapes;

    // Full-fiber images of the maximal gradient subsystems.
    for (const auto& sub : finite_maximal_subsystems(R)) {
        ModelSet S(bits);
        for (int r : sub)
            for (int g = 0; g < n; ++g)
                if (model.valid(r, g)) S.set(static_cast<std::size_t>(model.index(r, g)));
        base_shapes.insert(S);
    }

    // Uniform per-class fiber patterns on the full gradient.
    const auto subgroups = all_subgroups(model);
    std::vector<int> slots;
    std::vector<std::vector<ClassOption>> options;
    for (int s = 0; s < 3; ++s) {
        if (model.class_in[s].empty()) continue;
        slots.push_back(s);
        options.push_back(class_options(model, model.class_in[s], subgroups,
                                        s == slot_of(LengthClass::Divisible)));
    }
    long combos = 1;
    for (const auto& o : options) combos *= static_cast<long>(o.size());
    if (combos > 500000)
        throw budget_error("fiber-pattern enumeration would try " + std::to_string(combos) +
                           " combinations");

    // With uniform per-class patterns on the full gradient, closedness is
    // equivalent to the class-level transport conditions, one per (class,
    // class, pairing) triple that the gradient realizes.
    std::set<std::array<int, 3>> triples;
    for (int b = 0; b < sz; ++b)
        for (int a = 0; a < sz; ++a) {
            const int c = model.pair_tab[b * sz + a];
            if (c != 0)
                triples.insert({slot_of(R.roots[b].length_class),
                                slot_of(R.roots[a].length_class), c});
        }
    auto transport_ok = [&](const std::vector<const std::vector<char>*>& pat_by_slot) {
        for (const auto& t : triples) {
            const auto& pb = *pat_by_slot[static_cast<std::size_t>(t[0])];
            const auto& pa = *pat_by_slot[static_cast<std::size_t>(t[1])];
            for (int x = 0; x < n; ++x) {
                if (!pb[x]) continue;
                for (int y = 0; y < n; ++y) {
                    if (!pa[y]) continue;
                    if (!pb[model.add(x, model.scale(-t[2], y))]) return false;
                }
            }
        }
        return true;
    };

    std::vector<std::size_t> pick(options.size(), 0);
    std::vector<int> slot_pos(3, -1);
    for (std::size_t i = 0; i < slots.size(); ++i) slot_pos[slots[i]] = static_cast<int>(i);
    bool done = options.empty();
    while (!done) {
        int unions = 0;
        for (std::size_t i = 0; i < pick.size(); ++i)
            if (options[i][pick[i]].is_union) ++unions;
        if (unions <= 1) {
            std::vector<const std::vector<char>*> pat_by_slot(3, nullptr);
            for (std::size_t i = 0; i < slots.size(); ++i)
                pat_by_slot[static_cast<std::size_t>(slots[i])] = &options[i][pick[i]].in;
            if (transport_ok(pat_by_slot)) {
                ModelSet S(bits);
                for (int r = 0; r < sz; ++r) {
                    const auto& pat = *pat_by_slot[static_cast<std::size_t>(
                        slot_of(R.roots[r].length_class))];
                    for (int g = 0; g < n; ++g)
                        if (pat[g]) S.set(static_cast<std::size_t>(model.index(r, g)));
                }
                if (S != model.full && S.any() && closure(model, S) == S) base_shapes.insert(S);
            }
        }
        std::size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < options[i].size()) break;
            pick[i] = 0;
        }
        done = i == pick.size();
    }

    // Exact maximality filter before spending work on translates.
    std::vector<ModelSet> max_bases;
    for (const auto& S : base_shapes)
        if (oracle_is_maximal(model, S)) max_bases.push_back(S);

    // Consistent translations: add a group value to every fiber, linear over
    // the gradient.  Translates that stay inside the model's root set are
    // themselves closed; maximality is re-checked exactly afterwards.
    // Two assignments whose coordinates differ by elements of a shape's
    // pattern stabiliser (the group elements shifting every fiber onto
    // itself) produce the same translate, so assignments are enumerated over
    // a transversal of that stabiliser, shape by shape.
    std::set<ModelSet> results(max_bases.begin(), max_bases.end());
    if (!max_bases.empty() && sz > 0) {
        std::vector<int> all(sz);
        for (int r = 0; r < sz; ++r) all[r] = r;
        const auto simples = simple_system(R, all);
        const auto co = root_coefficients(R, simples);
        const int rank = static_cast<int>(simples.size());
        for (const auto& base : max_bases) {
            std::vector<int> stab;
            for (int t = 0; t < n; ++t) {
                bool fixes = true;
                for (int r = 0; r < sz && fixes; ++r)
                    for (int g = 0; g < n; ++g) {
                        const bool in_g =
                            base.test(static_cast<std::size_t>(model.index(r, g)));
                        const bool in_sh = base.test(
                            static_cast<std::size_t>(model.index(r, model.add(g, t))));
                        if (in_g != in_sh) {
                            fixes = false;
                            break;
                        }
                    }
                if (fixes) stab.push_back(t);
            }
            std::vector<char> seen(static_cast<std::size_t>(n), 0);
            std::vector<int> reps;
            for (int g = 0; g < n; ++g) {
                if (seen[static_cast<std::size_t>(g)]) continue;
                reps.push_back(g);
                for (int t : stab) seen[static_cast<std::size_t>(model.add(g, t))] = 1;
            }
            const int nreps = static_cast<int>(reps.size());
            long total = 1;
            for (int j = 0; j < rank; ++j) {
                total *= nreps;
                if (total > 300000)
                    throw budget_error(
                        "translation enumeration would try too many assignments");
            }
            std::vector<int> phi(static_cast<std::size_t>(rank), 0);
            bool phi_done = rank == 0;
            while (!phi_done) {
                std::vector<int> val(sz, 0);
                for (int r = 0; r < sz; ++r) {
                    int acc = 0;
                    for (int j = 0; j < rank; ++j)
                        if (co[r][j] != 0)
                            acc = model.add(acc,
                                            model.scale(co[r][j],
                                                        reps[static_cast<std::size_t>(
                                                            phi[static_cast<std::size_t>(
                                                                j)])]));
                    val[r] = acc;
                }
                ModelSet T(bits);
                bool ok = true;
                for (auto b = base.find_first(); b != ModelSet::npos;
                     b = base.find_next(b)) {
                    const int r = static_cast<int>(b) / n;
                    const int g2 = model.add(static_cast<int>(b) % n, val[r]);
                    const int nb = model.index(r, g2);
                    if (!model.full.test(static_cast<std::size_t>(nb))) {
                        ok = false;
                        break;
                    }
                    T.set(static_cast<std::size_t>(nb));
                }
                if (ok) results.insert(T);
                std::size_t j = 0;
                for (; j < phi.size(); ++j) {
                    if (++phi[j] < nreps) break;
                    phi[j] = 0;
                }
                phi_done = j == phi.size();
            }
        }
    }

    // Translates of a maximal set need not be maximal (the translation need
    // not preserve the class images), so the seed list is filtered exactly.
    std::vector<ModelSet> out;
    for (const auto& S : results)
        if (oracle_is_maximal(model, S)) out.push_back(S);

    // Completion proof.  A maximal closed set missing from `out` contains,
    // for every listed set M, an element outside M; so a depth-first search
    // over closed sets that hit the complement of each listed set in turn
    // either produces a closed proper set escaping the whole list — which is
    // then grown to a new maximal set — or proves the list complete.  The
    // pattern seeding above only accelerates this loop; completeness does
    // not depend on it.
    long closure_budget = 500000;
    auto guarded_closure = [&](ModelSet seed) {
        if (--closure_budget < 0)
            throw budget_error("maximal-set completion exceeded its search budget");
        return closure(model, std::move(seed));
    };
    std::set<std::pair<std::size_t, ModelSet>> memo;
    std::function<std::optional<ModelSet>(const ModelSet&, std::size_t)> escape =
        [&](const ModelSet& C, std::size_t idx) -> std::optional<ModelSet> {
        if (idx == out.size()) return C;
        if (!C.is_subset_of(out[idx])) return escape(C, idx + 1);
        if (!memo.insert({idx, C}).second) return std::nullopt;
        const ModelSet candidates = model.full & ~out[idx];
        for (auto b = candidates.find_first(); b != ModelSet::npos;
             b = candidates.find_next(b)) {
            ModelSet seed = C;
            seed.set(b);
            ModelSet C2 = guarded_closure(std::move(seed));
            if (C2 == model.full) continue;
            if (auto r = escape(C2, idx + 1)) return r;
        }
        return std::nullopt;
    };
    while (true) {
        memo.clear();
        auto esc = escape(guarded_closure(ModelSet(bits)), 0);
        if (!esc) break;
        // Grow the escapee until every further element closes to the full
        // set; elements that do so stay dead for every superset, so each is
        // tried at most once.
        ModelSet C = *esc;
        ModelSet dead(bits);
        bool grew = true;
        while (grew) {
            grew = false;
            const ModelSet cand = model.full & ~C & ~dead;
            for (auto b = cand.find_first(); b != ModelSet::npos; b = cand.find_next(b)) {
                ModelSet seed = C;
                seed.set(b);
                ModelSet C2 = guarded_closure(std::move(seed));
                if (C2 == model.full) {
                    dead.set(b);
                    continue;
                }
                C = std::move(C2);
                grew = true;
                break;
            }
        }
        out.push_back(std::move(C));
    }

    std::sort(out.begin(), out.end(), [](const ModelSet& a, const ModelSet& b) {
        if (a.count() != b.count()) return a.count() > b.count();
        return a < b;
    });
    return out;
}

ModelSet model_set_of_spec(const QuotientModel& model, const SubsystemSpec& spec) {
    if (!spec.parent || !(spec.parent->gradient.type == model.gradient.type) ||
        spec.parent->gradient.size() != model.gradient.size())
        throw validation_error("spec-structure",
                               "the spec does not live over the modeled system");
    const int n = model.order;
    ModelSet S(model.full.size());
    for (int r : spec.gradient_sub.roots) {
        const CosetUnion fiber = fiber_of(spec, r);
        if (!sublattice_of(model.modulus, fiber.base))
            throw validation_error("not-periodic",
                                   "a spec fiber is not periodic modulo the model modulus; "
                                   "build the model with its base as an extra lattice");
        for (int g = 0; g < n; ++g) {
            if (!cu_contains(fiber, model.group.elements()[static_cast<std::size_t>(g)])) continue;
            if (model.valid(r, g)) S.set(static_cast<std::size_t>(model.index(r, g)));
        }
    }
    return S;
}

int model_index_of(const QuotientModel& model, const AffineRoot& root) {
    const int r = root_index(model.gradient, root.finite_part.coords);
    if (r < 0) return -1;
    if (static_cast<int>(root.translation.size()) != model.group.ambient().dim) return -1;
    if (!member(model.group.ambient(), root.translation)) return -1;
    const int g = model.group.index_of(model.group.reduce(root.translation));
    const int bit = model.index(r, g);
    return model.full.test(static_cast<std::size_t>(bit)) ? bit : -1;
}

AffineRoot model_lift(const QuotientModel& model, int bit_index) {
    if (bit_index < 0 || bit_index >= static_cast<int>(model.full.size()) ||
        !model.full.test(static_cast<std::size_t>(bit_index)))
        throw validation_error("not-a-model-set", "bit index outside the model's root set");
    const int r = bit_index / model.order;
    const int g = bit_index % model.order;
    return AffineRoot{model.gradient.roots[static_cast<std::size_t>(r)],
                      model.group.elements()[static_cast<std::size_t>(g)]};
}

}  // namespace reflecta
