#include "reflecta/rootsys.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <utility>

#include "reflecta/errors.hpp"

namespace reflecta {

namespace {

Vec unit(int dim, int i, long value) {
    Vec v(dim, Int(0));
    v[i] = value;
    return v;
}

void add_pair(std::vector<FiniteRoot>& out, Vec coords, LengthClass c) {
    Int n(0);
    for (const Int& x : coords) n += x * x;
    Vec neg = vec_neg(coords);
    out.push_back(FiniteRoot{std::move(coords), n, c});
    out.push_back(FiniteRoot{std::move(neg), n, c});
}

long long to_ll(const Int& x) { return x.convert_to<long long>(); }

int expected_count(const RootSystemType& t) {
    const int n = t.rank;
    switch (t.family) {
        case Family::A: return n * (n + 1);
        case Family::B:
        case Family::C: return 2 * n * n;
        case Family::D: return 2 * n * (n - 1);
        case Family::BC: return 2 * n * (n + 1);
        case Family::E6: return 72;
        case Family::E7: return 126;
        case Family::E8: return 240;
        case Family::F4: return 48;
        case Family::G2: return 12;
    }
    return -1;
}

/// E8 in doubled coordinates: ±2e_i±2e_j together with all (±1,…,±1) having
/// an even number of minus signs.
std::vector<Vec> e8_coords() {
    std::vector<Vec> out;
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j)
            for (int si : {1, -1})
                for (int sj : {1, -1}) {
                    Vec v(8, Int(0));
                    v[i] = 2 * si;
                    v[j] = 2 * sj;
                    out.push_back(std::move(v));
                }
    for (unsigned mask = 0; mask < 256; ++mask) {
        if (__builtin_popcount(mask) % 2) continue;
        Vec v(8, Int(0));
        for (int i = 0; i < 8; ++i) v[i] = (mask & (1u << i)) ? -1 : 1;
        out.push_back(std::move(v));
    }
    return out;
}

struct WordSet {
    std::vector<std::uint64_t> w;

    explicit WordSet(int n) : w((n + 63) / 64, 0) {}
    bool test(int i) const { return (w[i >> 6] >> (i & 63)) & 1; }
    void set(int i) { w[i >> 6] |= std::uint64_t(1) << (i & 63); }
    bool operator==(const WordSet& o) const { return w == o.w; }
    bool operator<(const WordSet& o) const { return w < o.w; }
    bool subset_of(const WordSet& o) const {
        for (std::size_t k = 0; k < w.size(); ++k)
            if (w[k] & ~o.w[k]) return false;
        return true;
    }
    int count() const {
        int c = 0;
        for (std::uint64_t word : w) c += __builtin_popcountll(word);
        return c;
    }
};

WordSet to_words(int n, const std::vector<int>& idx) {
    WordSet s(n);
    for (int i : idx) {
        if (i < 0 || i >= n) throw validation_error("index-out-of-range", "root index out of range");
        s.set(i);
    }
    return s;
}

std::vector<int> to_indices(const WordSet& s) {
    std::vector<int> out;
    for (std::size_t k = 0; k < s.w.size(); ++k) {
        std::uint64_t word = s.w[k];
        while (word) {
            int b = __builtin_ctzll(word);
            out.push_back(static_cast<int>(k) * 64 + b);
            word &= word - 1;
        }
    }
    return out;
}

WordSet close_set(const FiniteRootSystem& R, WordSet cur) {
    const int n = R.size();
    std::vector<int> work = to_indices(cur);
    for (std::size_t qi = 0; qi < work.size(); ++qi) {
        const int x = work[qi];
        for (std::size_t qj = 0; qj <= qi; ++qj) {
            const int y = work[qj];
            const int a = R.reflections[static_cast<std::size_t>(x) * n + y];
            const int b = R.reflections[static_cast<std::size_t>(y) * n + x];
            if (!cur.test(a)) {
                cur.set(a);
                work.push_back(a);
            }
            if (!cur.test(b)) {
                cur.set(b);
                work.push_back(b);
            }
        }
    }
    return cur;
}

WordSet full_set(int n) {
    WordSet s(n);
    for (int i = 0; i < n; ++i) s.set(i);
    return s;
}

bool maximal_in(const FiniteRootSystem& R, const WordSet& sub, const WordSet& full) {
    if (sub == full) return false;
    for (int g = 0; g < R.size(); ++g) {
        if (sub.test(g)) continue;
        WordSet grown = sub;
        grown.set(g);
        if (!(close_set(R, grown) == full)) return false;
    }
    return true;
}

/// Image of a subsystem under the reflection s_g (a permutation of roots).
WordSet apply_reflection(const FiniteRootSystem& R, int g, const WordSet& s) {
    const int n = R.size();
    WordSet out(n);
    for (int i : to_indices(s)) out.set(R.reflections[static_cast<std::size_t>(g) * n + i]);
    return out;
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::A: return "A";
        case Family::B: return "B";
        case Family::C: return "C";
        case Family::D: return "D";
        case Family::E6: return "E6";
        case Family::E7: return "E7";
        case Family::E8: return "E8";
        case Family::F4: return "F4";
        case Family::G2: return "G2";
        case Family::BC: return "BC";
    }
    return "?";
}

std::string type_name(const RootSystemType& t) {
    switch (t.family) {
        case Family::A:
        case Family::B:
        case Family::C:
        case Family::D:
        case Family::BC: return family_name(t.family) + std::to_string(t.rank);
        default: return family_name(t.family);
    }
}

Int dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw validation_error("dimension-mismatch", "dot of unequal dims");
    Int s(0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Int pairing(const Vec& beta, const Vec& alpha) {
    Int num = 2 * dot(beta, alpha);
    Int den = dot(alpha, alpha);
    if (den == 0) throw validation_error("zero-root", "pairing against the zero vector");
    if (num % den != 0) throw validation_error("pairing-not-integral", "Cartan pairing is not an integer");
    return num / den;
}

Vec reflect_vec(const Vec& alpha, const Vec& beta) {
    Int p = pairing(beta, alpha);
    Vec out = beta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= p * alpha[i];
    return out;
}

FiniteRootSystem build(RootSystemType t) {
    const int n = t.rank;
    auto require_rank = [&](bool ok) {
        if (!ok)
            throw validation_error("invalid-rank",
                                   "invalid rank " + std::to_string(n) + " for family " + family_name(t.family));
    };

    FiniteRootSystem R;
    R.type = t;
    std::vector<FiniteRoot>& roots = R.roots;

    switch (t.family) {
        case Family::A: {
            require_rank(n >= 1);
            R.dim = n + 1;
            R.lacing = 1;
            for (int i = 0; i <= n; ++i)
                for (int j = i + 1; j <= n; ++j) {
                    Vec v(R.dim, Int(0));
                    v[i] = 1;
                    v[j] = -1;
                    add_pair(roots, std::move(v), LengthClass::Long);
                }
            break;
        }
        case Family::B: {
            require_rank(n >= 2);
            R.dim = n;
            R.lacing = 2;
            for (int i = 0; i < n; ++i) add_pair(roots, unit(n, i, 1), LengthClass::Short);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    for (int sj : {1, -1}) {
                        Vec v(n, Int(0));
                        v[i] = 1;
                        v[j] = sj;
                        add_pair(roots, std::move(v), LengthClass::Long);
                    }
            break;
        }
        case Family::C: {
            require_rank(n >= 2);
            R.dim = n;
            R.lacing = 2;
            for (int i = 0; i < n; ++i) add_pair(roots, unit(n, i, 2), LengthClass::Long);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    for (int sj : {1, -1}) {
                        Vec v(n, Int(0));
                        v[i] = 1;
                        v[j] = sj;
                        add_pair(roots, std::move(v), LengthClass::Short);
                    }
            break;
        }
        case Family::D: {
            require_rank(n >= 3);
            R.dim = n;
            R.lacing = 1;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    for (int sj : {1, -1}) {
                        Vec v(n, Int(0));
                        v[i] = 1;
                        v[j] = sj;
                        add_pair(roots, std::move(v), LengthClass::Long);
                    }
            break;
        }
        case Family::BC: {
            require_rank(n >= 2);
            R.dim = n;
            R.lacing = 4;
            for (int i = 0; i < n; ++i) add_pair(roots, unit(n, i, 1), LengthClass::Short);
            for (int i = 0; i < n; ++i) add_pair(roots, unit(n, i, 2), LengthClass::Divisible);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    for (int sj : {1, -1}) {
                        Vec v(n, Int(0));
                        v[i] = 1;
                        v[j] = sj;
                        add_pair(roots, std::move(v), LengthClass::Long);
                    }
            break;
        }
        case Family::G2: {
            require_rank(n == 2);
            R.dim = 3;
            R.lacing = 3;
            for (int i = 0; i < 3; ++i)
                for (int j = i + 1; j < 3; ++j) {
                    Vec v(3, Int(0));
                    v[i] = 1;
                    v[j] = -1;
                    add_pair(roots, std::move(v), LengthClass::Short);
                }
            for (int k = 0; k < 3; ++k) {
                Vec v(3, Int(1));
                v[k] = -2;
                add_pair(roots, std::move(v), LengthClass::Long);
            }
            break;
        }
        case Family::F4: {
            require_rank(n == 4);
            R.dim = 4;
            R.lacing = 2;
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j)
                    for (int sj : {1, -1}) {
                        Vec v(4, Int(0));
                        v[i] = 2;
                        v[j] = 2 * sj;
                        add_pair(roots, std::move(v), LengthClass::Long);
                    }
            for (int i = 0; i < 4; ++i) add_pair(roots, unit(4, i, 2), LengthClass::Short);
            for (unsigned mask = 0; mask < 8; ++mask) {
                Vec v(4, Int(0));
                v[0] = 1;
                for (int i = 1; i < 4; ++i) v[i] = (mask & (1u << (i - 1))) ? -1 : 1;
                add_pair(roots, std::move(v), LengthClass::Short);
            }
            break;
        }
        case Family::E8:
        case Family::E7:
        case Family::E6: {
            const int want = t.family == Family::E8 ? 8 : t.family == Family::E7 ? 7 : 6;
            require_rank(n == want);
            R.dim = 8;
            R.lacing = 1;
            for (Vec& v : e8_coords()) {
                if (want <= 7 && v[6] + v[7] != 0) continue;
                if (want <= 6 && v[5] + v[6] != 0) continue;
                Int norm(0);
                for (const Int& x : v) norm += x * x;
                roots.push_back(FiniteRoot{std::move(v), norm, LengthClass::Long});
            }
            break;
        }
    }

    std::sort(roots.begin(), roots.end(),
              [](const FiniteRoot& a, const FiniteRoot& b) { return a.coords < b.coords; });

    const int N = R.size();
    if (N != expected_count(t))
        throw validation_error("bad-root-count", "realization of " + type_name(t) + " has wrong size");

    // Build the reflection table on an int64 shadow of the coordinates; this
    // simultaneously certifies pairing integrality and reflection closure.
    std::vector<std::vector<long long>> c64(N);
    std::map<std::vector<long long>, int> index;
    std::vector<long long> norm64(N);
    for (int i = 0; i < N; ++i) {
        c64[i].reserve(R.dim);
        for (const Int& x : roots[i].coords) c64[i].push_back(to_ll(x));
        norm64[i] = to_ll(roots[i].norm_sq);
        if (!index.emplace(c64[i], i).second)
            throw validation_error("duplicate-root", "duplicate root in realization");
    }
    R.reflections.assign(static_cast<std::size_t>(N) * N, -1);
    for (int a = 0; a < N; ++a) {
        for (int b = 0; b < N; ++b) {
            long long num = 0;
            for (int k = 0; k < R.dim; ++k) num += c64[b][k] * c64[a][k];
            num *= 2;
            if (num % norm64[a] != 0)
                throw validation_error("pairing-not-integral", "non-integral pairing in realization");
            const long long p = num / norm64[a];
            std::vector<long long> img(R.dim);
            for (int k = 0; k < R.dim; ++k) img[k] = c64[b][k] - p * c64[a][k];
            auto it = index.find(img);
            if (it == index.end())
                throw validation_error("not-reflection-closed", "realization not closed under reflections");
            R.reflections[static_cast<std::size_t>(a) * N + b] = it->second;
        }
    }
    return R;
}

int root_index(const FiniteRootSystem& R, const Vec& coords) {
    auto it = std::lower_bound(R.roots.begin(), R.roots.end(), coords,
                               [](const FiniteRoot& r, const Vec& v) { return r.coords < v; });
    if (it == R.roots.end() || !(it->coords == coords)) return -1;
    return static_cast<int>(it - R.roots.begin());
}

int reflect(const FiniteRootSystem& R, int alpha, int beta) {
    const int n = R.size();
    if (alpha < 0 || alpha >= n || beta < 0 || beta >= n)
        throw validation_error("index-out-of-range", "root index out of range");
    return R.reflections[static_cast<std::size_t>(alpha) * n + beta];
}

std::vector<int> class_roots(const FiniteRootSystem& R, LengthClass c) {
    std::vector<int> out;
    for (int i = 0; i < R.size(); ++i)
        if (R.roots[i].length_class == c) out.push_back(i);
    return out;
}

std::vector<int> closure(const FiniteRootSystem& R, const std::vector<int>& seed) {
    return to_indices(close_set(R, to_words(R.size(), seed)));
}

bool is_finite_subsystem(const FiniteRootSystem& R, const std::vector<int>& subset) {
    if (subset.empty()) return false;
    WordSet s = to_words(R.size(), subset);
    return close_set(R, s) == s;
}

bool is_finite_maximal(const FiniteRootSystem& R, const std::vector<int>& subset) {
    if (!is_finite_subsystem(R, subset)) return false;
    return maximal_in(R, to_words(R.size(), subset), full_set(R.size()));
}

FiniteSubsystem make_subsystem(const FiniteRootSystem& R, std::vector<int> roots) {
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    if (!is_finite_subsystem(R, roots))
        throw validation_error("not-a-subsystem", "subset is not closed under reflections");
    return FiniteSubsystem{&R, std::move(roots)};
}

Int positivity_value(const FiniteRootSystem& R, const Vec& coords) {
    Int biggest(0);
    for (const FiniteRoot& r : R.roots)
        for (const Int& x : r.coords)
            if (abs(x) > biggest) biggest = abs(x);
    const Int N = biggest + 1;
    Int value(0);
    for (int i = 0; i < R.dim; ++i) value = value * N + coords[i];
    return value;
}

std::vector<int> simple_system(const FiniteRootSystem& R, const std::vector<int>& subset) {
    if (subset.empty()) throw validation_error("empty-subsystem", "simple system of an empty set");
    std::vector<int> positives;
    std::set<Vec> member;
    for (int i : subset) {
        if (i < 0 || i >= R.size()) throw validation_error("index-out-of-range", "root index out of range");
        if (positivity_value(R, R.roots[i].coords) > 0) {
            positives.push_back(i);
            member.insert(R.roots[i].coords);
        }
    }
    std::vector<int> simples;
    for (int i : positives) {
        bool decomposable = false;
        for (int q : positives) {
            Vec rest = vec_sub(R.roots[i].coords, R.roots[q].coords);
            if (!vec_is_zero(rest) && member.count(rest)) {
                decomposable = true;
                break;
            }
        }
        if (!decomposable) simples.push_back(i);
    }
    return simples;
}

std::vector<std::vector<int>> brute_force_maximal_subsystems(const FiniteRootSystem& R, int max_positive) {
    std::vector<int> positives;
    for (int i = 0; i < R.size(); ++i)
        if (positivity_value(R, R.roots[i].coords) > 0) positives.push_back(i);
    const int P = static_cast<int>(positives.size());
    if (P > max_positive)
        throw budget_error("too many positive roots (" + std::to_string(P) + ") for exhaustive enumeration");

    const WordSet full = full_set(R.size());
    std::set<WordSet> systems;
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << P); ++mask) {
        WordSet seed(R.size());
        for (int b = 0; b < P; ++b)
            if (mask & (std::uint64_t(1) << b)) seed.set(positives[b]);
        WordSet closed = close_set(R, seed);
        if (!(closed == full)) systems.insert(std::move(closed));
    }
    std::vector<WordSet> proper(systems.begin(), systems.end());
    std::vector<std::vector<int>> out;
    for (const WordSet& s : proper) {
        bool dominated = false;
        for (const WordSet& t : proper)
            if (!(s == t) && s.subset_of(t)) {
                dominated = true;
                break;
            }
        if (!dominated) out.push_back(to_indices(s));
    }
    std::sort(out.begin(), out.end(), [](const std::vector<int>& a, const std::vector<int>& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return out;
}

std::vector<std::vector<int>> finite_maximal_subsystems(const FiniteRootSystem& R, int rank_bound) {
    if (R.type.rank > rank_bound)
        throw validation_error("rank-above-bound", "rank exceeds the configured bound");
    const int N = R.size();
    const int n = R.type.rank;
    const WordSet full = full_set(N);

    std::vector<WordSet> seeds;
    auto add_seed = [&](const std::vector<int>& idx) {
        if (idx.empty()) return;
        seeds.push_back(close_set(R, to_words(N, idx)));
    };

    // Length-class sets and, for the non-reduced family, the class unions.
    const std::vector<int> shorts = class_roots(R, LengthClass::Short);
    const std::vector<int> longs = class_roots(R, LengthClass::Long);
    const std::vector<int> divisibles = class_roots(R, LengthClass::Divisible);
    add_seed(shorts);
    add_seed(longs);
    if (!divisibles.empty()) {
        std::vector<int> nd = shorts;
        nd.insert(nd.end(), longs.begin(), longs.end());
        add_seed(nd);  // drop the doubled roots
        std::vector<int> ld = longs;
        ld.insert(ld.end(), divisibles.begin(), divisibles.end());
        add_seed(ld);  // drop the short roots
    }

    // Coordinate-partition forms for the B/C/non-reduced realizations: the
    // two-sided condition "both indices inside J or both outside" is
    // symmetric under complement, so J is normalized to contain index 0.
    if (R.type.family == Family::B || R.type.family == Family::C || R.type.family == Family::BC) {
        auto part_of = [&](const Vec& v, unsigned J) -> bool {
            // True when the support of a two-index root lies within one side.
            int inside = 0, outside = 0;
            for (int k = 0; k < R.dim; ++k) {
                if (v[k] == 0) continue;
                if (J & (1u << k)) ++inside;
                else ++outside;
            }
            return inside == 0 || outside == 0;
        };
        for (unsigned J = 1; J + 1 < (1u << n); J += 2) {  // 0 ∈ J, J proper
            // Roots supported on one coordinate (all of ±ε_i, ±2ε_i) are kept
            // unconditionally; two-coordinate roots must respect the split.
            std::vector<int> idx;
            for (int i = 0; i < N; ++i) {
                const FiniteRoot& r = R.roots[i];
                int support = 0;
                for (int k = 0; k < R.dim; ++k)
                    if (r.coords[k] != 0) ++support;
                if (support == 1 || part_of(r.coords, J)) idx.push_back(i);
            }
            add_seed(idx);
        }
    }

    // Simple-system node deletions, plain and with the lowest root adjoined;
    // the latter is repeated with the lowest short root to cover the other
    // orientation of the diagram.
    std::vector<int> all(N);
    for (int i = 0; i < N; ++i) all[i] = i;
    const std::vector<int> simples = simple_system(R, all);
    std::vector<int> tops;
    auto argmax_value = [&](const std::vector<int>& pool) {
        int best = -1;
        Int best_value(0);
        for (int i : pool) {
            Int v = positivity_value(R, R.roots[i].coords);
            if (best < 0 || v > best_value) {
                best = i;
                best_value = v;
            }
        }
        return best;
    };
    tops.push_back(argmax_value(all));
    if (!shorts.empty() && !longs.empty()) tops.push_back(argmax_value(shorts));
    for (std::size_t drop = 0; drop < simples.size(); ++drop) {
        std::vector<int> base;
        for (std::size_t k = 0; k < simples.size(); ++k)
            if (k != drop) base.push_back(simples[k]);
        add_seed(base);
        for (int top : tops) {
            std::vector<int> extended = base;
            extended.push_back(reflect(R, top, top));  // the negative of the top root
            add_seed(extended);
        }
    }

    // Keep the maximal seeds, then expand each one to its full orbit under
    // the reflection action (maximality is invariant under it).
    std::set<WordSet> found;
    std::vector<WordSet> queue;
    for (const WordSet& s : seeds) {
        if (found.count(s) || !maximal_in(R, s, full)) continue;
        found.insert(s);
        queue.push_back(s);
    }
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        WordSet cur = queue[qi];
        for (int g = 0; g < N; ++g) {
            WordSet img = apply_reflection(R, g, cur);
            if (found.insert(img).second) queue.push_back(img);
        }
    }

    std::vector<std::vector<int>> out;
    for (const WordSet& s : found) out.push_back(to_indices(s));
    std::sort(out.begin(), out.end(), [](const std::vector<int>& a, const std::vector<int>& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return out;
}

}  // namespace reflecta
