#include "reflecta/lattice.hpp"

#include <algorithm>
#include <sstream>

#include "reflecta/errors.hpp"

namespace reflecta {

std::string vec_to_string(const Vec& v) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    os << ")";
    return os.str();
}

std::string mat_to_string(const Mat& m) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) os << " ";
        os << vec_to_string(m[i]);
    }
    os << "]";
    return os.str();
}

namespace {

void row_sub(Vec& a, const Vec& b, const Int& q) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= q * b[i];
}

void row_negate(Vec& a) {
    for (Int& x : a) x = -x;
}

std::size_t pivot_col(const Vec& row) {
    for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j] != 0) return j;
    throw validation_error("zero-row", "zero row in HNF basis");
}

bool is_prime(const Int& p) {
    if (p < 2) return false;
    for (Int d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

}  // namespace

namespace detail {

int hnf_rows(Mat& work, Mat* U) {
    const std::size_t r = work.size();
    const std::size_t n = r ? work[0].size() : 0;
    if (U) {
        U->assign(r, Vec(r));
        for (std::size_t i = 0; i < r; ++i) (*U)[i][i] = 1;
    }
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < r; ++col) {
        for (;;) {
            // Pick the smallest non-zero entry in this column at or below
            // `row` as the working pivot.
            std::size_t best = r;
            for (std::size_t i = row; i < r; ++i) {
                if (work[i][col] == 0) continue;
                if (best == r || abs(work[i][col]) < abs(work[best][col])) best = i;
            }
            if (best == r) break;  // column finished (zero below `row`)
            if (best != row) {
                std::swap(work[best], work[row]);
                if (U) std::swap((*U)[best], (*U)[row]);
            }
            bool leftover = false;
            for (std::size_t i = row + 1; i < r; ++i) {
                if (work[i][col] == 0) continue;
                Int q = work[i][col] / work[row][col];
                if (q != 0) {
                    row_sub(work[i], work[row], q);
                    if (U) row_sub((*U)[i], (*U)[row], q);
                }
                if (work[i][col] != 0) leftover = true;
            }
            if (!leftover) break;  // pivot divides everything below: done
        }
        if (work[row][col] == 0) continue;
        if (work[row][col] < 0) {
            row_negate(work[row]);
            if (U) row_negate((*U)[row]);
        }
        for (std::size_t i = 0; i < row; ++i) {
            Int q = floor_div(work[i][col], work[row][col]);
            if (q != 0) {
                row_sub(work[i], work[row], q);
                if (U) row_sub((*U)[i], (*U)[row], q);
            }
        }
        ++row;
    }
    return static_cast<int>(row);
}

Mat kernel(const Mat& rows) {
    Mat work = rows;
    Mat U;
    int rk = hnf_rows(work, &U);
    Mat out;
    for (std::size_t i = static_cast<std::size_t>(rk); i < rows.size(); ++i)
        out.push_back(U[i]);
    return out;
}

SmithResult smith(const Mat& C) {
    const std::size_t r = C.size();
    const std::size_t c = r ? C[0].size() : 0;
    Mat A = C;
    SmithResult res;
    res.left.assign(r, Vec(r));
    for (std::size_t i = 0; i < r; ++i) res.left[i][i] = 1;
    res.right_inv.assign(c, Vec(c));
    for (std::size_t i = 0; i < c; ++i) res.right_inv[i][i] = 1;

    auto col_swap = [&](std::size_t i, std::size_t j) {
        for (std::size_t k = 0; k < r; ++k) std::swap(A[k][i], A[k][j]);
        std::swap(res.right_inv[i], res.right_inv[j]);
    };
    auto col_addmul = [&](std::size_t dst, std::size_t src, const Int& q) {
        // A[:, dst] += q * A[:, src]; undo on the tracked inverse:
        // right_inv row src -= q * row dst.
        for (std::size_t k = 0; k < r; ++k) A[k][dst] += q * A[k][src];
        row_sub(res.right_inv[src], res.right_inv[dst], q);
    };
    auto do_row_addmul = [&](std::size_t dst, std::size_t src, const Int& q) {
        for (std::size_t k = 0; k < c; ++k) A[dst][k] += q * A[src][k];
        for (std::size_t k = 0; k < r; ++k) res.left[dst][k] += q * res.left[src][k];
    };

    std::size_t t = 0;
    const std::size_t steps = std::min(r, c);
    while (t < steps) {
        std::size_t pi = r, pj = c;
        for (std::size_t i = t; i < r; ++i)
            for (std::size_t j = t; j < c; ++j)
                if (A[i][j] != 0 && (pi == r || abs(A[i][j]) < abs(A[pi][pj]))) {
                    pi = i;
                    pj = j;
                }
        if (pi == r) break;
        if (pi != t) {
            std::swap(A[pi], A[t]);
            std::swap(res.left[pi], res.left[t]);
        }
        if (pj != t) col_swap(pj, t);
        bool clean = true;
        for (std::size_t i = t + 1; i < r; ++i) {
            if (A[i][t] == 0) continue;
            Int q = A[i][t] / A[t][t];
            if (q != 0) do_row_addmul(i, t, -q);
            if (A[i][t] != 0) clean = false;
        }
        for (std::size_t j = t + 1; j < c; ++j) {
            if (A[t][j] == 0) continue;
            Int q = A[t][j] / A[t][t];
            if (q != 0) col_addmul(j, t, -q);
            if (A[t][j] != 0) clean = false;
        }
        if (!clean) continue;
        if (A[t][t] < 0) {
            row_negate(A[t]);
            row_negate(res.left[t]);
        }
        bool redo = false;
        for (std::size_t i = t + 1; i < r && !redo; ++i)
            for (std::size_t j = t + 1; j < c && !redo; ++j)
                if (A[i][j] % A[t][t] != 0) {
                    col_addmul(t, j, 1);
                    redo = true;
                }
        if (redo) continue;
        ++t;
    }
    for (std::size_t i = 0; i < t; ++i) res.divisors.push_back(A[i][i]);
    return res;
}

}  // namespace detail

namespace {

void check_rect(const Mat& rows) {
    for (const Vec& v : rows)
        if (v.size() != rows[0].size())
            throw validation_error("ragged-matrix", "rows have inconsistent lengths");
}

Lattice make_lattice(int dim, Mat rows) {
    int rk = detail::hnf_rows(rows, nullptr);
    rows.resize(static_cast<std::size_t>(rk));
    return Lattice{dim, std::move(rows)};
}

}  // namespace

Lattice hnf(const Mat& rows) {
    if (rows.empty())
        throw validation_error("empty-input",
                               "hnf of an empty generator list: ambient dimension unknown");
    check_rect(rows);
    return make_lattice(static_cast<int>(rows[0].size()), rows);
}

Lattice hnf_in_dim(int dim, const Mat& rows) {
    if (dim < 0) throw validation_error("bad-dimension", "negative ambient dimension");
    for (const Vec& v : rows)
        if (static_cast<int>(v.size()) != dim)
            throw validation_error("ragged-matrix", "row length differs from ambient dimension");
    return make_lattice(dim, rows);
}

Lattice lattice_zero(int dim) { return hnf_in_dim(dim, {}); }

Lattice lattice_full(int dim) {
    Mat rows;
    for (int i = 0; i < dim; ++i) {
        Vec e = vec_zero(dim);
        e[static_cast<std::size_t>(i)] = 1;
        rows.push_back(std::move(e));
    }
    return hnf_in_dim(dim, rows);
}

Lattice lattice_diag(const std::vector<Int>& diag) {
    Mat rows;
    const int n = static_cast<int>(diag.size());
    for (int i = 0; i < n; ++i) {
        if (diag[static_cast<std::size_t>(i)] <= 0)
            throw validation_error("bad-diagonal", "diagonal entries must be positive");
        Vec e = vec_zero(n);
        e[static_cast<std::size_t>(i)] = diag[static_cast<std::size_t>(i)];
        rows.push_back(std::move(e));
    }
    return hnf_in_dim(n, rows);
}

int lattice_rank(const Lattice& L) { return static_cast<int>(L.rows.size()); }

Int determinant_sq(const Lattice& L) {
    const std::size_t r = L.rows.size();
    if (r == 0) return 1;
    Mat g(r, Vec(r));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) {
            Int s = 0;
            for (std::size_t k = 0; k < L.rows[i].size(); ++k)
                s += L.rows[i][k] * L.rows[j][k];
            g[i][j] = s;
        }
    // Bareiss fraction-free elimination; Gram matrices of independent rows
    // are positive definite, so pivots never vanish.
    Int denom = 1;
    for (std::size_t k = 0; k + 1 < r; ++k) {
        for (std::size_t i = k + 1; i < r; ++i)
            for (std::size_t j = k + 1; j < r; ++j)
                g[i][j] = (g[i][j] * g[k][k] - g[i][k] * g[k][j]) / denom;
        denom = g[k][k];
    }
    return g[r - 1][r - 1];
}

Int determinant_abs(const Lattice& L) {
    if (lattice_rank(L) != L.dim)
        throw validation_error("not-full-rank", "determinant_abs requires a full-rank lattice");
    // Full-rank HNF is upper triangular with positive diagonal.
    Int d = 1;
    for (std::size_t i = 0; i < L.rows.size(); ++i) d *= L.rows[i][i];
    return d;
}

bool member(const Lattice& L, const Vec& v) {
    if (static_cast<int>(v.size()) != L.dim)
        throw validation_error("dimension-mismatch", "vector/lattice dimension mismatch");
    return vec_is_zero(reduce_mod(L, v));
}

Vec reduce_mod(const Lattice& L, Vec v) {
    if (static_cast<int>(v.size()) != L.dim)
        throw validation_error("dimension-mismatch", "vector/lattice dimension mismatch");
    for (std::size_t i = 0; i < L.rows.size(); ++i) {
        std::size_t p = pivot_col(L.rows[i]);
        if (v[p] == 0) continue;
        Int q = floor_div(v[p], L.rows[i][p]);
        if (q != 0)
            for (std::size_t j = 0; j < v.size(); ++j) v[j] -= q * L.rows[i][j];
    }
    return v;
}

std::optional<Vec> coords_in_basis(const Lattice& L, const Vec& v) {
    if (static_cast<int>(v.size()) != L.dim)
        throw validation_error("dimension-mismatch", "vector/lattice dimension mismatch");
    Vec rem = v;
    Vec coords(L.rows.size());
    for (std::size_t i = 0; i < L.rows.size(); ++i) {
        std::size_t p = pivot_col(L.rows[i]);
        if (rem[p] % L.rows[i][p] != 0) return std::nullopt;
        Int q = rem[p] / L.rows[i][p];
        coords[i] = q;
        if (q != 0)
            for (std::size_t j = 0; j < rem.size(); ++j) rem[j] -= q * L.rows[i][j];
    }
    if (!vec_is_zero(rem)) return std::nullopt;
    return coords;
}

bool sublattice_of(const Lattice& inner, const Lattice& outer) {
    if (inner.dim != outer.dim)
        throw validation_error("dimension-mismatch", "lattice dimension mismatch");
    for (const Vec& row : inner.rows)
        if (!member(outer, row)) return false;
    return true;
}

Lattice lat_sum(const Lattice& a, const Lattice& b) {
    if (a.dim != b.dim)
        throw validation_error("dimension-mismatch", "lattice dimension mismatch");
    Mat rows = a.rows;
    rows.insert(rows.end(), b.rows.begin(), b.rows.end());
    return hnf_in_dim(a.dim, rows);
}

Lattice lat_intersect(const Lattice& a, const Lattice& b) {
    if (a.dim != b.dim)
        throw validation_error("dimension-mismatch", "lattice dimension mismatch");
    // x * rows(a) = -y * rows(b) ranges over the intersection as (x, y)
    // ranges over the integer kernel of the stacked matrix.
    Mat stacked = a.rows;
    stacked.insert(stacked.end(), b.rows.begin(), b.rows.end());
    if (stacked.empty()) return lattice_zero(a.dim);
    Mat ker = detail::kernel(stacked);
    Mat gens;
    for (const Vec& z : ker) {
        Vec g = vec_zero(a.dim);
        for (std::size_t i = 0; i < a.rows.size(); ++i)
            for (std::size_t j = 0; j < g.size(); ++j) g[j] += z[i] * a.rows[i][j];
        gens.push_back(std::move(g));
    }
    return hnf_in_dim(a.dim, gens);
}

Lattice lat_scale(const Lattice& L, const Int& c) {
    if (c == 0) throw validation_error("zero-scale", "scaling a lattice by zero");
    Mat rows = L.rows;
    for (Vec& r : rows)
        for (Int& x : r) x *= c;
    return hnf_in_dim(L.dim, rows);
}

StackedBasis stacked_basis(const Lattice& A, const Lattice& B) {
    if (!sublattice_of(B, A))
        throw validation_error("not-a-sublattice", "stacked_basis requires B contained in A");
    Mat C;
    for (const Vec& row : B.rows) C.push_back(*coords_in_basis(A, row));
    StackedBasis out;
    if (C.empty()) {
        out.basis = A.rows;
        return out;
    }
    detail::SmithResult s = detail::smith(C);
    // left * C * right = D, hence left * B = D * (right_inv * A): the rows
    // of right_inv * A are the stacked basis of A.
    const std::size_t n = A.rows.size();
    out.basis.assign(n, vec_zero(A.dim));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (s.right_inv[i][k] != 0)
                for (std::size_t j = 0; j < out.basis[i].size(); ++j)
                    out.basis[i][j] += s.right_inv[i][k] * A.rows[k][j];
    out.divisors = s.divisors;
    return out;
}

std::vector<Lattice> maximal_sublattices(const Lattice& L, const Int& p) {
    if (!is_prime(p)) throw validation_error("not-prime", "index must be prime");
    const std::size_t r = L.rows.size();
    if (r == 0)
        throw validation_error("zero-lattice", "the zero lattice has no proper finite-index sublattices");
    // Index-p sublattices are kernels of surjections L -> Z/p, one per
    // point of P((Z/p)^r); normalize functionals so the leading non-zero
    // coordinate is 1.
    std::vector<Lattice> out;
    for (std::size_t lead = 0; lead < r; ++lead) {
        std::vector<std::size_t> free_idx;
        for (std::size_t i = lead + 1; i < r; ++i) free_idx.push_back(i);
        std::vector<Int> vals(free_idx.size(), Int(0));
        for (;;) {
            Mat gens;
            gens.push_back(vec_scale(L.rows[lead], p));
            for (std::size_t i = 0; i < r; ++i) {
                if (i == lead) continue;
                Vec g = L.rows[i];
                // phi_i is non-zero only on the free indices.
                for (std::size_t fi = 0; fi < free_idx.size(); ++fi)
                    if (free_idx[fi] == i && vals[fi] != 0)
                        for (std::size_t j = 0; j < g.size(); ++j)
                            g[j] -= vals[fi] * L.rows[lead][j];
                gens.push_back(std::move(g));
            }
            out.push_back(hnf_in_dim(L.dim, gens));
            std::size_t k = 0;
            while (k < vals.size()) {
                vals[k] += 1;
                if (vals[k] < p) break;
                vals[k] = 0;
                ++k;
            }
            if (vals.empty() || k == vals.size()) break;
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Lattice& x, const Lattice& y) { return x.rows < y.rows; });
    return out;
}

bool check_lemma_max_sublattice(const Lattice& L, const Lattice& M, const Int& q) {
    if (!is_prime(q)) throw validation_error("not-prime", "q must be prime");
    if (!sublattice_of(M, L))
        throw validation_error("not-a-sublattice", "M must be a sublattice of L");
    if (lattice_rank(M) != lattice_rank(L))
        throw validation_error("index-not-prime", "M must have prime index in L");
    Int dl = determinant_sq(L);
    Int dm = determinant_sq(M);
    Int ratio_sq = dm / dl;
    Int idx = sqrt(ratio_sq);
    if (idx * idx != ratio_sq || !is_prime(idx))
        throw validation_error("index-not-prime", "M must have prime index in L");
    return sublattice_of(lat_scale(L, q), M);
}

FiniteQuotient::FiniteQuotient(Lattice ambient, Lattice modulus, std::vector<Vec> elements)
    : ambient_(std::move(ambient)), modulus_(std::move(modulus)), elements_(std::move(elements)) {
    for (std::size_t i = 0; i < elements_.size(); ++i) index_[elements_[i]] = static_cast<int>(i);
}

Vec FiniteQuotient::reduce(const Vec& v) const { return reduce_mod(modulus_, v); }

int FiniteQuotient::index_of(const Vec& v) const {
    auto it = index_.find(reduce(v));
    if (it == index_.end())
        throw validation_error("not-in-quotient", "vector is not congruent to a stored class");
    return it->second;
}

FiniteQuotient quotient(const Lattice& A, const Lattice& M) {
    if (!sublattice_of(M, A))
        throw validation_error("not-a-sublattice", "modulus must be contained in the ambient lattice");
    if (lattice_rank(M) != lattice_rank(A))
        throw validation_error("infinite-quotient", "modulus must have full rank in the ambient lattice");
    StackedBasis sb = stacked_basis(A, M);
    Int order = 1;
    for (const Int& d : sb.divisors) order *= d;
    if (order > (Int(1) << 22)) throw budget_error("quotient order exceeds the safety bound");
    std::vector<Vec> elems;
    std::vector<Int> c(sb.divisors.size(), Int(0));
    for (;;) {
        Vec v = vec_zero(A.dim);
        for (std::size_t i = 0; i < c.size(); ++i)
            if (c[i] != 0)
                for (std::size_t j = 0; j < v.size(); ++j) v[j] += c[i] * sb.basis[i][j];
        elems.push_back(reduce_mod(M, v));
        std::size_t k = 0;
        while (k < c.size()) {
            c[k] += 1;
            if (c[k] < sb.divisors[k]) break;
            c[k] = 0;
            ++k;
        }
        if (c.empty() || k == c.size()) break;
    }
    std::sort(elems.begin(), elems.end());
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    return FiniteQuotient(A, M, std::move(elems));
}

}  // namespace reflecta
