#include "fracfact/correspond.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "fracfact/error.hpp"
#include "fracfact/word.hpp"

namespace fracfact {

namespace {

std::string axes_label(std::uint32_t mask) {
    std::string s;
    for (int a = 0; a < Word::max_factors; ++a)
        if (mask & (1u << a))
            s += factor_letter(a + 1);
    return s;
}

int level_of(int cell, int axis, int m) { return ((cell >> (m - 1 - axis)) & 1) + 1; }

} // namespace

std::string TableModel::label() const {
    std::string s;
    for (size_t i = 0; i < margins.size(); ++i) {
        if (i)
            s += '/';
        s += axes_label(margins[i]);
    }
    for (const auto& e : extras) {
        if (!s.empty())
            s += " + ";
        s += "(" + e.label + ")";
    }
    return s;
}

int cell_index(const std::vector<int>& levels) {
    int idx = 0;
    for (int lv : levels) {
        if (lv != 1 && lv != 2)
            throw Error("cell levels must be 1 or 2");
        idx = idx * 2 + (lv - 1);
    }
    return idx;
}

IntMatrix table_model_matrix(const TableModel& tm) {
    const int cells = tm.cells();
    int rows = static_cast<int>(tm.extras.size());
    for (std::uint32_t mask : tm.margins)
        rows += 1 << std::popcount(mask);

    IntMatrix mat(rows, cells);
    int r = 0;
    for (std::uint32_t mask : tm.margins) {
        std::vector<int> axes;
        for (int a = 0; a < tm.m; ++a)
            if (mask & (1u << a))
                axes.push_back(a);
        const int combos = 1 << axes.size();
        for (int combo = 0; combo < combos; ++combo, ++r) {
            for (int cell = 0; cell < cells; ++cell) {
                bool match = true;
                for (size_t t = 0; t < axes.size() && match; ++t) {
                    const int want = ((combo >> (axes.size() - 1 - t)) & 1) + 1;
                    match = level_of(cell, axes[t], tm.m) == want;
                }
                if (match)
                    mat.at(r, cell) = 1;
            }
        }
    }
    for (const auto& e : tm.extras) {
        if (static_cast<int>(e.row.size()) != cells)
            throw Error("extra contrast row has wrong length");
        for (int cell = 0; cell < cells; ++cell)
            mat.at(r, cell) = static_cast<long>(e.row[cell]);
        ++r;
    }
    return mat;
}

std::vector<TableModel::Extra> parity_contrast_rows(int m, std::uint32_t mask) {
    const int cells = 1 << m;
    TableModel::Extra even{axes_label(mask), std::vector<long long>(cells, 0)};
    TableModel::Extra odd{axes_label(mask), std::vector<long long>(cells, 0)};
    for (int cell = 0; cell < cells; ++cell) {
        int parity = 0;
        for (int a = 0; a < m; ++a)
            if (mask & (1u << a))
                parity ^= level_of(cell, a, m) - 1;
        (parity == 0 ? even : odd).row[cell] = 1;
    }
    return {even, odd};
}

bool equivalent_sufficient_statistics(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols() != b.cols())
        throw Error("sufficient-statistic matrices must have the same cell count");
    return same_row_space(a, b);
}

CorrespondenceResult correspondence_report(const IntMatrix& x0t, int m) {
    if (m < 1 || m > 4)
        throw Error("correspondence search supports 1 <= m <= 4 axes");
    if (x0t.cols() != (1 << m))
        throw Error("matrix has " + std::to_string(x0t.cols()) + " cells, expected 2^" +
                    std::to_string(m));

    const int nsub = (1 << m) - 1; // nonempty axis subsets
    std::vector<std::uint32_t> subsets;
    for (std::uint32_t s = 1; s <= static_cast<std::uint32_t>(nsub); ++s)
        subsets.push_back(s);

    // All antichains of nonempty subsets = generator sets of hierarchical
    // models. m <= 4 keeps this enumeration tiny.
    std::vector<std::vector<std::uint32_t>> antichains;
    for (std::uint32_t pick = 1; pick < (1u << nsub); ++pick) {
        std::vector<std::uint32_t> gens;
        for (int i = 0; i < nsub; ++i)
            if (pick & (1u << i))
                gens.push_back(subsets[i]);
        bool antichain = true;
        for (size_t i = 0; i < gens.size() && antichain; ++i)
            for (size_t j = 0; j < gens.size() && antichain; ++j)
                if (i != j && (gens[i] & gens[j]) == gens[i])
                    antichain = false;
        if (antichain)
            antichains.push_back(std::move(gens));
    }

    const int target_rank = integer_rank(x0t);
    const std::uint32_t full = (1u << m) - 1;

    // The "(ABC)"-style parity extension is part of the three-way table
    // notation; four-way models carrying the (ABCD) sums count as having no
    // correspondent.
    const int max_parity = m <= 3 ? 1 : 0;
    for (int with_parity = 0; with_parity <= max_parity; ++with_parity) {
        for (const auto& gens : antichains) {
            TableModel tm;
            tm.m = m;
            tm.margins = gens;
            if (with_parity) {
                // the full-interaction word is already implied by a full margin
                if (std::find(gens.begin(), gens.end(), full) != gens.end())
                    continue;
                tm.extras = parity_contrast_rows(m, full);
            }
            IntMatrix cand = table_model_matrix(tm);
            if (integer_rank(cand) != target_rank)
                continue;
            if (integer_rank(vstack(x0t, cand)) == target_rank) {
                CorrespondenceResult res;
                res.kind = with_parity ? CorrespondenceResult::Kind::hierarchical_plus_parity
                                       : CorrespondenceResult::Kind::hierarchical;
                res.model = std::move(tm);
                return res;
            }
        }
    }
    return CorrespondenceResult{};
}

namespace {

bool is_chordal(int m, const std::vector<std::uint32_t>& adj) {
    // Perfect elimination ordering search; m <= 4 so try greedily removing
    // simplicial vertices.
    std::uint32_t remaining = (1u << m) - 1;
    for (int round = 0; round < m; ++round) {
        bool found = false;
        for (int v = 0; v < m && !found; ++v) {
            if (!(remaining & (1u << v)))
                continue;
            std::uint32_t nb = adj[v] & remaining;
            bool simplicial = true;
            for (int u = 0; u < m && simplicial; ++u)
                if (nb & (1u << u))
                    if ((nb & ~(1u << u)) & ~adj[u])
                        simplicial = false;
            if (simplicial) {
                remaining &= ~(1u << v);
                found = true;
            }
        }
        if (!found)
            return false;
    }
    return true;
}

} // namespace

bool is_decomposable(const TableModel& tm) {
    if (!tm.extras.empty())
        return false;
    if (tm.margins.empty())
        return false;
    std::uint32_t covered = 0;
    for (std::uint32_t g : tm.margins)
        covered |= g;
    if (covered != (1u << tm.m) - 1u)
        return false;

    std::vector<std::uint32_t> adj(tm.m, 0);
    for (std::uint32_t g : tm.margins)
        for (int u = 0; u < tm.m; ++u)
            if (g & (1u << u))
                adj[u] |= g & ~(1u << u);

    // margins must be exactly the maximal cliques of the interaction graph
    std::vector<std::uint32_t> cliques;
    for (std::uint32_t s = 1; s < (1u << tm.m); ++s) {
        bool clique = true;
        for (int u = 0; u < tm.m && clique; ++u)
            if (s & (1u << u))
                if ((s & ~(1u << u)) & ~adj[u])
                    clique = false;
        if (!clique)
            continue;
        bool maximal = true;
        for (int v = 0; v < tm.m && maximal; ++v) {
            if (s & (1u << v))
                continue;
            std::uint32_t bigger = s | (1u << v);
            bool bigger_clique = true;
            for (int u = 0; u < tm.m && bigger_clique; ++u)
                if (bigger & (1u << u))
                    if ((bigger & ~(1u << u)) & ~adj[u])
                        bigger_clique = false;
            if (bigger_clique)
                maximal = false;
        }
        if (maximal)
            cliques.push_back(s);
    }
    std::vector<std::uint32_t> margins_sorted = tm.margins;
    std::sort(margins_sorted.begin(), margins_sorted.end());
    std::sort(cliques.begin(), cliques.end());
    if (margins_sorted != cliques)
        return false;

    return is_chordal(tm.m, adj);
}

MoveSet primitive_moves_for_decomposable(const TableModel& tm) {
    if (!is_decomposable(tm))
        throw Error("model is not decomposable: " + tm.label());

    const int nc = static_cast<int>(tm.margins.size());
    // Maximum-weight spanning tree over the clique graph; zero-weight edges
    // join disconnected components (separator = empty set).
    struct Edge {
        int a, b, w;
    };
    std::vector<Edge> edges;
    for (int i = 0; i < nc; ++i)
        for (int j = i + 1; j < nc; ++j)
            edges.push_back({i, j, std::popcount(tm.margins[i] & tm.margins[j])});
    std::stable_sort(edges.begin(), edges.end(),
                     [](const Edge& x, const Edge& y) { return x.w > y.w; });
    std::vector<int> parent(nc);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<Edge> tree;
    for (const Edge& e : edges)
        if (find(e.a) != find(e.b)) {
            parent[find(e.a)] = find(e.b);
            tree.push_back(e);
        }

    auto assignments = [](const std::vector<int>& axes) {
        std::vector<std::vector<int>> out;
        const int n = 1 << axes.size();
        for (int c = 0; c < n; ++c) {
            std::vector<int> lv(axes.size());
            for (size_t t = 0; t < axes.size(); ++t)
                lv[t] = ((c >> (axes.size() - 1 - t)) & 1) + 1;
            out.push_back(std::move(lv));
        }
        return out;
    };

    const int cells = tm.cells();
    std::vector<MoveVec> moves;
    for (const Edge& e : tree) {
        const std::uint32_t sep = tm.margins[e.a] & tm.margins[e.b];
        // split cliques across this tree edge
        std::vector<std::vector<int>> graph(nc);
        for (const Edge& t : tree)
            if (!(t.a == e.a && t.b == e.b)) {
                graph[t.a].push_back(t.b);
                graph[t.b].push_back(t.a);
            }
        std::vector<int> side(nc, -1);
        std::vector<int> stack{e.a};
        side[e.a] = 0;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int u : graph[v])
                if (side[u] < 0) {
                    side[u] = 0;
                    stack.push_back(u);
                }
        }
        std::uint32_t left = 0, right = 0;
        for (int c = 0; c < nc; ++c)
            (side[c] == 0 ? left : right) |= tm.margins[c];
        left &= ~sep;
        right &= ~sep;
        if (left == 0 || right == 0)
            continue;

        auto axes_of = [&](std::uint32_t mask) {
            std::vector<int> axes;
            for (int a = 0; a < tm.m; ++a)
                if (mask & (1u << a))
                    axes.push_back(a);
            return axes;
        };
        const auto ax_l = axes_of(left), ax_r = axes_of(right), ax_s = axes_of(sep);
        const auto as_l = assignments(ax_l), as_r = assignments(ax_r), as_s = assignments(ax_s);

        auto make_cell = [&](const std::vector<int>& la, const std::vector<int>& ra,
                             const std::vector<int>& sa) {
            std::vector<int> levels(tm.m, 1);
            for (size_t t = 0; t < ax_l.size(); ++t)
                levels[ax_l[t]] = la[t];
            for (size_t t = 0; t < ax_r.size(); ++t)
                levels[ax_r[t]] = ra[t];
            for (size_t t = 0; t < ax_s.size(); ++t)
                levels[ax_s[t]] = sa[t];
            return cell_index(levels);
        };

        for (const auto& sa : as_s)
            for (size_t i = 0; i < as_l.size(); ++i)
                for (size_t j = i + 1; j < as_l.size(); ++j)
                    for (size_t u = 0; u < as_r.size(); ++u)
                        for (size_t v = u + 1; v < as_r.size(); ++v) {
                            MoveVec z(cells, 0);
                            z[make_cell(as_l[i], as_r[u], sa)] += 1;
                            z[make_cell(as_l[j], as_r[v], sa)] += 1;
                            z[make_cell(as_l[i], as_r[v], sa)] -= 1;
                            z[make_cell(as_l[j], as_r[u], sa)] -= 1;
                            canonicalize_move(z);
                            moves.push_back(std::move(z));
                        }
    }
    std::sort(moves.begin(), moves.end());
    moves.erase(std::unique(moves.begin(), moves.end()), moves.end());

    MoveSet ms;
    ms.moves = std::move(moves);
    ms.provenance = MoveProvenance::primitive;
    ms.matrix_fingerprint = matrix_fingerprint(table_model_matrix(tm));
    return ms;
}

} // namespace fracfact
