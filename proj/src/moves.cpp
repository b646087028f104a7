#include "fracfact/moves.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fracfact/error.hpp"

namespace fracfact {

std::uint64_t matrix_fingerprint(const IntMatrix& m) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0xff;
        h *= 1099511628211ull;
    };
    mix(std::to_string(m.rows()));
    mix(std::to_string(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            mix(m.at(i, j).get_str());
    return h;
}

bool in_kernel(const IntMatrix& x0t, const MoveVec& z) {
    if (static_cast<int>(z.size()) != x0t.cols())
        return false;
    for (int r = 0; r < x0t.rows(); ++r) {
        Int s = 0;
        for (int c = 0; c < x0t.cols(); ++c)
            if (z[c] != 0)
                s += x0t.at(r, c) * static_cast<long>(z[c]);
        if (s != 0)
            return false;
    }
    return true;
}

void canonicalize_move(MoveVec& z) {
    long long g = 0;
    for (long long v : z)
        g = std::gcd(g, std::llabs(v));
    if (g > 1)
        for (long long& v : z)
            v /= g;
    for (long long v : z) {
        if (v == 0)
            continue;
        if (v < 0)
            for (long long& w : z)
                w = -w;
        break;
    }
}

namespace {

struct SignMask {
    std::uint64_t pos = 0, neg = 0;
};

SignMask mask_of(const MoveVec& z) {
    SignMask m;
    for (size_t i = 0; i < z.size(); ++i) {
        if (z[i] > 0)
            m.pos |= 1ull << i;
        else if (z[i] < 0)
            m.neg |= 1ull << i;
    }
    return m;
}

// v (with the given mask) conformally divides u: v+ <= u+ and v- <= u-.
bool conformal_leq(const MoveVec& v, const SignMask& vm, const MoveVec& u, const SignMask& um) {
    if ((vm.pos & ~um.pos) || (vm.neg & ~um.neg))
        return false;
    for (size_t i = 0; i < v.size(); ++i)
        if (std::llabs(v[i]) > std::llabs(u[i]))
            return false;
    return true;
}

struct VecHash {
    std::size_t operator()(const MoveVec& v) const {
        std::size_t h = 1469598103934665603ull;
        for (long long x : v) {
            h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

long long one_norm(const MoveVec& v) {
    long long s = 0;
    for (long long x : v)
        s += std::llabs(x);
    return s;
}

} // namespace

MoveVec conformal_normal_form(MoveVec z, const std::vector<MoveVec>& set) {
    if (z.size() > 63)
        throw Error("conformal reduction supports at most 63 cells");
    std::vector<SignMask> masks(set.size());
    std::vector<MoveVec> negs(set.size());
    std::vector<size_t> order(set.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return one_norm(set[a]) < one_norm(set[b]);
    });
    for (size_t i = 0; i < set.size(); ++i) {
        masks[i] = mask_of(set[i]);
        negs[i].resize(set[i].size());
        for (size_t c = 0; c < set[i].size(); ++c)
            negs[i][c] = -set[i][c];
    }
    bool reduced = true;
    while (reduced) {
        SignMask zm = mask_of(z);
        if (zm.pos == 0 && zm.neg == 0)
            break;
        reduced = false;
        for (size_t oi : order) {
            const MoveVec* h = nullptr;
            if (conformal_leq(set[oi], masks[oi], z, zm))
                h = &set[oi];
            else {
                SignMask nm{masks[oi].neg, masks[oi].pos};
                if (conformal_leq(negs[oi], nm, z, zm))
                    h = &negs[oi];
            }
            if (h) {
                for (size_t c = 0; c < z.size(); ++c)
                    z[c] -= (*h)[c];
                reduced = true;
                break;
            }
        }
    }
    return z;
}

MoveSet graver_completion(const std::vector<MoveVec>& lattice_basis, const IntMatrix& x0t,
                          const CompletionBudget& budget) {
    const int n = x0t.cols();
    if (n > 63)
        throw Error("graver completion supports at most 63 cells");
    for (const auto& b : lattice_basis)
        if (static_cast<int>(b.size()) != n)
            throw Error("lattice basis vector length mismatch");

    std::vector<MoveVec> g;
    std::vector<SignMask> gmask;
    std::unordered_set<MoveVec, VecHash> seen;
    std::deque<std::pair<std::uint32_t, std::uint32_t>> queue; // index pair; bit 31 = minus

    auto reduce = [&](MoveVec s) {
        // normal form against g, cheapest reducers first by construction
        bool reduced = true;
        while (reduced) {
            reduced = false;
            SignMask sm = mask_of(s);
            if (sm.pos == 0 && sm.neg == 0)
                break;
            for (size_t i = 0; i < g.size(); ++i) {
                bool plus = conformal_leq(g[i], gmask[i], s, sm);
                bool minus = false;
                if (!plus) {
                    SignMask nm{gmask[i].neg, gmask[i].pos};
                    MoveVec neg(g[i].size());
                    for (size_t c = 0; c < neg.size(); ++c)
                        neg[c] = -g[i][c];
                    minus = conformal_leq(neg, nm, s, sm);
                }
                if (plus || minus) {
                    const long long sgn = plus ? 1 : -1;
                    for (size_t c = 0; c < s.size(); ++c)
                        s[c] -= sgn * g[i][c];
                    reduced = true;
                    break;
                }
            }
        }
        return s;
    };

    auto push = [&](MoveVec v) -> bool {
        canonicalize_move(v);
        bool zero = std::all_of(v.begin(), v.end(), [](long long x) { return x == 0; });
        if (zero || seen.count(v))
            return false;
        long long deg = 0;
        for (long long x : v) {
            if (std::llabs(x) > budget.max_entry)
                throw BudgetError("completion budget exceeded: entry growth; "
                                  "consider importing an externally computed basis");
            deg += std::max(0LL, x);
        }
        if (deg > budget.max_degree)
            throw BudgetError("completion budget exceeded: move degree above " +
                              std::to_string(budget.max_degree) +
                              "; consider importing an externally computed basis");
        const std::uint32_t t = static_cast<std::uint32_t>(g.size());
        for (std::uint32_t j = 0; j < t; ++j) {
            queue.emplace_back(t, j);
            queue.emplace_back(t, j | 0x80000000u);
        }
        g.push_back(std::move(v));
        gmask.push_back(mask_of(g.back()));
        seen.insert(g.back());
        if (g.size() > budget.max_vectors)
            throw BudgetError("completion budget exceeded: more than " +
                              std::to_string(budget.max_vectors) +
                              " vectors; consider importing an externally computed basis");
        return true;
    };

    for (const auto& b : lattice_basis)
        push(b);

    while (!queue.empty()) {
        auto [iu, jraw] = queue.front();
        queue.pop_front();
        const bool minus = (jraw & 0x80000000u) != 0;
        const std::uint32_t j = jraw & 0x7fffffffu;
        const MoveVec& u = g[iu];
        const MoveVec& v = g[j];
        const SignMask um = gmask[iu];
        SignMask vm = gmask[j];
        if (minus)
            std::swap(vm.pos, vm.neg);
        // sums of conformal pairs reduce to zero; skip them
        if (((um.pos & vm.neg) | (um.neg & vm.pos)) == 0)
            continue;
        MoveVec s(u.size());
        bool zero = true;
        for (size_t c = 0; c < s.size(); ++c) {
            s[c] = u[c] + (minus ? -v[c] : v[c]);
            zero = zero && s[c] == 0;
        }
        if (zero)
            continue;
        s = reduce(std::move(s));
        push(std::move(s));
    }

    // Keep only conformally minimal elements.
    std::vector<size_t> order(g.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return one_norm(g[a]) < one_norm(g[b]); });
    std::vector<MoveVec> minimal;
    std::vector<SignMask> minmask;
    for (size_t oi : order) {
        const MoveVec& cand = g[oi];
        const SignMask cm = gmask[oi];
        bool reducible = false;
        for (size_t i = 0; i < minimal.size() && !reducible; ++i) {
            if (conformal_leq(minimal[i], minmask[i], cand, cm))
                reducible = true;
            else {
                MoveVec neg(minimal[i].size());
                for (size_t c = 0; c < neg.size(); ++c)
                    neg[c] = -minimal[i][c];
                SignMask nm{minmask[i].neg, minmask[i].pos};
                if (conformal_leq(neg, nm, cand, cm))
                    reducible = true;
            }
        }
        if (!reducible) {
            minimal.push_back(cand);
            minmask.push_back(cm);
        }
    }
    std::sort(minimal.begin(), minimal.end());

    MoveSet ms;
    ms.moves = std::move(minimal);
    ms.provenance = MoveProvenance::computed;
    ms.matrix_fingerprint = matrix_fingerprint(x0t);
    return ms;
}

MoveSet import_basis(std::istream& in, const IntMatrix& x0t) {
    long long count = 0, length = 0;
    if (!(in >> count >> length))
        throw ParseError("basis file: missing or malformed \"count length\" header");
    if (count <= 0)
        throw ParseError("basis file contains no moves");
    if (length != x0t.cols())
        throw ParseError("basis file: move length " + std::to_string(length) +
                         " does not match matrix columns " + std::to_string(x0t.cols()));
    MoveSet ms;
    ms.provenance = MoveProvenance::imported;
    ms.matrix_fingerprint = matrix_fingerprint(x0t);
    std::unordered_set<MoveVec, VecHash> seen;
    for (long long r = 1; r <= count; ++r) {
        MoveVec z(length);
        for (long long c = 0; c < length; ++c)
            if (!(in >> z[c]))
                throw ParseError("basis file: truncated at row " + std::to_string(r));
        if (!in_kernel(x0t, z))
            throw ParseError("invalid move at row " + std::to_string(r) +
                             ": not in the kernel of the covariate matrix");
        canonicalize_move(z);
        if (std::all_of(z.begin(), z.end(), [](long long x) { return x == 0; }))
            throw ParseError("invalid move at row " + std::to_string(r) + ": zero vector");
        if (seen.insert(z).second)
            ms.moves.push_back(std::move(z));
    }
    return ms;
}

MoveSet import_basis_file(const std::string& path, const IntMatrix& x0t) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open basis file: " + path);
    return import_basis(in, x0t);
}

void write_basis(std::ostream& out, const MoveSet& ms) {
    const size_t n = ms.moves.empty() ? 0 : ms.moves[0].size();
    size_t width = 1;
    for (const auto& z : ms.moves)
        for (long long v : z)
            width = std::max(width, std::to_string(v).size());
    out << ms.moves.size() << ' ' << n << '\n';
    for (const auto& z : ms.moves) {
        for (size_t c = 0; c < z.size(); ++c) {
            std::string s = std::to_string(z[c]);
            out << (c ? " " : "") << std::string(width - s.size(), ' ') << s;
        }
        out << '\n';
    }
}

ConnectivityReport verify_connectivity(const MoveSet& ms, const IntMatrix& x0t,
                                       std::span<const long long> target,
                                       std::optional<std::span<const long long>> bounds,
                                       const FiberBudget& budget) {
    Fiber fiber = enumerate_fiber(x0t, target, bounds, budget);
    ConnectivityReport rep;
    rep.fiber_size = fiber.size();
    if (fiber.points.empty()) {
        rep.connected = true;
        rep.components = 0;
        return rep;
    }
    std::unordered_map<MoveVec, size_t, VecHash> index;
    index.reserve(fiber.points.size());
    for (size_t i = 0; i < fiber.points.size(); ++i)
        index.emplace(fiber.points[i], i);

    std::vector<size_t> parent(fiber.points.size());
    std::iota(parent.begin(), parent.end(), size_t{0});
    std::function<size_t(size_t)> find = [&](size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    MoveVec w;
    for (size_t i = 0; i < fiber.points.size(); ++i) {
        const auto& y = fiber.points[i];
        for (const auto& z : ms.moves) {
            w.resize(y.size());
            bool ok = true;
            for (size_t c = 0; c < y.size() && ok; ++c) {
                w[c] = y[c] + z[c];
                ok = w[c] >= 0 && (!fiber.bounds || w[c] <= (*fiber.bounds)[c]);
            }
            if (!ok)
                continue;
            auto it = index.find(w);
            if (it != index.end())
                parent[find(i)] = find(it->second);
        }
    }
    std::unordered_map<size_t, size_t> roots; // root -> representative point
    for (size_t i = 0; i < fiber.points.size(); ++i)
        roots.emplace(find(i), i);
    rep.components = roots.size();
    rep.connected = rep.components <= 1;
    if (!rep.connected) {
        auto it = roots.begin();
        size_t a = it->second;
        ++it;
        size_t b = it->second;
        rep.witness = std::make_pair(fiber.points[a], fiber.points[b]);
    }
    return rep;
}

} // namespace fracfact
