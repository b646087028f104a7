// Development utility: regenerates data/wave_solder/markov35.txt.
//
// The shipped file is a 35-row move set for the wave-solder covariate
// matrix: a Markov basis obtained by connecting every Graver fiber in
// ascending degree (23 moves for this matrix), padded to 35 rows with the
// smallest remaining Graver moves. The tool re-verifies that the final set
// leaves no Graver fiber disconnected before writing anything.
//
// Usage: mkbasis <data-dir> [out-file]

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>

#include "fracfact/design.hpp"
#include "fracfact/fiber.hpp"
#include "fracfact/io.hpp"
#include "fracfact/model.hpp"
#include "fracfact/moves.hpp"

using namespace fracfact;

namespace {

std::vector<MoveVec> kernel_moves(const IntMatrix& m) {
    std::vector<MoveVec> basis;
    for (const auto& z : kernel_basis(m)) {
        MoveVec v(z.size());
        for (size_t i = 0; i < z.size(); ++i)
            v[i] = to_long_checked(z[i]);
        basis.push_back(std::move(v));
    }
    return basis;
}

std::vector<long long> statistic_of(const IntMatrix& a, const std::vector<long long>& y) {
    std::vector<long long> t(a.rows(), 0);
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c)
            t[r] += to_long_checked(a.at(r, c)) * y[c];
    return t;
}

long long degree(const MoveVec& z) {
    long long d = 0;
    for (long long v : z)
        d += std::max(0LL, v);
    return d;
}

// Unique sufficient statistics of the positive parts of the Graver moves,
// ascending by degree. Connecting all of these fibers connects everything.
std::vector<std::vector<long long>> graver_fibers(const IntMatrix& a,
                                                  const std::vector<MoveVec>& graver) {
    std::map<std::pair<long long, std::vector<long long>>, bool> seen;
    for (const auto& g : graver) {
        std::vector<long long> gp(g.size());
        for (size_t i = 0; i < g.size(); ++i)
            gp[i] = std::max(0LL, g[i]);
        seen.emplace(std::make_pair(degree(g), statistic_of(a, gp)), true);
    }
    std::vector<std::vector<long long>> out;
    for (const auto& [key, unused] : seen)
        out.push_back(key.second);
    return out;
}

// Greedy fiber-connectivity extraction: walk the Graver fibers in ascending
// degree; whenever one is disconnected under the moves selected so far, add
// the differences from each component's lex-min point to the first one.
std::vector<MoveVec> connecting_subset(const IntMatrix& a, const std::vector<MoveVec>& graver) {
    std::vector<MoveVec> sel;
    for (const auto& t : graver_fibers(a, graver)) {
        auto fiber = enumerate_fiber(a, t);
        std::vector<size_t> parent(fiber.size());
        for (size_t i = 0; i < parent.size(); ++i)
            parent[i] = i;
        std::function<size_t(size_t)> find = [&](size_t x) {
            while (parent[x] != x)
                x = parent[x] = parent[parent[x]];
            return x;
        };
        std::map<std::vector<long long>, size_t> index;
        for (size_t i = 0; i < fiber.size(); ++i)
            index.emplace(fiber.points[i], i);
        std::vector<long long> w(a.cols());
        for (size_t i = 0; i < fiber.size(); ++i)
            for (const auto& z : sel) {
                bool ok = true;
                for (int c = 0; c < a.cols() && ok; ++c) {
                    w[c] = fiber.points[i][c] + z[c];
                    ok = w[c] >= 0;
                }
                if (!ok)
                    continue;
                auto it = index.find(w);
                if (it != index.end())
                    parent[find(i)] = find(it->second);
            }
        std::map<size_t, std::vector<long long>> reps; // root -> lex-min point
        for (size_t i = 0; i < fiber.size(); ++i) {
            auto [it, inserted] = reps.emplace(find(i), fiber.points[i]);
            if (!inserted && fiber.points[i] < it->second)
                it->second = fiber.points[i];
        }
        if (reps.size() <= 1)
            continue;
        std::vector<std::vector<long long>> anchors;
        for (const auto& [root, pt] : reps)
            anchors.push_back(pt);
        std::sort(anchors.begin(), anchors.end());
        for (size_t i = 1; i < anchors.size(); ++i) {
            MoveVec z(a.cols());
            for (int c = 0; c < a.cols(); ++c)
                z[c] = anchors[i][c] - anchors[0][c];
            canonicalize_move(z);
            sel.push_back(std::move(z));
        }
    }
    return sel;
}

} // namespace

int main(int argc, char** argv) {
    const std::string data_dir = argc > 1 ? argv[1] : "data";
    const std::string out_path =
        argc > 2 ? argv[2] : data_dir + "/wave_solder/markov35.txt";

    auto spec = read_design_path(data_dir + "/wave_solder/design.txt");
    auto model = read_model_path(data_dir + "/wave_solder/model.txt", spec.p(), true);
    auto d = build_design_matrix(spec);
    auto x0t = build_covariate_matrix(d, model).x0_transposed();

    CompletionBudget budget;
    budget.max_vectors = 500'000;
    auto graver = graver_completion(kernel_moves(x0t), x0t, budget);
    std::printf("graver basis: %zu moves\n", graver.moves.size());

    auto selected = connecting_subset(x0t, graver.moves);
    std::printf("connecting subset: %zu moves\n", selected.size());

    // pad to 35 rows with the smallest unused Graver moves
    std::set<MoveVec> chosen(selected.begin(), selected.end());
    std::vector<MoveVec> pool = graver.moves;
    std::stable_sort(pool.begin(), pool.end(), [](const MoveVec& a, const MoveVec& b) {
        long long da = degree(a), db = degree(b);
        if (da != db)
            return da < db;
        return a < b;
    });
    for (const auto& g : pool) {
        if (selected.size() >= 35)
            break;
        if (chosen.insert(g).second)
            selected.push_back(g);
    }
    if (selected.size() != 35) {
        std::fprintf(stderr, "expected to land on 35 moves, got %zu\n", selected.size());
        return 1;
    }

    MoveSet ms;
    ms.moves = selected;
    ms.provenance = MoveProvenance::imported;
    ms.matrix_fingerprint = matrix_fingerprint(x0t);

    // final self-check: every Graver fiber is connected by the 35 moves
    size_t checked = 0;
    for (const auto& t : graver_fibers(x0t, graver.moves)) {
        auto rep = verify_connectivity(ms, x0t, t);
        if (!rep.connected) {
            std::fprintf(stderr, "fiber left disconnected; refusing to write\n");
            return 1;
        }
        ++checked;
    }
    std::printf("verified connectivity on %zu graver fibers\n", checked);

    std::ofstream out(out_path);
    write_basis(out, ms);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}
