#include "fracfact/model.hpp"

#include <algorithm>
#include <set>

#include "fracfact/error.hpp"

namespace fracfact {

ModelSpec ModelSpec::parse(std::string_view text, int p, bool closure) {
    std::vector<Word> generators;
    size_t start = 0;
    while (start <= text.size()) {
        size_t slash = text.find('/', start);
        std::string_view piece =
            text.substr(start, slash == std::string_view::npos ? slash : slash - start);
        // trim
        while (!piece.empty() && (piece.front() == ' ' || piece.front() == '\t'))
            piece.remove_prefix(1);
        while (!piece.empty() && (piece.back() == ' ' || piece.back() == '\t' ||
                                  piece.back() == '\r' || piece.back() == '\n'))
            piece.remove_suffix(1);
        if (!piece.empty()) {
            Word w = Word::parse(piece, p);
            if (w.is_identity())
                throw ParseError("model terms must not be the identity word");
            generators.push_back(w);
        }
        if (slash == std::string_view::npos)
            break;
        start = slash + 1;
    }
    if (generators.empty())
        throw ParseError("empty model");

    std::set<std::uint32_t> masks;
    if (closure) {
        for (Word g : generators) {
            // all nonempty submasks of g
            std::uint32_t m = g.mask();
            for (std::uint32_t s = m; s != 0; s = (s - 1) & m)
                masks.insert(s);
        }
    } else {
        for (Word g : generators)
            masks.insert(g.mask());
    }
    ModelSpec spec;
    spec.hierarchical = closure;
    for (std::uint32_t m : masks)
        spec.terms.push_back(Word::from_mask(m));
    std::sort(spec.terms.begin(), spec.terms.end(), WordLess{});
    return spec;
}

std::string ModelSpec::label() const {
    // Print the maximal terms (the generators of the hierarchical model).
    std::vector<Word> maximal;
    for (Word t : terms) {
        bool covered = false;
        for (Word u : terms)
            if (!(u == t) && (t.mask() & u.mask()) == t.mask()) {
                covered = true;
                break;
            }
        if (!covered)
            maximal.push_back(t);
    }
    std::vector<Word> shown = hierarchical ? maximal : terms;
    std::stable_sort(shown.begin(), shown.end(), [](Word a, Word b) {
        if (a.length() != b.length())
            return a.length() > b.length();
        return word_less(a, b);
    });
    std::string out;
    for (size_t i = 0; i < shown.size(); ++i) {
        if (i)
            out += '/';
        out += shown[i].label();
    }
    return out;
}

IntMatrix CovariateMatrix::x0_transposed() const {
    IntMatrix t(nu(), runs_);
    for (int j = 0; j < nu(); ++j)
        for (int i = 0; i < runs_; ++i)
            t.at(j, i) = cols_[j][i];
    return t;
}

std::vector<int> column_for_term(const DesignMatrix& d, Word w) {
    if (w.is_identity())
        throw Error("column_for_term requires a non-identity word");
    std::vector<int> col(d.runs(), 1);
    for (int f : w.letters()) {
        if (f > d.factors())
            throw Error("term uses factor beyond the design");
        const auto& dc = d.column(f);
        for (int r = 0; r < d.runs(); ++r)
            col[r] *= dc[r];
    }
    return col;
}

CovariateMatrix build_covariate_matrix(const DesignMatrix& d, const ModelSpec& m) {
    const int k = d.runs();
    std::vector<Word> labels;
    std::vector<std::vector<int>> cols;
    labels.push_back(Word::identity());
    cols.emplace_back(k, 1);

    for (Word t : m.terms) {
        auto col = column_for_term(d, t);
        for (size_t j = 0; j < cols.size(); ++j)
            if (col == cols[j])
                throw Error("model inconsistent with aliasing relations: " + t.label() +
                            (j == 0 ? " is aliased to I" : " is aliased to " + labels[j].label()));
        labels.push_back(t);
        cols.push_back(std::move(col));
    }
    return CovariateMatrix(k, std::move(labels), std::move(cols));
}

EstimabilityReport estimability_report(const ModelSpec& m, const std::vector<Word>& subgroup,
                                       int runs, int max_alias_len) {
    EstimabilityReport rep;
    rep.nu = 1 + static_cast<int>(m.terms.size());
    rep.runs = runs;
    rep.saturated = rep.nu == runs;
    rep.over_saturated = rep.nu > runs;

    std::set<std::uint32_t> subgroup_masks;
    for (Word g : subgroup)
        subgroup_masks.insert(g.mask());

    for (size_t i = 0; i < m.terms.size(); ++i) {
        EstimabilityReport::TermInfo info;
        info.term = m.terms[i];
        info.aliased_to_identity = subgroup_masks.count(info.term.mask()) != 0;
        for (Word a : aliases(info.term, subgroup))
            if (a.length() <= max_alias_len)
                info.alias_coset.push_back(a);
        for (size_t j = 0; j < i && !info.collides_with; ++j) {
            // two terms collide when their product lies in the subgroup
            Word prod = m.terms[i] * m.terms[j];
            if (subgroup_masks.count(prod.mask()))
                info.collides_with = m.terms[j];
        }
        if (info.collides_with || info.aliased_to_identity)
            rep.any_collision = true;
        rep.terms.push_back(std::move(info));
    }
    return rep;
}

IntMatrix lawrence_lift(const IntMatrix& x0t) {
    const int nu = x0t.rows();
    const int k = x0t.cols();
    IntMatrix lifted(nu + k, 2 * k);
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < k; ++j)
            lifted.at(i, j) = x0t.at(i, j);
    for (int i = 0; i < k; ++i) {
        lifted.at(nu + i, i) = 1;
        lifted.at(nu + i, k + i) = 1;
    }
    return lifted;
}

std::vector<long long> sufficient_statistic(const CovariateMatrix& x0,
                                            std::span<const long long> y) {
    if (static_cast<int>(y.size()) != x0.runs())
        throw Error("observation vector length does not match the design");
    std::vector<long long> t(x0.nu(), 0);
    for (int j = 0; j < x0.nu(); ++j)
        for (int i = 0; i < x0.runs(); ++i)
            t[j] += static_cast<long long>(x0.entry(i, j)) * y[i];
    return t;
}

} // namespace fracfact
