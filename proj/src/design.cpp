#include "fracfact/design.hpp"

#include <algorithm>
#include <set>

#include "fracfact/error.hpp"

namespace fracfact {

DesignSpec::DesignSpec(int p, std::vector<Generator> generators)
    : p_(p), generators_(std::move(generators)) {
    if (p_ < 1 || p_ > Word::max_factors)
        throw ParseError("number of factors must be in 1.." +
                         std::to_string(Word::max_factors));
    int q = static_cast<int>(generators_.size());
    if (q >= p_)
        throw ParseError("number of generators must be less than p");

    std::uint32_t assigned = 0;
    for (const auto& g : generators_) {
        if (g.target < 1 || g.target > p_)
            throw ParseError("generator assigns factor outside 1..p");
        if ((assigned >> (g.target - 1)) & 1u)
            throw ParseError("two generators assign the same factor " +
                             std::string(1, factor_letter(g.target)));
        assigned |= 1u << (g.target - 1);
    }
    for (int f = 1; f <= p_; ++f)
        if (!((assigned >> (f - 1)) & 1u))
            basic_.push_back(f);

    for (const auto& g : generators_) {
        if (g.word.is_identity())
            throw ParseError("generator word must not be the identity");
        for (int f : g.word.letters())
            if ((assigned >> (f - 1)) & 1u)
                throw ParseError("generator word for " + std::string(1, factor_letter(g.target)) +
                                 " uses non-basic factor " + std::string(1, factor_letter(f)));
    }
}

bool DesignSpec::is_basic(int factor) const {
    return std::find(basic_.begin(), basic_.end(), factor) != basic_.end();
}

Word DesignSpec::defining_word(const Generator& g) {
    return Word::single(g.target) * g.word;
}

std::vector<Word> expand_defining_words(const std::vector<Word>& defining) {
    std::set<std::uint32_t> group;
    group.insert(0);
    for (Word w : defining) {
        std::set<std::uint32_t> next = group;
        for (std::uint32_t m : group)
            next.insert(m ^ w.mask());
        group.swap(next);
    }
    if (group.size() != (1ull << defining.size()))
        throw Error("rank-deficient generators");
    std::vector<Word> out;
    out.reserve(group.size());
    for (std::uint32_t m : group)
        out.push_back(Word::from_mask(m));
    std::sort(out.begin(), out.end(), WordLess{});
    return out;
}

std::vector<Word> expand_defining_contrast(const DesignSpec& spec) {
    std::vector<Word> defining;
    for (const auto& g : spec.generators())
        defining.push_back(DesignSpec::defining_word(g));
    return expand_defining_words(defining);
}

std::vector<Word> aliases(Word w, const std::vector<Word>& subgroup) {
    std::vector<Word> out;
    out.reserve(subgroup.size());
    for (Word g : subgroup) {
        Word a = w * g;
        if (!(a == w))
            out.push_back(a);
    }
    std::sort(out.begin(), out.end(), WordLess{});
    return out;
}

std::optional<int> resolution(const std::vector<Word>& subgroup) {
    std::optional<int> best;
    for (Word g : subgroup) {
        if (g.is_identity())
            continue;
        if (!best || g.length() < *best)
            best = g.length();
    }
    return best;
}

DesignMatrix build_design_matrix(const DesignSpec& spec) {
    const int k = spec.runs();
    const int nb = static_cast<int>(spec.basic_factors().size());
    DesignMatrix d(k, spec.p());

    // Basic factors in Yates order: basic factor m of nb flips every
    // 2^(nb-1-m) runs, starting at +1.
    for (int m = 0; m < nb; ++m) {
        int factor = spec.basic_factors()[m];
        auto& col = d.column(factor);
        for (int r = 0; r < k; ++r)
            col[r] = ((r >> (nb - 1 - m)) & 1) ? -1 : +1;
    }
    for (const auto& g : spec.generators()) {
        auto& col = d.column(g.target);
        for (int r = 0; r < k; ++r) {
            int v = 1;
            for (int f : g.word.letters())
                v *= d.entry(r, f);
            col[r] = v;
        }
    }
    return d;
}

std::string roman_numeral(int n) {
    static const struct { int v; const char* s; } parts[] = {
        {1000, "M"}, {900, "CM"}, {500, "D"}, {400, "CD"}, {100, "C"}, {90, "XC"},
        {50, "L"},   {40, "XL"},  {10, "X"},  {9, "IX"},   {5, "V"},   {4, "IV"},  {1, "I"}};
    std::string out;
    for (const auto& part : parts)
        while (n >= part.v) {
            out += part.s;
            n -= part.v;
        }
    return out;
}

} // namespace fracfact
