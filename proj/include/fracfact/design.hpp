#ifndef FRACFACT_DESIGN_HPP
#define FRACFACT_DESIGN_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracfact/word.hpp"

namespace fracfact {

/// One defining relation "target = word in basic factors", e.g. E = ABC.
struct Generator {
    int target = 0; // 1-based factor assigned by this generator
    Word word;      // product of basic factors
};

/// A 2^{p-q} fractional factorial design given by its generators.
/// Factors not named as a generator target are the basic factors; the
/// design has k = 2^{p-q} runs.
class DesignSpec {
public:
    DesignSpec(int p, std::vector<Generator> generators);

    int p() const { return p_; }
    int q() const { return static_cast<int>(generators_.size()); }
    int runs() const { return 1 << (p_ - q()); }
    const std::vector<Generator>& generators() const { return generators_; }

    /// Ascending factor indices of the p-q basic factors.
    const std::vector<int>& basic_factors() const { return basic_; }
    bool is_basic(int factor) const;

    /// The defining word of a generator: target joined with its word
    /// (E = ABC gives ABCE).
    static Word defining_word(const Generator& g);

private:
    int p_;
    std::vector<Generator> generators_;
    std::vector<int> basic_;
};

/// Multiplicative closure of the q defining words: the defining contrast
/// subgroup, of size 2^q, including I. Sorted by (length, lex).
/// Throws Error("rank-deficient generators") if the generators do not
/// produce a subgroup of full size 2^q.
std::vector<Word> expand_defining_contrast(const DesignSpec& spec);

/// Same closure from raw defining words (ABDE, ACDF, ...).
std::vector<Word> expand_defining_words(const std::vector<Word>& defining);

/// The alias coset {w*g : g in subgroup} \ {w}, sorted by (length, lex).
std::vector<Word> aliases(Word w, const std::vector<Word>& subgroup);

/// Minimum word length over non-identity subgroup members; empty optional
/// for the full factorial (subgroup == {I}), whose resolution is unbounded.
std::optional<int> resolution(const std::vector<Word>& subgroup);

/// k x p matrix of -1/+1 levels. Rows follow Yates standard order over the
/// basic factors: the first basic factor alternates slowest, the last
/// alternates fastest, and run 1 is all +1. Generated columns are entrywise
/// products of their generator's basic columns.
class DesignMatrix {
public:
    DesignMatrix(int runs, int p) : runs_(runs), cols_(p, std::vector<int>(runs, 0)) {}

    int runs() const { return runs_; }
    int factors() const { return static_cast<int>(cols_.size()); }
    int entry(int run, int factor) const { return cols_[factor - 1][run]; } // factor 1-based
    const std::vector<int>& column(int factor) const { return cols_[factor - 1]; }
    std::vector<int>& column(int factor) { return cols_[factor - 1]; }

private:
    int runs_;
    std::vector<std::vector<int>> cols_;
};

DesignMatrix build_design_matrix(const DesignSpec& spec);

/// Roman numeral for a resolution (IV, III, V, ...).
std::string roman_numeral(int n);

} // namespace fracfact

#endif
