#ifndef FRACFACT_MODEL_HPP
#define FRACFACT_MODEL_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fracfact/design.hpp"
#include "fracfact/intmat.hpp"
#include "fracfact/word.hpp"

namespace fracfact {

/// A null model: a set of effect words, optionally the hierarchical closure
/// of its generators (every subword of a term is also a term).
struct ModelSpec {
    std::vector<Word> terms; // sorted (length, lex), unique, no identity
    bool hierarchical = true;

    /// Parse "AC/BD/E/F/G". With closure on, generators expand to all of
    /// their nonempty subwords.
    static ModelSpec parse(std::string_view text, int p, bool closure = true);

    std::string label() const; // slash-joined generators/terms
};

/// k x nu covariate matrix: column 0 is the all-ones intercept, the rest are
/// the -1/+1 interaction contrasts of the model terms in (length, lex) order.
class CovariateMatrix {
public:
    CovariateMatrix(int runs, std::vector<Word> labels, std::vector<std::vector<int>> cols)
        : runs_(runs), labels_(std::move(labels)), cols_(std::move(cols)) {}

    int runs() const { return runs_; }
    int nu() const { return static_cast<int>(cols_.size()); }
    /// labels()[0] is I (the intercept).
    const std::vector<Word>& labels() const { return labels_; }
    int entry(int run, int col) const { return cols_[col][run]; }
    const std::vector<int>& column(int col) const { return cols_[col]; }

    /// nu x k transpose, the configuration whose kernel supplies the moves.
    IntMatrix x0_transposed() const;

private:
    int runs_;
    std::vector<Word> labels_;
    std::vector<std::vector<int>> cols_;
};

/// Entrywise product of the design columns named by w (w != I).
std::vector<int> column_for_term(const DesignMatrix& d, Word w);

/// Builds X0. Throws Error("model inconsistent with aliasing relations")
/// when two terms (or a term and the intercept) produce identical columns.
CovariateMatrix build_covariate_matrix(const DesignMatrix& d, const ModelSpec& m);

struct EstimabilityReport {
    struct TermInfo {
        Word term;
        std::vector<Word> alias_coset;       // sorted, truncated at max_len
        std::optional<Word> collides_with;   // earlier term aliased to this one
        bool aliased_to_identity = false;
    };
    std::vector<TermInfo> terms;
    int nu = 0;
    int runs = 0;
    bool saturated = false;      // nu == runs: not testable
    bool over_saturated = false; // nu > runs
    bool any_collision = false;

    bool estimable() const { return !any_collision && !over_saturated; }
};

EstimabilityReport estimability_report(const ModelSpec& m, const std::vector<Word>& subgroup,
                                       int runs, int max_alias_len = 4);

/// Block matrix [[X0', 0], [I_k, I_k]] of size (nu+k) x 2k: the configuration
/// whose fibers encode binomial observations together with their complements.
IntMatrix lawrence_lift(const IntMatrix& x0t);

/// t = X0' y.
std::vector<long long> sufficient_statistic(const CovariateMatrix& x0,
                                            std::span<const long long> y);

} // namespace fracfact

#endif
