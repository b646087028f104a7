#ifndef FRACFACT_CORRESPOND_HPP
#define FRACFACT_CORRESPOND_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracfact/intmat.hpp"
#include "fracfact/moves.hpp"

namespace fracfact {

/// A model for a 2^m contingency table: hierarchical margin sets plus
/// optional explicit extra sufficient-statistic rows (such as the pair of
/// alternating-sum contrasts written "(ABC)").
struct TableModel {
    int m = 0;
    std::vector<std::uint32_t> margins; // bitmask over axes 1..m
    struct Extra {
        std::string label;
        std::vector<long long> row; // length 2^m, cell-indexed
    };
    std::vector<Extra> extras;

    int cells() const { return 1 << m; }
    std::string label() const;
};

/// Cell index of levels in {1,2}^m: lexicographic with axis 1 slowest,
/// matching the Yates run order of the corresponding design.
int cell_index(const std::vector<int>& levels);

/// Indicator rows for every level combination of every margin, then the
/// extra rows. Rows = sum over margins of 2^|margin| + #extras.
IntMatrix table_model_matrix(const TableModel& tm);

/// The two alternating parity sums of the full-interaction word over the
/// axes in `mask` (e.g. "(ABC)" on a 2^3 table).
std::vector<TableModel::Extra> parity_contrast_rows(int m, std::uint32_t mask);

/// Row spaces over the rationals coincide: each statistic is a nonsingular
/// linear function of the other.
bool equivalent_sufficient_statistics(const IntMatrix& a, const IntMatrix& b);

struct CorrespondenceResult {
    enum class Kind { hierarchical, hierarchical_plus_parity, none };
    Kind kind = Kind::none;
    std::optional<TableModel> model;
};

/// Searches every hierarchical model of the 2^m table (all simplicial
/// complexes over the axes), optionally extended by the full-word parity
/// pair, for row-space equivalence with x0t. m <= 4.
CorrespondenceResult correspondence_report(const IntMatrix& x0t, int m);

/// Margin sets are exactly the maximal cliques of a chordal interaction
/// graph covering every axis.
bool is_decomposable(const TableModel& tm);

/// Degree-2 moves (a)(b) - (c)(d) from the junction-tree separators of a
/// decomposable model; a minimal Markov basis for the two-clique cases.
/// Throws Error for non-decomposable models.
MoveSet primitive_moves_for_decomposable(const TableModel& tm);

} // namespace fracfact

#endif
