#ifndef FRACFACT_MOVES_HPP
#define FRACFACT_MOVES_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracfact/fiber.hpp"
#include "fracfact/intmat.hpp"

namespace fracfact {

using MoveVec = std::vector<long long>;

enum class MoveProvenance { computed, imported, primitive };

/// A set of moves bound to a configuration matrix. All moves live in the
/// integer kernel of that matrix, are nonzero, sign-canonical (first nonzero
/// entry positive) and duplicate-free.
struct MoveSet {
    std::vector<MoveVec> moves;
    MoveProvenance provenance = MoveProvenance::computed;
    std::uint64_t matrix_fingerprint = 0;

    std::size_t size() const { return moves.size(); }
};

std::uint64_t matrix_fingerprint(const IntMatrix& m);

bool in_kernel(const IntMatrix& x0t, const MoveVec& z);

/// Flip sign so the first nonzero entry is positive; divide by the gcd.
void canonicalize_move(MoveVec& z);

struct CompletionBudget {
    std::size_t max_vectors = 100'000;
    long long max_degree = 1'000'000;    // 1-norm of the positive part
    long long max_entry = 1'000'000'000; // abort on runaway growth
};

/// Sign-compatible (conformal) reduction: u reduces by v when v+ <= u+ and
/// v- <= u- componentwise. Returns the normal form of z against the set
/// (elements used with both signs).
MoveVec conformal_normal_form(MoveVec z, const std::vector<MoveVec>& set);

/// Pottier-style completion returning the Graver basis of the lattice
/// spanned by the given kernel basis: all conformally irreducible nonzero
/// lattice vectors, one representative per +- pair. The result connects
/// every fiber of the bound matrix, including bounded (lifted) ones.
/// Throws BudgetError("completion budget exceeded ...") past the caps.
MoveSet graver_completion(const std::vector<MoveVec>& lattice_basis, const IntMatrix& x0t,
                          const CompletionBudget& budget = {});

/// Parse a 4ti2-style basis file: header "count length", then count rows.
/// Every row is validated against the kernel of x0t; offenders are reported
/// as "invalid move at row r" (1-based, counting data rows).
MoveSet import_basis(std::istream& in, const IntMatrix& x0t);
MoveSet import_basis_file(const std::string& path, const IntMatrix& x0t);

/// "count length" header then rows, 4ti2-compatible.
void write_basis(std::ostream& out, const MoveSet& ms);

struct ConnectivityReport {
    bool connected = false;
    std::size_t fiber_size = 0;
    std::size_t components = 0;
    // representatives of two distinct components when disconnected
    std::optional<std::pair<MoveVec, MoveVec>> witness;
};

/// Enumerates the fiber of `target` (delegating to enumerate_fiber) and
/// checks that the graph with edges y <-> y+z, z in the move set, is
/// connected.
ConnectivityReport verify_connectivity(const MoveSet& ms, const IntMatrix& x0t,
                                       std::span<const long long> target,
                                       std::optional<std::span<const long long>> bounds =
                                           std::nullopt,
                                       const FiberBudget& budget = {});

} // namespace fracfact

#endif
