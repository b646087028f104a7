#ifndef FRACFACT_WORD_HPP
#define FRACFACT_WORD_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fracfact {

/// An effect word: a set of factors, e.g. "ABD". The empty set is the
/// identity word I. Factors are 1-based indices into the letter sequence
/// A,B,...,H,J,...  (the letter I is reserved for the identity).
class Word {
public:
    static constexpr int max_factors = 24;

    constexpr Word() = default;

    static Word identity() { return Word(); }
    static Word from_mask(std::uint32_t mask) { return Word(mask); }
    static Word single(int factor); // 1-based

    /// Parse a word such as "ABD" or "I". Factors must be within 1..p.
    /// Throws ParseError on unknown letters or out-of-range factors.
    static Word parse(std::string_view text, int p);

    /// Group product = symmetric difference of letter sets; w*w == I.
    Word operator*(Word other) const { return Word(bits_ ^ other.bits_); }

    bool is_identity() const { return bits_ == 0; }
    int length() const;
    std::uint32_t mask() const { return bits_; }
    bool contains(int factor) const { return (bits_ >> (factor - 1)) & 1u; }

    /// Sorted 1-based factor indices.
    std::vector<int> letters() const;

    /// "ABD" for {1,2,4}; "I" for the identity.
    std::string label() const;

    bool operator==(const Word&) const = default;

private:
    explicit constexpr Word(std::uint32_t bits) : bits_(bits) {}
    std::uint32_t bits_ = 0;
};

/// Factor index (1-based) -> letter, skipping I: A..H, J..Y.
char factor_letter(int factor);

/// Letter -> factor index, or 0 if the letter is invalid (including 'I').
int letter_factor(char c);

/// Ordering by (length, lexicographic label): A < B < AB < AC < BC < ABC ...
bool word_less(Word a, Word b);

struct WordLess {
    bool operator()(Word a, Word b) const { return word_less(a, b); }
};

} // namespace fracfact

#endif
