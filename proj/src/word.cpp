#include "fracfact/word.hpp"

#include <bit>

#include "fracfact/error.hpp"

namespace fracfact {

// Letters in factor order; 'I' is skipped because it denotes the identity.
static constexpr char kLetters[] = "ABCDEFGHJKLMNOPQRSTUVWXY";

char factor_letter(int factor) {
    if (factor < 1 || factor > Word::max_factors)
        throw Error("factor index out of range: " + std::to_string(factor));
    return kLetters[factor - 1];
}

int letter_factor(char c) {
    for (int i = 0; i < Word::max_factors; ++i)
        if (kLetters[i] == c)
            return i + 1;
    return 0;
}

Word Word::single(int factor) {
    if (factor < 1 || factor > max_factors)
        throw Error("factor index out of range: " + std::to_string(factor));
    return Word(1u << (factor - 1));
}

Word Word::parse(std::string_view text, int p) {
    if (text.empty())
        throw ParseError("empty word");
    if (text == "I")
        return identity();
    std::uint32_t bits = 0;
    for (char c : text) {
        int f = letter_factor(c);
        if (f == 0)
            throw ParseError(std::string("invalid factor letter '") + c + "' in word \"" +
                             std::string(text) + "\"");
        if (f > p)
            throw ParseError(std::string("factor ") + c + " exceeds the number of factors (p=" +
                             std::to_string(p) + ")");
        if ((bits >> (f - 1)) & 1u)
            throw ParseError(std::string("repeated factor letter '") + c + "' in word \"" +
                             std::string(text) + "\"");
        bits |= 1u << (f - 1);
    }
    return Word(bits);
}

int Word::length() const { return std::popcount(bits_); }

std::vector<int> Word::letters() const {
    std::vector<int> out;
    for (int f = 1; f <= max_factors; ++f)
        if (contains(f))
            out.push_back(f);
    return out;
}

std::string Word::label() const {
    if (is_identity())
        return "I";
    std::string s;
    for (int f = 1; f <= max_factors; ++f)
        if (contains(f))
            s += kLetters[f - 1];
    return s;
}

bool word_less(Word a, Word b) {
    int la = a.length(), lb = b.length();
    if (la != lb)
        return la < lb;
    // Same length: lexicographic on the sorted letter sequence.
    std::uint32_t x = a.mask(), y = b.mask();
    while (x != 0 && y != 0) {
        int fx = std::countr_zero(x), fy = std::countr_zero(y);
        if (fx != fy)
            return fx < fy;
        x &= x - 1;
        y &= y - 1;
    }
    return false;
}

} // namespace fracfact
