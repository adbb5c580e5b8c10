#include "regrisk/rational.hpp"

#include "regrisk/error.hpp"

#include <cctype>

namespace regrisk {

Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw ConfigError("empty number");

    if (auto slash = s.find('/'); slash != std::string::npos) {
        Rational num = parse_rational(s.substr(0, slash));
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == 0) throw ConfigError("zero denominator in '" + text + "'");
        return num / den;
    }

    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
    BigInt mantissa = 0;
    int scale = 0;
    bool digits = false, dot = false;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mantissa = mantissa * 10 + (c - '0');
            if (dot) --scale;
            digits = true;
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            break;
        }
    }
    if (!digits) throw ConfigError("not a number: '" + text + "'");
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') throw ConfigError("not a number: '" + text + "'");
        const std::string ex = s.substr(i + 1);
        std::size_t used = 0;
        int e = 0;
        try {
            e = std::stoi(ex, &used);
        } catch (const std::exception&) {
            throw ConfigError("bad exponent in '" + text + "'");
        }
        if (used != ex.size()) throw ConfigError("bad exponent in '" + text + "'");
        scale += e;
    }
    Rational r(mantissa);
    BigInt ten = 10;
    if (scale > 0) r *= Rational(boost::multiprecision::pow(ten, scale));
    if (scale < 0) r /= Rational(boost::multiprecision::pow(ten, -scale));
    return negative ? Rational(-r) : r;
}

std::string to_string(const Rational& r) {
    std::string num = boost::multiprecision::numerator(r).str();
    BigInt den = boost::multiprecision::denominator(r);
    if (den == 1) return num;
    return num + "/" + den.str();
}

}  // namespace regrisk
