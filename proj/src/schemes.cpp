#include "morrow/schemes.hpp"

#include <cmath>

namespace morrow {

namespace {

// integer ratio evaluated once in binary64
constexpr double q(long num, long den) { return static_cast<double>(num) / static_cast<double>(den); }

LmmCoeffs backward_euler_coeffs() { return {{1.0, -1.0}, {1.0, 0.0}}; }

} // namespace

LmmScheme::LmmScheme(std::string name, std::vector<LmmCoeffs> startup, LmmCoeffs steady)
    : name_(std::move(name)), startup_(std::move(startup)), steady_(std::move(steady))
{
    auto check = [](const LmmCoeffs& c) {
        if (c.alpha.size() != c.beta.size() || c.alpha.size() < 2)
            throw Error("LmmScheme: alpha and beta must have equal length k+1 >= 2");
        if (c.alpha[0] == 0.0)
            throw Error("LmmScheme: alpha_0 must be nonzero");
    };
    for (std::size_t i = 0; i < startup_.size(); ++i) {
        check(startup_[i]);
        if (startup_[i].k() > static_cast<int>(i) + 1)
            throw Error("LmmScheme: startup rule at n=" + std::to_string(i + 1) + " uses too much history");
    }
    check(steady_);
    if (steady_.k() > static_cast<int>(startup_.size()) + 1)
        throw Error("LmmScheme: missing startup rules");
}

const LmmCoeffs& LmmScheme::coeffs(int n) const
{
    if (n < 1)
        throw Error("LmmScheme::coeffs: time index must be >= 1");
    if (n <= static_cast<int>(startup_.size()))
        return startup_[n - 1];
    return steady_;
}

LmmScheme make_lmm(const std::string& name)
{
    if (name == "backward_euler")
        return LmmScheme(name, {}, backward_euler_coeffs());
    if (name == "forward_euler")
        return LmmScheme(name, {}, {{1.0, -1.0}, {0.0, 1.0}});
    if (name == "bdf2")
        return LmmScheme(name, {backward_euler_coeffs()}, {{1.0, -q(4, 3), q(1, 3)}, {q(2, 3), 0.0, 0.0}});
    throw Error("make_lmm: unknown scheme '" + name + "'");
}

ButcherTableau make_butcher(const std::string& name)
{
    ButcherTableau t;
    t.name = name;
    auto sized = [&](int s) {
        t.s = s;
        t.a = Matrix::Zero(s, s);
        t.b = Vector::Zero(s);
        t.c = Vector::Zero(s);
    };
    if (name == "explicit_euler") {
        sized(1);
        t.b << 1.0;
    } else if (name == "rk4") {
        sized(4);
        t.a(1, 0) = 0.5;
        t.a(2, 1) = 0.5;
        t.a(3, 2) = 1.0;
        t.b << q(1, 6), q(1, 3), q(1, 3), q(1, 6);
        t.c << 0.0, 0.5, 0.5, 1.0;
    } else if (name == "implicit_midpoint") {
        sized(1);
        t.a(0, 0) = 0.5;
        t.b << 1.0;
        t.c << 0.5;
    } else if (name == "backward_euler") {
        sized(1);
        t.a(0, 0) = 1.0;
        t.b << 1.0;
        t.c << 1.0;
    } else if (name == "sdirk2") {
        sized(2);
        const double g = 1.0 - 1.0 / std::sqrt(2.0);
        t.a << g, 0.0, 1.0 - g, g;
        t.b << 1.0 - g, g;
        t.c << g, 1.0;
    } else if (name == "gauss2") {
        sized(2);
        const double r = std::sqrt(3.0) / 6.0;
        t.a << 0.25, 0.25 - r, 0.25 + r, 0.25;
        t.b << 0.5, 0.5;
        t.c << 0.5 - r, 0.5 + r;
    } else {
        throw Error("make_butcher: unknown tableau '" + name + "'");
    }
    return t;
}

const char* to_string(SchemeTag t)
{
    switch (t) {
    case SchemeTag::explicit_rk: return "explicit";
    case SchemeTag::dirk: return "dirk";
    case SchemeTag::sdirk: return "sdirk";
    case SchemeTag::fully_implicit: return "fully_implicit";
    }
    return "?";
}

SchemeClass classify(const ButcherTableau& t)
{
    bool upper_zero = true;  // a_ij = 0 for j > i
    bool diag_zero = true;
    for (int i = 0; i < t.s; ++i) {
        for (int j = i + 1; j < t.s; ++j)
            if (t.a(i, j) != 0.0)
                upper_zero = false;
        if (t.a(i, i) != 0.0)
            diag_zero = false;
    }
    if (!upper_zero)
        return {SchemeTag::fully_implicit, 0.0};
    if (diag_zero)
        return {SchemeTag::explicit_rk, 0.0};
    for (int i = 1; i < t.s; ++i)
        if (t.a(i, i) != t.a(0, 0))
            return {SchemeTag::dirk, 0.0};
    return {SchemeTag::sdirk, t.a(0, 0)};
}

Scheme make_scheme(const std::string& name, const std::string& family)
{
    if (family == "lmm")
        return make_lmm(name);
    if (family == "rk")
        return make_butcher(name);
    throw Error("make_scheme: unknown family '" + family + "' (expected lmm or rk)");
}

std::string scheme_name(const Scheme& s)
{
    if (const auto* l = std::get_if<LmmScheme>(&s))
        return l->name();
    return std::get<ButcherTableau>(s).name;
}

} // namespace morrow
