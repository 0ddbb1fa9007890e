#pragma once

#include "morrow/core.hpp"

#include <string>
#include <variant>
#include <vector>

namespace morrow {

// Coefficients of one LMM step; alpha[0..k], beta[0..k].
struct LmmCoeffs {
    std::vector<double> alpha;
    std::vector<double> beta;
    int k() const { return static_cast<int>(alpha.size()) - 1; }
};

class LmmScheme {
public:
    LmmScheme(std::string name, std::vector<LmmCoeffs> startup, LmmCoeffs steady);

    const std::string& name() const { return name_; }
    int k() const { return steady_.k(); }
    // n >= 1. Steps n <= startup count use the startup rules.
    const LmmCoeffs& coeffs(int n) const;

private:
    std::string name_;
    std::vector<LmmCoeffs> startup_;
    LmmCoeffs steady_;
};

LmmScheme make_lmm(const std::string& name);

struct ButcherTableau {
    std::string name;
    int s = 0;
    Matrix a;
    Vector b;
    Vector c;
};

ButcherTableau make_butcher(const std::string& name);

enum class SchemeTag { explicit_rk, dirk, sdirk, fully_implicit };
const char* to_string(SchemeTag t);

struct SchemeClass {
    SchemeTag tag;
    double diagonal_value = 0.0;  // meaningful for sdirk
};

SchemeClass classify(const ButcherTableau& t);

using Scheme = std::variant<LmmScheme, ButcherTableau>;

// Resolves an LMM or RK name; LMM names take precedence for the shared "backward_euler".
Scheme make_scheme(const std::string& name, const std::string& family = "lmm");
std::string scheme_name(const Scheme& s);

} // namespace morrow
