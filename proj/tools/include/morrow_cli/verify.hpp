#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace morrow::cli {

struct VerifyRow {
    std::string property;
    std::string detail;
    double value = 0.0;
    double tolerance = 0.0;
    std::string result;  // PASS | FAIL | SKIP
};

struct VerifyOptions {
    std::string model = "gradient_flow";
    int n = 32;
    std::uint64_t seed = 0;
};

// Equivalence, commutativity and bound-soundness checks on one benchmark model.
std::vector<VerifyRow> run_verify(const VerifyOptions& opts);

void print_verify_table(std::ostream& os, const std::vector<VerifyRow>& rows);
std::string verify_csv(const std::vector<VerifyRow>& rows);

} // namespace morrow::cli
