#pragma once

#include <string>

namespace kawa {

/// Outcome of a diagnostic. Advisory marks a one-way theoretical implication
/// (e.g. a smallness gate) that is reported but never enforced.
enum class Verdict { Pass, Fail, Skipped, Advisory };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Skipped: return "skipped";
        case Verdict::Advisory: return "advisory";
    }
    return "fail";
}

/// Two sides of an inequality and the empirical constant relating them.
struct BoundCheck {
    std::string name;
    Verdict verdict = Verdict::Skipped;
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 0.0;  ///< lhs / rhs when rhs > 0
    std::string detail;
};

}  // namespace kawa
