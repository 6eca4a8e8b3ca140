#pragma once

#include <optional>
#include <string>

namespace persona {

/// Whether a performance scalar is a loss (lower wins) or an accuracy-style
/// score (higher wins). Two compared PerfPairs must share one.
enum class Orientation { lower_is_better, higher_is_better };

/// A strategy's performance on user-specific data (`local`) and on the
/// global dataset (`global`).
struct PerfPair {
    double local = 0.0;
    double global = 0.0;
    Orientation orientation = Orientation::higher_is_better;
};

/// alpha * local + (1 - alpha) * global. Throws on alpha outside [0, 1].
double personalization_score(double alpha, const PerfPair& perf);

enum class Preference { first, second, indifferent };
std::string preference_name(Preference p);

/// The weighting at which two strategies score equally, with the constant
/// preference on each side. `value` is empty when the score difference
/// never crosses zero inside [0, 1]; the preference fields then hold the
/// constant preference over the whole interval. A side that collapses to a
/// single point (cutoff at 0 or 1) reports indifferent for that side.
struct AlphaCutoff {
    std::optional<double> value;
    Preference above = Preference::indifferent;
    Preference below = Preference::indifferent;
};

/// alpha* = (g1 - g0) / ((p0 - p1) - (g0 - g1)). Mismatched orientations
/// throw; an identically-zero score difference reports indifferent
/// everywhere (not an error).
AlphaCutoff breakeven_alpha(const PerfPair& perf0, const PerfPair& perf1, double tol = 1e-12);

/// Which strategy wins at this alpha under the shared orientation;
/// |difference| < tol reports indifferent.
Preference preferred(double alpha, const PerfPair& perf0, const PerfPair& perf1,
                     double tol = 1e-12);

}  // namespace persona
