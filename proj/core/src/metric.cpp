#include "persona/metric.hpp"

#include <cmath>
#include <stdexcept>

namespace persona {

double personalization_score(double alpha, const PerfPair& perf) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("personalization_score: alpha outside [0,1]");
    }
    return alpha * perf.local + (1.0 - alpha) * perf.global;
}

std::string preference_name(Preference p) {
    switch (p) {
        case Preference::first: return "first";
        case Preference::second: return "second";
        case Preference::indifferent: return "indifferent";
    }
    throw std::invalid_argument("unknown preference");
}

Preference preferred(double alpha, const PerfPair& perf0, const PerfPair& perf1, double tol) {
    if (perf0.orientation != perf1.orientation) {
        throw std::invalid_argument("preferred: mismatched orientations");
    }
    const double diff = personalization_score(alpha, perf0) - personalization_score(alpha, perf1);
    if (std::abs(diff) < tol) return Preference::indifferent;
    const bool first_wins = perf0.orientation == Orientation::lower_is_better ? diff < 0.0 : diff > 0.0;
    return first_wins ? Preference::first : Preference::second;
}

AlphaCutoff breakeven_alpha(const PerfPair& perf0, const PerfPair& perf1, double tol) {
    if (perf0.orientation != perf1.orientation) {
        throw std::invalid_argument("breakeven_alpha: mismatched orientations");
    }
    AlphaCutoff cutoff;
    const double numerator = perf1.global - perf0.global;          // g1 - g0
    const double denominator =
        (perf0.local - perf1.local) - (perf0.global - perf1.global);  // (p0-p1) - (g0-g1)

    // Score difference is affine in alpha: diff(a) = (g0-g1) + a*denominator.
    if (denominator == 0.0) {
        cutoff.above = cutoff.below = preferred(0.5, perf0, perf1, tol);
        return cutoff;
    }
    const double alpha = numerator / denominator;
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        cutoff.above = cutoff.below = preferred(0.5, perf0, perf1, tol);
        return cutoff;
    }
    cutoff.value = alpha;
    if (alpha < 1.0) cutoff.above = preferred((alpha + 1.0) / 2.0, perf0, perf1, tol);
    if (alpha > 0.0) cutoff.below = preferred(alpha / 2.0, perf0, perf1, tol);
    return cutoff;
}

}  // namespace persona
