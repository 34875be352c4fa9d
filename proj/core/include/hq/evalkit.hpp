#ifndef HQ_EVALKIT_HPP
#define HQ_EVALKIT_HPP

#include <string>
#include <utility>
#include <vector>

#include "hq/callgraph.hpp"

namespace hq {

enum class MatchMode { DIRECT, WRAPPER, NONE };

std::string to_string(MatchMode m);

struct MatchVerdict {
    bool matched = false;
    MatchMode mode = MatchMode::NONE;

    bool operator==(const MatchVerdict&) const = default;
};

/* Does a harness whose entry set is `entries` cover the gold target?
 * DIRECT when an entry shares the gold function's basename, WRAPPER when an
 * entry is one of the gold function's direct callees (a single hop of
 * delegation), NONE otherwise.  All ids must exist in the graph. */
MatchVerdict lg_matches_gold(const CallGraph& g, const std::vector<std::string>& entries,
                             const std::string& gold);

struct EvalCase {
    bool built = false;
    double line = 0.0;
    double branch = 0.0;
};

/* A case is productive when it built and reports nonzero line or branch
 * coverage.  Returns (productive, total). */
std::pair<int, int> productive_rate(const std::vector<EvalCase>& cases);

struct CoverageMeans {
    double mean_line = 0.0;
    double mean_branch = 0.0;
    bool empty_input = false;
};

/* Means over every case; a case that failed to build contributes zeros to
 * both numerators while staying in the denominator. */
CoverageMeans mean_coverage(const std::vector<EvalCase>& cases);

/* Spearman rank correlation between two orderings of the same items,
 * rho = 1 - 6 * sum(d_i^2) / (n * (n^2 - 1)).  Both sequences must be
 * permutations of one another with at least two distinct items. */
double spearman_rho(const std::vector<std::string>& order_a,
                    const std::vector<std::string>& order_b);

/* Median with the usual midpoint average for even counts. */
double median(std::vector<double> values);

}  // namespace hq

#endif
