#include "hq/evalkit.hpp"

#include <algorithm>
#include <map>

namespace hq {

std::string to_string(MatchMode m) {
    switch (m) {
    case MatchMode::DIRECT: return "direct";
    case MatchMode::WRAPPER: return "wrapper";
    case MatchMode::NONE: return "none";
    }
    return "none";
}

MatchVerdict lg_matches_gold(const CallGraph& g, const std::vector<std::string>& entries,
                             const std::string& gold) {
    const FunctionNode& gold_node = g.node(gold);
    for (const auto& entry : entries) {
        if (g.node(entry).basename == gold_node.basename) {
            return {true, MatchMode::DIRECT};
        }
    }
    const auto& wrapped = g.callees_of(gold);
    for (const auto& entry : entries) {
        if (wrapped.count(entry)) {
            return {true, MatchMode::WRAPPER};
        }
    }
    return {false, MatchMode::NONE};
}

std::pair<int, int> productive_rate(const std::vector<EvalCase>& cases) {
    int productive = 0;
    for (const auto& c : cases) {
        if (c.built && (c.line > 0.0 || c.branch > 0.0)) ++productive;
    }
    return {productive, static_cast<int>(cases.size())};
}

CoverageMeans mean_coverage(const std::vector<EvalCase>& cases) {
    if (cases.empty()) return {0.0, 0.0, true};
    double line = 0.0;
    double branch = 0.0;
    for (const auto& c : cases) {
        if (!c.built) continue;  // zero contribution, full weight in the denominator
        line += c.line;
        branch += c.branch;
    }
    const double n = static_cast<double>(cases.size());
    return {line / n, branch / n, false};
}

double spearman_rho(const std::vector<std::string>& order_a,
                    const std::vector<std::string>& order_b) {
    if (order_a.size() != order_b.size()) {
        throw LengthMismatchError("rank orderings differ in length");
    }
    const std::size_t n = order_a.size();
    if (n < 2) {
        throw LengthMismatchError("rank correlation needs at least two items");
    }

    std::map<std::string, std::size_t> rank_b;
    for (std::size_t i = 0; i < n; ++i) {
        if (!rank_b.emplace(order_b[i], i).second) {
            throw NotAPermutationError("duplicate item \"" + order_b[i] + "\" in ordering");
        }
    }

    double sum_d2 = 0.0;
    std::size_t seen = 0;
    std::map<std::string, bool> used;
    for (std::size_t i = 0; i < n; ++i) {
        auto it = rank_b.find(order_a[i]);
        if (it == rank_b.end() || used[order_a[i]]) {
            throw NotAPermutationError("orderings are not permutations of the same items");
        }
        used[order_a[i]] = true;
        ++seen;
        const double d = static_cast<double>(i) - static_cast<double>(it->second);
        sum_d2 += d * d;
    }
    (void)seen;

    const double nn = static_cast<double>(n);
    return 1.0 - 6.0 * sum_d2 / (nn * (nn * nn - 1.0));
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw LengthMismatchError("median of an empty sequence");
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace hq
