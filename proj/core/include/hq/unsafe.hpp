#ifndef HQ_UNSAFE_HPP
#define HQ_UNSAFE_HPP

#include <map>
#include <string>
#include <vector>

namespace hq {

/* Where per-function unsafe-operation counts come from.  A node-level
 * unsafe_count in the graph document wins; otherwise per_function supplies
 * counts produced elsewhere (usually count_unsafe over the definition);
 * functions absent from both count as zero. */
struct UnsafeProfile {
    std::vector<std::string> patterns;
    std::map<std::string, int> per_function;
};

/* memcpy-family calls, allocator calls, and the raw dereference tokens.
 * The bracket token is deliberately last so callers trimming index noise
 * can pop it off. */
const std::vector<std::string>& default_unsafe_patterns();

UnsafeProfile default_unsafe_profile();

/* Purely lexical count over source text, no comment or string stripping.
 * Identifier patterns count only in call position (identifier followed by
 * '(' modulo whitespace); token patterns like "->" and "[" count every
 * non-overlapping occurrence. */
int count_unsafe(const std::string& source_text, const std::vector<std::string>& patterns);

}  // namespace hq

#endif
