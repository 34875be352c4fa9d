#include "hq/unsafe.hpp"

#include <cctype>
#include <set>

namespace hq {

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_identifier(const std::string& pattern) {
    if (pattern.empty()) return false;
    for (char c : pattern) {
        if (!is_ident_char(c)) return false;
    }
    return true;
}

int count_token(const std::string& text, const std::string& token) {
    int count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        ++count;
        pos += token.size();
    }
    return count;
}

}  // namespace

const std::vector<std::string>& default_unsafe_patterns() {
    static const std::vector<std::string> patterns{
        "memcpy", "memmove", "memset", "malloc", "calloc", "realloc",
        "free", "strcpy", "strcat", "sprintf", "strncpy", "->", "[",
    };
    return patterns;
}

UnsafeProfile default_unsafe_profile() { return UnsafeProfile{default_unsafe_patterns(), {}}; }

int count_unsafe(const std::string& text, const std::vector<std::string>& patterns) {
    std::set<std::string> identifiers;
    int count = 0;
    for (const auto& pattern : patterns) {
        if (is_identifier(pattern)) {
            identifiers.insert(pattern);
        } else {
            count += count_token(text, pattern);
        }
    }
    if (identifiers.empty()) return count;

    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (!is_ident_char(text[i]) || std::isdigit(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < n && is_ident_char(text[i])) ++i;
        if (!identifiers.count(text.substr(start, i - start))) continue;
        std::size_t j = i;
        while (j < n && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j < n && text[j] == '(') ++count;
    }
    return count;
}

}  // namespace hq
