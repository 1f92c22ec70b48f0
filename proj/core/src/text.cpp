#include "kubediag/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

namespace kubediag::text {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : s) {
        if (is_alnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::vector<std::string> tokenize_all(const std::vector<std::string>& lines) {
    std::vector<std::string> out;
    for (const auto& line : lines) {
        auto t = tokenize(line);
        out.insert(out.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
    }
    return out;
}

std::set<std::string> token_set(std::string_view s) {
    auto t = tokenize(s);
    return {t.begin(), t.end()};
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

double token_overlap(std::string_view a, std::string_view b) {
    const auto sa = token_set(a);
    const auto sb = token_set(b);
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t common = 0;
    for (const auto& t : sa) common += sb.count(t);
    return static_cast<double>(common) / static_cast<double>(std::max(sa.size(), sb.size()));
}

std::size_t count_tokens(std::string_view s) {
    std::size_t n = 0;
    bool in = false;
    for (char c : s) {
        if (is_space(c)) {
            in = false;
        } else if (!in) {
            in = true;
            ++n;
        }
    }
    return n;
}

std::string truncate_tokens(std::string_view s, std::size_t max_tokens) {
    if (count_tokens(s) <= max_tokens) return std::string(s);
    std::istringstream in{std::string(s)};
    std::string tok;
    std::string out;
    std::size_t n = 0;
    while (n < max_tokens && in >> tok) {
        if (n++) out.push_back(' ');
        out += tok;
    }
    return out;
}

}  // namespace kubediag::text
