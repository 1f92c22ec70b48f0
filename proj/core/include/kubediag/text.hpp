#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kubediag::text {

std::string trim(std::string_view s);
std::string lower(std::string_view s);

/// Lowercased maximal runs of ASCII alphanumerics. Everything else separates.
std::vector<std::string> tokenize(std::string_view s);

std::vector<std::string> tokenize_all(const std::vector<std::string>& lines);
std::set<std::string> token_set(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view s) noexcept;

std::string hex64(std::uint64_t value);

/// Symmetric normalized token overlap |A∩B| / max(|A|,|B|) over token sets.
/// Two empty inputs score 1.
double token_overlap(std::string_view a, std::string_view b);

/// Number of whitespace-separated tokens.
std::size_t count_tokens(std::string_view s);

/// Keeps the first `max_tokens` whitespace-separated tokens, joined by single spaces.
std::string truncate_tokens(std::string_view s, std::size_t max_tokens);

}  // namespace kubediag::text
