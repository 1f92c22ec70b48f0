#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kubediag {

/// Seconds since the Unix epoch.
using Timestamp = double;

inline constexpr double kSecondsPerDay = 86400.0;

enum class Outcome { Success, Failure, Partial };

const char* to_string(Outcome outcome) noexcept;
Outcome outcome_from_string(std::string_view text);

enum class Pathway { Intuitive, Analytical };

const char* to_string(Pathway pathway) noexcept;
Pathway pathway_from_string(std::string_view text);

/// An incoming diagnostic request: free-text symptoms plus context labels
/// such as "namespace:prod" or "kind:Deployment".
struct Query {
    std::string id;
    std::vector<std::string> symptoms;
    std::set<std::string> context;
};

}  // namespace kubediag
