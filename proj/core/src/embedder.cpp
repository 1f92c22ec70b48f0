#include "kubediag/embedder.hpp"

#include <cmath>

#include "kubediag/errors.hpp"
#include "kubediag/text.hpp"

namespace kubediag {

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be positive");
}

Vector HashEmbedder::embed(std::string_view raw) const {
    const std::string trimmed = text::trim(raw);
    if (trimmed.empty()) throw Error(ErrorCode::InvalidQuery, "empty text");

    auto tokens = text::tokenize(trimmed);
    if (tokens.empty()) tokens.push_back(text::lower(trimmed));

    Vector v(dim_, 0.0);
    for (const auto& tok : tokens) {
        const std::uint64_t h = text::fnv1a64(tok);
        const double sign = (h >> 63) ? -1.0 : 1.0;
        v[h % dim_] += sign;
    }
    if (!normalize(v)) {
        v.assign(dim_, 0.0);
        v[text::fnv1a64(trimmed) % dim_] = 1.0;
    }
    return v;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) noexcept {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

bool normalize(Vector& v) noexcept {
    const double n = norm(v);
    if (n == 0.0 || !std::isfinite(n)) return false;
    for (auto& x : v) x /= n;
    return true;
}

}  // namespace kubediag
