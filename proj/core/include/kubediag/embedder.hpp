#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace kubediag {

using Vector = std::vector<double>;

/// Maps text into a unit-length vector. Implementations must be deterministic.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dim() const noexcept = 0;
    /// Throws Error(InvalidQuery) when `text` is empty after trimming.
    virtual Vector embed(std::string_view text) const = 0;
};

/// Signed feature hashing over a bag of lowercased alphanumeric tokens.
///
/// Each token is hashed with FNV-1a 64; the low bits pick the bucket
/// (hash mod dim) and the top bit picks the sign. Token order does not
/// matter. Text with no alphanumeric tokens is hashed as a single token.
/// If every contribution cancels, the bucket of the whole trimmed text is
/// set so the output is still unit length.
class HashEmbedder final : public Embedder {
public:
    explicit HashEmbedder(std::size_t dim = 256);

    std::size_t dim() const noexcept override { return dim_; }
    Vector embed(std::string_view text) const override;

private:
    std::size_t dim_;
};

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm(std::span<const double> a) noexcept;
/// Cosine similarity; zero when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b) noexcept;
/// In-place L2 normalization. Returns false (and leaves `v` untouched) for a zero vector.
bool normalize(Vector& v) noexcept;

}  // namespace kubediag
