#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace toolweaver {

/// Unit-L2-norm vector. Construction normalizes; a zero vector is rejected.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values);

    /// Canonical basis vector e_index of the given dimension.
    static EmbeddingVector basis(std::size_t dim, std::size_t index);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
};

/// Dot product of unit vectors; throws PreconditionError on dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Anything that maps texts to unit vectors, in order.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

/// Character-trigram feature hashing over "^" + lowercase(text) + "$", counts bucketed by
/// FNV-1a modulo `dim`, then L2-normalized. Text with no trigram maps to e_0.
/// Pure function of (text, dim); dim must be at least 16.
EmbeddingVector hashing_embedder(std::string_view text, std::size_t dim = 256);

class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dim = 256);
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
    std::size_t dim() const noexcept { return dim_; }

private:
    std::size_t dim_;
};

} // namespace toolweaver
