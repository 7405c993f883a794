#include "toolweaver/embedding.hpp"

#include "toolweaver/errors.hpp"
#include "toolweaver/json_util.hpp"

#include <algorithm>
#include <cmath>

namespace toolweaver {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw PreconditionError("embedding has zero dimensions");
    double norm = 0.0;
    for (double v : values_) {
        if (!std::isfinite(v)) throw PreconditionError("embedding contains a non-finite value");
        norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) throw PreconditionError("cannot normalize a zero embedding");
    for (double& v : values_) v /= norm;
}

EmbeddingVector EmbeddingVector::basis(std::size_t dim, std::size_t index) {
    if (index >= dim) throw PreconditionError("basis index out of range");
    std::vector<double> values(dim, 0.0);
    values[index] = 1.0;
    return EmbeddingVector(std::move(values));
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw PreconditionError("embedding dimension mismatch: " + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()));
    }
    const auto x = a.values();
    const auto y = b.values();
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    // rounding can push unit-vector products just past ±1
    return std::clamp(dot, -1.0, 1.0);
}

EmbeddingVector hashing_embedder(std::string_view text, std::size_t dim) {
    if (dim < 16) throw PreconditionError("hashing embedder needs dim >= 16");
    std::string padded = "^" + to_lower_ascii(text) + "$";
    if (padded.size() < 3) return EmbeddingVector::basis(dim, 0);
    std::vector<double> counts(dim, 0.0);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        counts[fnv1a64(std::string_view(padded).substr(i, 3)) % dim] += 1.0;
    }
    return EmbeddingVector(std::move(counts));
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
    if (dim < 16) throw PreconditionError("hashing embedder needs dim >= 16");
}

std::vector<EmbeddingVector> HashingEmbedder::embed(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) out.push_back(hashing_embedder(text, dim_));
    return out;
}

} // namespace toolweaver
