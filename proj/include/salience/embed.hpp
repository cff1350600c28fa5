#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salience/matrix.hpp"

namespace salience {

class TokenBucket;

/// One row per id; rows are unit-length unless the provider returned a zero vector.
struct EmbeddingMatrix {
    std::vector<std::string> ids;
    DenseMatrix rows;
    std::string provider_name;

    std::size_t dim() const { return rows.cols; }
    std::size_t size() const { return ids.size(); }
    bool operator==(const EmbeddingMatrix&) const = default;
};

struct EmbedItem {
    std::string id;
    std::string text;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    /// Declared output dimension; 0 when only known after the first call.
    virtual std::size_t dim() const = 0;
    /// One vector per item, in item order.
    virtual std::vector<std::vector<double>> embed(std::span<const EmbedItem> items) = 0;
};

/// Hashed character n-gram embedding used when no encoder is available.
struct FallbackConfig {
    std::size_t dim = 256;
    std::size_t ngram_min = 3;
    std::size_t ngram_max = 5;
    std::uint64_t seed = 0x5A11E9CEULL;

    void validate() const;
};

struct FallbackVector {
    std::vector<double> values;
    bool degenerate = false;  // no n-grams (text shorter than ngram_min code points)
};

/// Each n-gram of the lowercased text adds +-1 to one bucket of a seeded hash (sign from the
/// top bit, bucket from the remaining bits); the result is L2-normalized.
FallbackVector fallback_embed(std::string_view text, const FallbackConfig& cfg);

class FallbackProvider : public EmbeddingProvider {
public:
    explicit FallbackProvider(FallbackConfig cfg);
    std::string name() const override;
    std::size_t dim() const override { return cfg_.dim; }
    std::vector<std::vector<double>> embed(std::span<const EmbedItem> items) override;

private:
    FallbackConfig cfg_;
};

/// Serves vectors computed elsewhere, looked up by id from an embedding file.
class PrecomputedProvider : public EmbeddingProvider {
public:
    explicit PrecomputedProvider(const std::filesystem::path& path);
    std::string name() const override;
    std::size_t dim() const override { return matrix_.dim(); }
    std::vector<std::vector<double>> embed(std::span<const EmbedItem> items) override;

private:
    EmbeddingMatrix matrix_;
    std::vector<std::pair<std::string, std::size_t>> index_;  // sorted by id
};

/// POSTs {"texts": [...]} and expects {"vectors": [[...], ...]} of the same length.
class RemoteProvider : public EmbeddingProvider {
public:
    RemoteProvider(std::string url, std::size_t declared_dim = 0, std::size_t batch_size = 64,
                   std::shared_ptr<TokenBucket> rate_limit = nullptr);
    std::string name() const override;
    std::size_t dim() const override { return dim_; }
    std::vector<std::vector<double>> embed(std::span<const EmbedItem> items) override;

private:
    std::string url_;
    std::size_t dim_;
    std::size_t batch_size_;
    std::shared_ptr<TokenBucket> rate_limit_;
};

/// Runs the provider over `items` (ids must be unique) and L2-normalizes every nonzero row.
/// Throws ProviderError or DimensionMismatch.
EmbeddingMatrix embed_batch(EmbeddingProvider& provider, std::span<const EmbedItem> items);

/// Row indices whose vector is all zeros.
std::vector<std::size_t> zero_rows(const DenseMatrix& m);

/// Rounds every value to the nearest float, the precision used on disk.
void quantize_to_float(DenseMatrix& m);

/// Container shared by embedding and layout files: a JSON header line
/// {"provider","dim","count","checksum"} followed by "id<TAB>base64(float32 LE)" per row.
/// The checksum is the SHA-256 of all row lines.
void write_vector_file(const std::filesystem::path& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_vector_file(const std::filesystem::path& path);
std::string serialize_vectors(const EmbeddingMatrix& m);
EmbeddingMatrix parse_vectors(std::string_view text);

}  // namespace salience
