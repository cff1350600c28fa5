#include "salience/embed.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "salience/errors.hpp"
#include "salience/hashing.hpp"
#include "salience/http.hpp"
#include "salience/textprep.hpp"
#include "salience/youtube.hpp"

namespace salience {

using nlohmann::json;

void FallbackConfig::validate() const {
    if (dim < 8) throw ConfigError(fmt::format("fallback embedding dim must be >= 8, got {}", dim));
    if (ngram_min < 1 || ngram_min > ngram_max)
        throw ConfigError(fmt::format("invalid n-gram range ({}, {})", ngram_min, ngram_max));
}

FallbackVector fallback_embed(std::string_view text, const FallbackConfig& cfg) {
    const std::u32string cps = decode_utf8(to_lower_utf8(text));
    FallbackVector out;
    out.values.assign(cfg.dim, 0.0);
    bool any = false;
    for (std::size_t n = cfg.ngram_min; n <= cfg.ngram_max; ++n) {
        if (cps.size() < n) break;
        for (std::size_t start = 0; start + n <= cps.size(); ++start) {
            const std::string gram = encode_utf8(std::u32string_view(cps).substr(start, n));
            const std::uint64_t h = seeded_hash(gram, cfg.seed);
            const double sign = (h >> 63) ? -1.0 : 1.0;
            const std::size_t bucket = static_cast<std::size_t>((h & 0x7FFFFFFFFFFFFFFFULL) % cfg.dim);
            out.values[bucket] += sign;
            any = true;
        }
    }
    double norm = 0.0;
    for (double v : out.values) norm += v * v;
    norm = std::sqrt(norm);
    if (!any || norm == 0.0) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        out.degenerate = true;
        return out;
    }
    for (double& v : out.values) v /= norm;
    return out;
}

// ---- providers ----

FallbackProvider::FallbackProvider(FallbackConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::string FallbackProvider::name() const {
    return fmt::format("fallback:ngram{}-{}:dim{}:seed{}", cfg_.ngram_min, cfg_.ngram_max, cfg_.dim, cfg_.seed);
}

std::vector<std::vector<double>> FallbackProvider::embed(std::span<const EmbedItem> items) {
    std::vector<std::vector<double>> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(fallback_embed(item.text, cfg_).values);
    return out;
}

PrecomputedProvider::PrecomputedProvider(const std::filesystem::path& path) : matrix_(read_vector_file(path)) {
    for (std::size_t i = 0; i < matrix_.ids.size(); ++i) index_.emplace_back(matrix_.ids[i], i);
    std::sort(index_.begin(), index_.end());
}

std::string PrecomputedProvider::name() const { return "precomputed:" + matrix_.provider_name; }

std::vector<std::vector<double>> PrecomputedProvider::embed(std::span<const EmbedItem> items) {
    std::vector<std::vector<double>> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        auto it = std::lower_bound(index_.begin(), index_.end(), std::make_pair(item.id, std::size_t{0}));
        if (it == index_.end() || it->first != item.id)
            throw ProviderError(fmt::format("no precomputed vector for id '{}'", item.id), item.id);
        const auto row = matrix_.rows.row(it->second);
        out.emplace_back(row.begin(), row.end());
    }
    return out;
}

RemoteProvider::RemoteProvider(std::string url, std::size_t declared_dim, std::size_t batch_size,
                               std::shared_ptr<TokenBucket> rate_limit)
    : url_(std::move(url)), dim_(declared_dim), batch_size_(std::max<std::size_t>(1, batch_size)),
      rate_limit_(std::move(rate_limit)) {}

std::string RemoteProvider::name() const { return "remote:" + url_; }

std::vector<std::vector<double>> RemoteProvider::embed(std::span<const EmbedItem> items) {
    const auto [origin, path] = http::split_url(url_);
    std::vector<std::vector<double>> out;
    out.reserve(items.size());
    for (std::size_t start = 0; start < items.size(); start += batch_size_) {
        const auto batch = items.subspan(start, std::min(batch_size_, items.size() - start));
        json request{{"texts", json::array()}};
        for (const auto& item : batch) request["texts"].push_back(item.text);
        if (rate_limit_) rate_limit_->acquire();
        http::Response response;
        try {
            response = http::post(origin, path, request.dump(-1, ' ', false, json::error_handler_t::replace),
                                  "application/json");
        } catch (const TransportError& e) {
            throw ProviderError(fmt::format("embedding request failed: {}", e.what()), batch.front().id);
        }
        if (response.status != 200)
            throw ProviderError(fmt::format("embedding service returned HTTP {}", response.status), batch.front().id);
        json body;
        try {
            body = json::parse(response.body);
        } catch (const json::parse_error& e) {
            throw ProviderError(fmt::format("embedding response is not JSON: {}", e.what()), batch.front().id);
        }
        const auto vectors = body.find("vectors");
        if (vectors == body.end() || !vectors->is_array() || vectors->size() != batch.size())
            throw ProviderError(fmt::format("embedding response must carry {} vectors", batch.size()),
                                batch.front().id);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto& v = (*vectors)[i];
            if (!v.is_array()) throw ProviderError("vector is not an array", batch[i].id);
            std::vector<double> row;
            row.reserve(v.size());
            for (const auto& x : v) {
                if (!x.is_number()) throw ProviderError("vector entry is not a number", batch[i].id);
                row.push_back(x.get<double>());
            }
            if (dim_ == 0) dim_ = row.size();
            if (row.size() != dim_)
                throw DimensionMismatch(
                    fmt::format("id '{}': provider returned dim {} but expected {}", batch[i].id, row.size(), dim_));
            out.push_back(std::move(row));
        }
    }
    return out;
}

// ---- batch ----

EmbeddingMatrix embed_batch(EmbeddingProvider& provider, std::span<const EmbedItem> items) {
    std::set<std::string_view> ids;
    for (const auto& item : items)
        if (!ids.insert(item.id).second) throw ConfigError(fmt::format("duplicate embedding id '{}'", item.id));

    EmbeddingMatrix m;
    m.provider_name = provider.name();
    auto vectors = items.empty() ? std::vector<std::vector<double>>{} : provider.embed(items);
    if (vectors.size() != items.size())
        throw ProviderError(fmt::format("provider returned {} vectors for {} texts", vectors.size(), items.size()));

    const std::size_t dim = vectors.empty() ? provider.dim() : vectors.front().size();
    m.rows = DenseMatrix(items.size(), dim);
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& v = vectors[i];
        if (v.size() != dim)
            throw DimensionMismatch(fmt::format("id '{}' has dim {} but batch dim is {}", items[i].id, v.size(), dim));
        double norm = 0.0;
        for (double x : v) {
            if (!std::isfinite(x)) throw ProviderError("provider returned a non-finite value", items[i].id);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        auto row = m.rows.row(i);
        for (std::size_t j = 0; j < dim; ++j) row[j] = norm > 0.0 ? v[j] / norm : 0.0;
        m.ids.push_back(items[i].id);
    }
    return m;
}

std::vector<std::size_t> zero_rows(const DenseMatrix& m) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.rows; ++i) {
        const auto r = m.row(i);
        if (std::all_of(r.begin(), r.end(), [](double x) { return x == 0.0; })) out.push_back(i);
    }
    return out;
}

void quantize_to_float(DenseMatrix& m) {
    for (double& v : m.values) v = static_cast<double>(static_cast<float>(v));
}

// ---- persistence ----

namespace {

std::string encode_row(std::span<const double> row) {
    std::vector<std::uint8_t> bytes(row.size() * 4);
    for (std::size_t j = 0; j < row.size(); ++j) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(row[j]));
        for (int b = 0; b < 4; ++b) bytes[j * 4 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    return base64_encode(bytes);
}

void decode_row(std::string_view text, std::span<double> row, std::size_t line) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = base64_decode(text);
    } catch (const SchemaError& e) {
        throw SchemaError(e.what(), line);
    }
    if (bytes.size() != row.size() * 4)
        throw SchemaError(fmt::format("row has {} bytes, expected {}", bytes.size(), row.size() * 4), line);
    for (std::size_t j = 0; j < row.size(); ++j) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[j * 4 + b]) << (8 * b);
        row[j] = static_cast<double>(std::bit_cast<float>(bits));
    }
}

}  // namespace

std::string serialize_vectors(const EmbeddingMatrix& m) {
    std::string body;
    for (std::size_t i = 0; i < m.ids.size(); ++i) {
        if (m.ids[i].find_first_of("\t\n") != std::string::npos)
            throw SchemaError(fmt::format("id '{}' contains a tab or newline", m.ids[i]));
        body += m.ids[i];
        body += '\t';
        body += encode_row(m.rows.row(i));
        body += '\n';
    }
    nlohmann::ordered_json header{{"provider", m.provider_name},
                                  {"dim", m.dim()},
                                  {"count", m.ids.size()},
                                  {"checksum", "sha256:" + sha256_hex(body)}};
    return header.dump() + "\n" + body;
}

EmbeddingMatrix parse_vectors(std::string_view text) {
    const auto newline = text.find('\n');
    if (newline == std::string_view::npos) throw SchemaError("vector file has no header line", 1);
    json header;
    try {
        header = json::parse(text.substr(0, newline));
    } catch (const json::parse_error& e) {
        throw SchemaError(fmt::format("bad header: {}", e.what()), 1);
    }
    for (const char* key : {"provider", "dim", "count", "checksum"})
        if (!header.contains(key)) throw SchemaError(fmt::format("header lacks '{}'", key), 1);
    const std::string_view body = text.substr(newline + 1);
    if (header["checksum"].get<std::string>() != "sha256:" + sha256_hex(body))
        throw SchemaError("checksum mismatch", 1);

    EmbeddingMatrix m;
    m.provider_name = header["provider"].get<std::string>();
    const auto dim = header["dim"].get<std::size_t>();
    const auto count = header["count"].get<std::size_t>();
    m.rows = DenseMatrix(count, dim);
    std::size_t line = 1;
    std::size_t pos = 0;
    while (pos < body.size()) {
        ++line;
        const auto end = body.find('\n', pos);
        const std::string_view row_text = body.substr(pos, end == std::string_view::npos ? body.size() - pos : end - pos);
        pos = end == std::string_view::npos ? body.size() : end + 1;
        const auto tab = row_text.find('\t');
        if (tab == std::string_view::npos) throw SchemaError("row lacks a tab separator", line);
        if (m.ids.size() >= count) throw SchemaError("more rows than the header count", line);
        decode_row(row_text.substr(tab + 1), m.rows.row(m.ids.size()), line);
        m.ids.emplace_back(row_text.substr(0, tab));
    }
    if (m.ids.size() != count)
        throw SchemaError(fmt::format("header count {} but {} rows", count, m.ids.size()));
    return m;
}

void write_vector_file(const std::filesystem::path& path, const EmbeddingMatrix& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    out << serialize_vectors(m);
    if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

EmbeddingMatrix read_vector_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_vectors(ss.str());
    } catch (const SchemaError& e) {
        throw SchemaError(fmt::format("{}: {}", path.string(), e.detail()), e.line());
    }
}

}  // namespace salience
