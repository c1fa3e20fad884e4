#include "wrapforge/embeddings.hpp"

#include <algorithm>
#include <charconv>

#include "wrapforge/digest.hpp"
#include "wrapforge/text.hpp"

namespace wrapforge {

std::vector<EmbeddingVector<double>> embed_texts(std::span<const std::string> texts,
                                                 const EndpointConfig& cfg) {
  std::vector<EmbeddingVector<double>> out;
  if (texts.empty()) return out;
  cfg.validate();
  JsonClient client(cfg);
  out.reserve(texts.size());
  const auto batch = static_cast<std::size_t>(cfg.embedding_batch);
  for (std::size_t start = 0; start < texts.size(); start += batch) {
    const std::size_t end = std::min(texts.size(), start + batch);
    nlohmann::json input = nlohmann::json::array();
    for (std::size_t i = start; i < end; ++i) input.push_back(texts[i]);
    const auto res = client.post("/v1/embeddings", {{"model", cfg.model_id}, {"input", input}});
    std::vector<EmbeddingVector<double>> chunk(end - start);
    std::vector<bool> filled(end - start, false);
    try {
      const auto& data = res.body.at("data");
      if (data.size() != end - start) {
        throw EndpointError("embedding count mismatch", 200, false, res.attempts);
      }
      for (std::size_t k = 0; k < data.size(); ++k) {
        const auto& item = data[k];
        const std::size_t idx = item.contains("index") ? item.at("index").get<std::size_t>() : k;
        if (idx >= chunk.size() || filled[idx]) {
          throw EndpointError("bad embedding index", 200, false, res.attempts);
        }
        const auto values = item.at("embedding").get<std::vector<double>>();
        chunk[idx] = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
        filled[idx] = true;
      }
    } catch (const nlohmann::json::exception& e) {
      throw EndpointError(std::string("malformed embedding response: ") + e.what(), 200, false,
                          res.attempts);
    }
    for (auto& v : chunk) out.push_back(std::move(v));
  }
  const Eigen::Index dim = out.front().size();
  for (const auto& v : out) {
    if (v.size() != dim || dim == 0) throw EndpointError("embedding dimension mismatch", 200, false, 1);
  }
  return out;
}

EmbeddingVector<double> mock_embedding(std::string_view text, int dim) {
  EmbeddingVector<double> v = EmbeddingVector<double>::Zero(dim);
  constexpr std::string_view kBasis = "basis:";
  if (text.substr(0, kBasis.size()) == kBasis) {
    int k = 0;
    const auto digits = text.substr(kBasis.size());
    const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc{} && k >= 0 && k < dim) {
      v(k) = 1.0;
      return v;
    }
  }
  for (const TextSpan& t : tokenize(text, TokenScheme::UnicodeWords)) {
    const std::string h = sha256_hex(to_lower_ascii(t.view(text)));
    const auto bucket = std::stoull(h.substr(0, 8), nullptr, 16) % static_cast<unsigned>(dim);
    const double sign = (std::stoul(h.substr(8, 2), nullptr, 16) & 1U) ? 1.0 : -1.0;
    v(static_cast<Eigen::Index>(bucket)) += sign;
  }
  const double n = v.norm();
  if (n == 0.0) {
    v(0) = 1.0;
    return v;
  }
  return v / n;
}

}  // namespace wrapforge
