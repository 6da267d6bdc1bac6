#pragma once

// Reference sentence embedder: lowercase, split on non-alphanumerics, term
// frequencies hashed into a fixed 256-dimensional vector (FNV-1a 64), then
// L2-normalized. Deliberately simple and fully deterministic; real models
// plug in behind the Embedder interface.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tme/error.hpp"

namespace tme {

inline constexpr std::size_t kEmbeddingDim = 256;

using EmbeddingVector = std::vector<double>;

inline std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else if (!word.empty()) {
      tokens.push_back(std::move(word));
      word.clear();
    }
  }
  if (!word.empty()) tokens.push_back(std::move(word));
  return tokens;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 14695981039346656037ull;
  for (char ch : data) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 1099511628211ull;
  }
  return hash;
}

struct Embedder {
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(const std::string& text) const = 0;
  virtual std::string name() const = 0;
};

class HashedTfEmbedder final : public Embedder {
 public:
  EmbeddingVector embed(const std::string& text) const override {
    EmbeddingVector v(kEmbeddingDim, 0.0);
    for (const std::string& token : tokenize_words(text))
      v[fnv1a64(token) % kEmbeddingDim] += 1.0;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double& x : v) x /= norm;
    return v;
  }

  std::string name() const override { return "hashed-tf"; }
};

inline EmbeddingVector embed(const std::string& text) {
  static const HashedTfEmbedder embedder;
  return embedder.embed(text);
}

inline double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.size() != v.size())
    fail(ErrorCode::invalid_argument,
         "dimension mismatch: " + std::to_string(u.size()) + " vs " +
             std::to_string(v.size()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

inline std::map<std::string, std::shared_ptr<const Embedder>>& embedder_registry() {
  static std::map<std::string, std::shared_ptr<const Embedder>> registry{
      {"hashed-tf", std::make_shared<HashedTfEmbedder>()}};
  return registry;
}

inline std::shared_ptr<const Embedder> find_embedder(const std::string& name) {
  auto& registry = embedder_registry();
  auto it = registry.find(name);
  if (it == registry.end()) fail(ErrorCode::not_found, "no embedder '" + name + "'");
  return it->second;
}

}  // namespace tme
