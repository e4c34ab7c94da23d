#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ldaselect/errors.hpp"

namespace ldaselect {

// Dense, stable word-type ids: token i maps to id i in [0, size()).
class Vocabulary {
 public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::string> tokens) {
    tokens_.reserve(tokens.size());
    for (auto& t : tokens) add_new(std::move(t));
  }

  // Returns the existing id or appends the token with the next id.
  int add(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    return add_new(token);
  }

  std::optional<int> find(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  int size() const { return static_cast<int>(tokens_.size()); }

  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }

  const std::vector<std::string>& tokens() const { return tokens_; }

  // Synthetic tokens w0, w1, ... for models that never saw real text.
  static Vocabulary placeholder(int size) {
    if (size < 1) throw ValidationError("vocabulary size must be >= 1");
    std::vector<std::string> tokens;
    tokens.reserve(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) tokens.push_back("w" + std::to_string(i));
    return Vocabulary(std::move(tokens));
  }

 private:
  int add_new(std::string token) {
    if (token.empty()) throw ValidationError("empty token in vocabulary");
    int id = static_cast<int>(tokens_.size());
    auto [it, inserted] = index_.emplace(std::move(token), id);
    if (!inserted) throw ValidationError("duplicate token in vocabulary: " + it->first);
    tokens_.push_back(it->first);
    return id;
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace ldaselect
