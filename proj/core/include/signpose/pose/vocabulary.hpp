#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace signpose {

// Token table with reserved ids for the CTC blank and the text specials.
// Non-reserved tokens map bijectively onto ids starting at kFirstToken.
class Vocabulary {
 public:
  static constexpr int kBlank = 0;
  static constexpr int kPad = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kUnk = 4;
  static constexpr int kFirstToken = 5;

  Vocabulary();

  // Adds a token if absent; returns its id. Reserved names are rejected.
  int add(const std::string& token);
  // Id for a token; kUnk when unknown.
  int id(const std::string& token) const;
  bool contains(const std::string& token) const;
  // Token string for an id (including reserved names like "[bos]").
  const std::string& token(int id) const;

  int size() const { return static_cast<int>(id_to_token_.size()); }
  int num_tokens() const { return size() - kFirstToken; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  // Builds a vocabulary from whitespace tokens, sorted for determinism.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens, bool lowercase = false);

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

std::string lowercased(const std::string& s);

}  // namespace signpose
