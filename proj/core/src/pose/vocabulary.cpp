#include "signpose/pose/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include "signpose/common/json_io.hpp"

namespace signpose {

namespace {
const std::vector<std::string> kReserved = {"[blank]", "[pad]", "[bos]", "[eos]", "[unk]"};
}

Vocabulary::Vocabulary() {
  for (int i = 0; i < static_cast<int>(kReserved.size()); ++i) {
    id_to_token_.push_back(kReserved[static_cast<std::size_t>(i)]);
    token_to_id_[kReserved[static_cast<std::size_t>(i)]] = i;
  }
}

int Vocabulary::add(const std::string& token) {
  if (std::find(kReserved.begin(), kReserved.end(), token) != kReserved.end()) {
    throw std::invalid_argument("vocabulary: '" + token + "' is reserved");
  }
  auto it = token_to_id_.find(token);
  if (it != token_to_id_.end()) return it->second;
  int id = static_cast<int>(id_to_token_.size());
  id_to_token_.push_back(token);
  token_to_id_[token] = id;
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const { return token_to_id_.count(token) > 0; }

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= static_cast<int>(id_to_token_.size())) {
    throw std::out_of_range("vocabulary: id " + std::to_string(id) + " out of range");
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  json j;
  j["schema_version"] = 1;
  j["tokens"] = std::vector<std::string>(id_to_token_.begin() + kFirstToken, id_to_token_.end());
  save_json_file(path, j);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  json j = load_json_file(path);
  Vocabulary v;
  for (const auto& t : j.at("tokens")) v.add(t.get<std::string>());
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens, bool lowercase) {
  std::set<std::string> uniq;
  for (const std::string& t : tokens) uniq.insert(lowercase ? lowercased(t) : t);
  Vocabulary v;
  for (const std::string& t : uniq) v.add(t);
  return v;
}

std::string lowercased(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace signpose
