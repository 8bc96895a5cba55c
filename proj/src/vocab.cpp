#include "ppi/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <stdexcept>

namespace ppi {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& train_sentences, int max_words) {
  if (train_sentences.empty())
    throw std::runtime_error("vocabulary: cannot build from an empty corpus");

  Vocabulary v;
  std::map<std::string, long> freq;
  std::vector<std::string> first_seen;
  for (const std::string& s : train_sentences)
    for (const std::string& tok : tokenize(s)) {
      auto [it, inserted] = freq.emplace(tok, 0);
      it->second += 1;
      if (inserted) first_seen.push_back(tok);
    }

  std::set<std::string> keep;
  if (max_words > 0 && static_cast<int>(freq.size()) > max_words) {
    std::vector<std::pair<std::string, long>> by_freq(freq.begin(), freq.end());
    std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (int i = 0; i < max_words; ++i) keep.insert(by_freq[static_cast<size_t>(i)].first);
  }

  for (const std::string& tok : first_seen) {
    if (!keep.empty() && !keep.count(tok)) continue;
    v.index_.emplace(tok, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(tok);
  }
  return v;
}

int Vocabulary::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

std::vector<double> Vocabulary::one_hot(const std::string& sentence, bool counts) const {
  std::vector<double> vec(static_cast<size_t>(size()), 0.0);
  for (const std::string& tok : tokenize(sentence)) {
    const int i = index_of(tok);
    if (i < 0) continue;
    if (counts)
      vec[static_cast<size_t>(i)] += 1.0;
    else
      vec[static_cast<size_t>(i)] = 1.0;
  }
  return vec;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("vocabulary: cannot write '" + path + "'");
  for (const std::string& tok : tokens_) out << tok << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("vocabulary: cannot open '" + path + "'");
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    v.index_.emplace(line, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(line);
  }
  return v;
}

}  // namespace ppi
