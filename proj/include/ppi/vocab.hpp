#pragma once

#include <map>
#include <string>
#include <vector>

namespace ppi {

// Lowercases and splits on every non-alphanumeric byte; punctuation is
// dropped, so "IL-2R binds." -> {"il", "2r", "binds"}.
std::vector<std::string> tokenize(const std::string& text);

// Token index built from the training split only. Indices are dense
// 0..size()-1 in order of first occurrence.
class Vocabulary {
 public:
  // max_words > 0 keeps only the max_words most frequent training tokens
  // (ties broken lexicographically) before indexing.
  static Vocabulary build(const std::vector<std::string>& train_sentences, int max_words = 0);

  int size() const { return static_cast<int>(tokens_.size()); }
  int index_of(const std::string& token) const;  // -1 when out of vocabulary
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Binary presence vector over the vocabulary; with counts, occurrence
  // counts instead. Out-of-vocabulary tokens are ignored.
  std::vector<double> one_hot(const std::string& sentence, bool counts = false) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::map<std::string, int> index_;
  std::vector<std::string> tokens_;
};

}  // namespace ppi
