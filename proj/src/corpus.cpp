#include "ppi/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace ppi {

using nlohmann::json;

const char* label_name(Label l) {
  return l == Label::interaction ? "interaction" : "non_interaction";
}

Label label_from_name(const std::string& s) {
  if (s == "interaction") return Label::interaction;
  if (s == "non_interaction") return Label::non_interaction;
  throw std::runtime_error("corpus: unknown label '" + s + "'");
}

namespace {

void check_span(const SentenceRecord& r, const std::string& mention,
                const std::pair<int, int>& span, const char* which) {
  const int n = static_cast<int>(r.text.size());
  if (span.first < 0 || span.second < span.first || span.second > n)
    throw std::runtime_error("corpus: record '" + r.id + "': " + which + " span [" +
                             std::to_string(span.first) + ", " + std::to_string(span.second) +
                             ") outside text of length " + std::to_string(n));
  const std::string sub =
      r.text.substr(static_cast<size_t>(span.first), static_cast<size_t>(span.second - span.first));
  if (sub != mention)
    throw std::runtime_error("corpus: record '" + r.id + "': " + which + " span text '" + sub +
                             "' does not match mention '" + mention + "'");
}

std::pair<int, int> read_span(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2)
    throw std::runtime_error(std::string(key) + " must be [begin, end]");
  return {v[0].get<int>(), v[1].get<int>()};
}

}  // namespace

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("corpus: cannot open '" + path + "'");

  Corpus corpus;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    SentenceRecord r;
    try {
      j = json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.text = j.at("text").get<std::string>();
      r.protein1 = j.at("p1").get<std::string>();
      r.p1_span = read_span(j, "p1_span");
      r.protein2 = j.at("p2").get<std::string>();
      r.p2_span = read_span(j, "p2_span");
      r.label = label_from_name(j.at("label").get<std::string>());
    } catch (const std::exception& e) {
      throw std::runtime_error("corpus: " + path + ":" + std::to_string(line_no) +
                               ": malformed record: " + e.what());
    }
    check_span(r, r.protein1, r.p1_span, "p1");
    check_span(r, r.protein2, r.p2_span, "p2");
    if (!ids.insert(r.id).second)
      throw std::runtime_error("corpus: duplicate record id '" + r.id + "'");
    corpus.records.push_back(std::move(r));
  }
  if (corpus.records.empty())
    throw std::runtime_error("corpus: '" + path + "' contains no records");
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("corpus: cannot write '" + path + "'");
  for (const SentenceRecord& r : corpus.records) {
    json j;
    j["id"] = r.id;
    j["text"] = r.text;
    j["p1"] = r.protein1;
    j["p1_span"] = {r.p1_span.first, r.p1_span.second};
    j["p2"] = r.protein2;
    j["p2_span"] = {r.p2_span.first, r.p2_span.second};
    j["label"] = label_name(r.label);
    out << j.dump() << "\n";
  }
}

std::vector<FoldSplit> fold_split(const Corpus& corpus, int folds, uint64_t seed, bool stratify) {
  const int n = static_cast<int>(corpus.size());
  if (folds < 2) throw std::runtime_error("fold_split: folds must be >= 2");
  if (n < folds)
    throw std::runtime_error("fold_split: corpus of " + std::to_string(n) +
                             " records cannot be split into " + std::to_string(folds) + " folds");

  std::vector<std::vector<int>> groups;
  if (stratify) {
    std::vector<int> pos, neg;
    for (int i = 0; i < n; ++i)
      (corpus.records[static_cast<size_t>(i)].label == Label::interaction ? pos : neg).push_back(i);
    groups = {std::move(neg), std::move(pos)};
  } else {
    std::vector<int> all(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
    groups = {std::move(all)};
  }

  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> test_sets(static_cast<size_t>(folds));
  size_t cursor = 0;  // rotates across groups so overall fold sizes differ by <= 1
  for (auto& group : groups) {
    std::shuffle(group.begin(), group.end(), rng);
    for (int idx : group) test_sets[cursor++ % static_cast<size_t>(folds)].push_back(idx);
  }

  std::vector<FoldSplit> out(static_cast<size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    auto& test = test_sets[static_cast<size_t>(f)];
    std::sort(test.begin(), test.end());
    std::vector<char> in_test(static_cast<size_t>(n), 0);
    for (int i : test) in_test[static_cast<size_t>(i)] = 1;
    FoldSplit& split = out[static_cast<size_t>(f)];
    split.test = test;
    for (int i = 0; i < n; ++i)
      if (!in_test[static_cast<size_t>(i)]) split.train.push_back(i);
  }
  return out;
}

}  // namespace ppi
