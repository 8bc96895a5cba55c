#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ppi {

enum class Label : int { non_interaction = 0, interaction = 1 };

const char* label_name(Label l);
Label label_from_name(const std::string& s);  // throws on unknown name

// One corpus instance: a sentence, two annotated protein mentions with
// character spans, and a binary interaction label.
struct SentenceRecord {
  std::string id;
  std::string text;
  std::string protein1;
  std::pair<int, int> p1_span;  // [begin, end) byte offsets into text
  std::string protein2;
  std::pair<int, int> p2_span;
  Label label = Label::non_interaction;
};

struct Corpus {
  std::vector<SentenceRecord> records;
  size_t size() const { return records.size(); }
};

// Reads one JSON object per line:
//   {"id": str, "text": str, "p1": str, "p1_span": [int,int],
//    "p2": str, "p2_span": [int,int], "label": "interaction"|"non_interaction"}
// Validates spans against the text and mention strings, uniqueness of ids,
// and a non-empty corpus. Malformed lines report the line number; span
// violations report the record id.
Corpus load_corpus(const std::string& path);

// Writes the same JSONL schema; load_corpus(save_corpus(c)) round-trips.
void save_corpus(const Corpus& corpus, const std::string& path);

struct FoldSplit {
  std::vector<int> train;
  std::vector<int> test;
};

// Disjoint test folds covering all indices, sizes differing by at most one,
// deterministic under seed. With stratify, the shuffle-and-deal runs per
// label class.
std::vector<FoldSplit> fold_split(const Corpus& corpus, int folds, uint64_t seed,
                                  bool stratify = false);

}  // namespace ppi
