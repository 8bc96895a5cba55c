#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "ppi/corpus.hpp"

using ppi::Corpus;
using ppi::Label;
using ppi::SentenceRecord;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

const char* kGoodLine =
    R"({"id":"s1","text":"ABC binds DEF here","p1":"ABC","p1_span":[0,3],"p2":"DEF","p2_span":[10,13],"label":"interaction"})";

SentenceRecord make_record(const std::string& id, const std::string& p1, const std::string& p2,
                           Label label) {
  SentenceRecord r;
  r.id = id;
  r.text = p1 + " with " + p2;
  r.protein1 = p1;
  r.p1_span = {0, static_cast<int>(p1.size())};
  r.protein2 = p2;
  r.p2_span = {static_cast<int>(p1.size()) + 6, static_cast<int>(r.text.size())};
  r.label = label;
  return r;
}

}  // namespace

TEST_CASE("load_corpus reads a valid JSONL file") {
  const std::string path = temp_path("corpus_ok.jsonl");
  write_file(path, std::string(kGoodLine) + "\n" +
                       R"({"id":"s2","text":"GHI near JKL","p1":"GHI","p1_span":[0,3],"p2":"JKL","p2_span":[9,12],"label":"non_interaction"})" +
                       "\n\n");  // trailing blank line tolerated

  Corpus c = ppi::load_corpus(path);
  REQUIRE(c.size() == 2);
  CHECK(c.records[0].id == "s1");
  CHECK(c.records[0].protein1 == "ABC");
  CHECK(c.records[0].p1_span.first == 0);
  CHECK(c.records[0].p1_span.second == 3);
  CHECK(c.records[0].label == Label::interaction);
  CHECK(c.records[1].label == Label::non_interaction);
  std::remove(path.c_str());
}

TEST_CASE("load_corpus rejects malformed input") {
  const std::string path = temp_path("corpus_bad.jsonl");

  SUBCASE("span text does not match the mention") {
    write_file(path,
               R"({"id":"s1","text":"ABC binds DEF","p1":"XYZ","p1_span":[0,3],"p2":"DEF","p2_span":[10,13],"label":"interaction"})");
    CHECK_THROWS(ppi::load_corpus(path));
  }
  SUBCASE("span out of bounds") {
    write_file(path,
               R"({"id":"s1","text":"ABC binds DEF","p1":"ABC","p1_span":[0,3],"p2":"DEF","p2_span":[10,99],"label":"interaction"})");
    CHECK_THROWS(ppi::load_corpus(path));
  }
  SUBCASE("unknown label") {
    write_file(path,
               R"({"id":"s1","text":"ABC binds DEF","p1":"ABC","p1_span":[0,3],"p2":"DEF","p2_span":[10,13],"label":"maybe"})");
    CHECK_THROWS(ppi::load_corpus(path));
  }
  SUBCASE("duplicate ids") {
    write_file(path, std::string(kGoodLine) + "\n" + kGoodLine + "\n");
    CHECK_THROWS(ppi::load_corpus(path));
  }
  SUBCASE("broken json reports the line number") {
    write_file(path, std::string(kGoodLine) + "\n{not json\n");
    try {
      ppi::load_corpus(path);
      FAIL("expected a parse error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
  }
  SUBCASE("empty corpus") {
    write_file(path, "\n");
    CHECK_THROWS(ppi::load_corpus(path));
  }
  SUBCASE("missing file") { CHECK_THROWS(ppi::load_corpus(temp_path("nope.jsonl"))); }
  std::remove(path.c_str());
}

TEST_CASE("save then load round-trips records") {
  Corpus c;
  c.records.push_back(make_record("a", "P53", "MDM2", Label::interaction));
  c.records.push_back(make_record("b", "BRCA1", "RAD51", Label::non_interaction));
  const std::string path = temp_path("corpus_rt.jsonl");
  ppi::save_corpus(c, path);
  Corpus back = ppi::load_corpus(path);
  REQUIRE(back.size() == 2);
  CHECK(back.records[0].text == c.records[0].text);
  CHECK(back.records[1].p2_span == c.records[1].p2_span);
  CHECK(back.records[1].label == Label::non_interaction);
  std::remove(path.c_str());
}

TEST_CASE("fold_split partitions the corpus") {
  Corpus c;
  for (int i = 0; i < 23; ++i)
    c.records.push_back(make_record("r" + std::to_string(i), "A" + std::to_string(i), "B",
                                    i % 3 == 0 ? Label::interaction : Label::non_interaction));

  auto folds = ppi::fold_split(c, 5, 42);
  REQUIRE(folds.size() == 5);

  std::set<int> seen;
  for (const auto& f : folds) {
    CHECK(static_cast<int>(f.test.size()) >= 23 / 5);
    CHECK(static_cast<int>(f.test.size()) <= 23 / 5 + 1);
    CHECK(f.train.size() + f.test.size() == 23);
    std::set<int> train(f.train.begin(), f.train.end());
    for (int idx : f.test) {
      CHECK(train.count(idx) == 0);
      CHECK(seen.insert(idx).second);  // disjoint across folds
    }
  }
  CHECK(seen.size() == 23);

  auto again = ppi::fold_split(c, 5, 42);
  for (size_t i = 0; i < folds.size(); ++i) {
    CHECK(folds[i].test == again[i].test);
    CHECK(folds[i].train == again[i].train);
  }
  auto other_seed = ppi::fold_split(c, 5, 43);
  bool any_diff = false;
  for (size_t i = 0; i < folds.size(); ++i)
    if (folds[i].test != other_seed[i].test) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("stratified folds balance each class") {
  Corpus c;
  for (int i = 0; i < 20; ++i)
    c.records.push_back(make_record("r" + std::to_string(i), "A" + std::to_string(i), "B",
                                    i < 10 ? Label::interaction : Label::non_interaction));
  auto folds = ppi::fold_split(c, 5, 7, true);
  for (const auto& f : folds) {
    int pos = 0;
    for (int idx : f.test)
      if (c.records[static_cast<size_t>(idx)].label == Label::interaction) ++pos;
    CHECK(pos == 2);  // 10 positives dealt evenly over 5 folds
    CHECK(f.test.size() == 4);
  }
}

TEST_CASE("fold_split rejects degenerate arguments") {
  Corpus c;
  c.records.push_back(make_record("a", "X", "Y", Label::interaction));
  c.records.push_back(make_record("b", "Z", "W", Label::interaction));
  CHECK_THROWS(ppi::fold_split(c, 1, 0));
  CHECK_THROWS(ppi::fold_split(c, 3, 0));  // more folds than records
}
