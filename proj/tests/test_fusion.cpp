#include <doctest.h>

#include <Eigen/Dense>
#include <random>
#include <utility>
#include <vector>

#include "ppi/corpus.hpp"
#include "ppi/fusion.hpp"

using ppi::FusedGraph;
using ppi::Label;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace

TEST_CASE("fuse concatenates text and structure blocks bitwise") {
  const int n = 7;
  Eigen::MatrixXd text = random_matrix(n, 5, 1);
  Eigen::MatrixXd structure = random_matrix(n, 4, 2);
  std::vector<std::pair<int, int>> edges{{0, 2}, {1, 6}, {3, 4}};
  std::vector<Label> labels(n, Label::non_interaction);
  labels[2] = Label::interaction;

  FusedGraph g = ppi::fuse(text, structure, edges, labels);
  CHECK(g.text_width == 5);
  CHECK(g.structure_width == 4);
  REQUIRE(g.features.rows() == n);
  REQUIRE(g.features.cols() == 9);

  CHECK(g.features.leftCols(5) == text);        // exact copy
  CHECK(g.features.rightCols(4) == structure);  // exact copy
  CHECK(g.edges == edges);                      // untouched
  CHECK(g.labels == labels);
}

TEST_CASE("fuse produces the reference widths for corpus-scale inputs") {
  // 1000-dim text block and 1185-dim structure block concatenate to 2185.
  Eigen::MatrixXd text = Eigen::MatrixXd::Zero(3, 1000);
  Eigen::MatrixXd structure = Eigen::MatrixXd::Zero(3, 1185);
  text(1, 999) = 2.5;
  structure(2, 0) = -1.5;
  FusedGraph g = ppi::fuse(text, structure, {}, std::vector<Label>(3, Label::interaction));
  REQUIRE(g.features.cols() == 2185);
  CHECK(g.features(1, 999) == 2.5);
  CHECK(g.features(2, 1000) == -1.5);
}

TEST_CASE("normalize_blocks scales each block to unit norm per node") {
  Eigen::MatrixXd text(2, 3);
  text << 3, 0, 4, 0, 0, 0;  // row norms 5 and 0
  Eigen::MatrixXd structure(2, 2);
  structure << 0, 2, 1, 0;

  FusedGraph g = ppi::fuse(text, structure, {}, std::vector<Label>(2, Label::non_interaction),
                           true);
  CHECK(g.features(0, 0) == doctest::Approx(0.6));
  CHECK(g.features(0, 2) == doctest::Approx(0.8));
  CHECK(g.features(0, 4) == doctest::Approx(1.0));
  // A zero block stays zero rather than dividing by zero.
  CHECK(g.features(1, 0) == 0.0);
  CHECK(g.features(1, 1) == 0.0);
  CHECK(g.features(1, 2) == 0.0);
  CHECK(g.features(1, 3) == doctest::Approx(1.0));
}

TEST_CASE("fuse validates row and label agreement") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 2);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 2);
  std::vector<Label> labels(3, Label::interaction);
  CHECK_THROWS(ppi::fuse(a, b, {}, labels));
  CHECK_THROWS(ppi::fuse(a, Eigen::MatrixXd::Zero(3, 2), {}, std::vector<Label>(2)));
  CHECK_THROWS(ppi::fuse(a, Eigen::MatrixXd::Zero(3, 2), {{0, 5}}, labels));
}
