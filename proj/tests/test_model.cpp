#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ppi/model.hpp"
#include "ppi/subgraph.hpp"

using ppi::BoundModel;
using ppi::ModelDims;
using ppi::ParamMap;
using ppi::SubgraphBatch;
using ppi::num::Dtype;
using ppi::num::Tape;
using ppi::num::Tensor;
using ppi::num::Var;

namespace {

ModelDims toy_dims() {
  ModelDims d;
  d.fused_dim = 6;
  d.hidden = 8;
  d.heads = 2;
  d.layers = 2;
  d.role_vocab = 4;
  d.subgraph_size = 3;
  d.distance_cap = 2;
  d.d_s = 4;
  return d;
}

SubgraphBatch toy_batch() {
  SubgraphBatch b;
  b.target = 0;
  b.nodes = {0, 2, 1};
  b.roles = {1, 3, 0};
  b.dists = {0, 1, 2};
  return b;
}

Tensor random_features(int rows, int cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t({rows, cols});
  for (int64_t i = 0; i < t.size(); ++i) t.at(i) = u(rng);
  return t;
}

}  // namespace

TEST_CASE("init_params emits every expected tensor with the right shape") {
  ModelDims d = toy_dims();
  ParamMap p = init_params(d, 42, Dtype::f64);

  CHECK(p.at("proj.w").shape() == std::vector<int>{6, 8});
  CHECK(p.at("proj.b").shape() == std::vector<int>{8});
  CHECK(p.at("emb.role").shape() == std::vector<int>{4, 8});
  CHECK(p.at("emb.pos").shape() == std::vector<int>{3, 8});
  CHECK(p.at("emb.dist").shape() == std::vector<int>{3, 8});
  CHECK(p.at("cnn.w3").shape() == std::vector<int>{3, 30, 2});
  CHECK(p.at("cnn.w4").shape() == std::vector<int>{4, 30, 2});
  CHECK(p.at("L0.attn.wq").shape() == std::vector<int>{8, 8});
  CHECK(p.at("L1.ffn.w1").shape() == std::vector<int>{8, 32});
  CHECK(p.at("head.w").shape() == std::vector<int>{8, 2});

  // Biases start at zero, layer-norm gains at one.
  for (int64_t i = 0; i < p.at("proj.b").size(); ++i) CHECK(p.at("proj.b").at(i) == 0.0);
  for (int64_t i = 0; i < p.at("L0.ln1.g").size(); ++i) CHECK(p.at("L0.ln1.g").at(i) == 1.0);

  // Same seed reproduces bitwise; another seed differs.
  ParamMap q = init_params(d, 42, Dtype::f64);
  CHECK(p.at("proj.w").bitwise_equal(q.at("proj.w")));
  ParamMap r = init_params(d, 43, Dtype::f64);
  CHECK(!p.at("proj.w").bitwise_equal(r.at("proj.w")));
}

TEST_CASE("model dims validation lists violations") {
  ModelDims d = toy_dims();
  d.hidden = 7;  // not divisible by heads
  d.d_s = 3;     // odd
  try {
    d.validate();
    FAIL("expected validate to throw");
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("hidden") != std::string::npos);
    CHECK(msg.find("d_s") != std::string::npos);
  }
}

TEST_CASE("bind_params rejects missing and misshapen tensors") {
  ModelDims d = toy_dims();
  ParamMap p = init_params(d, 1, Dtype::f64);
  {
    Tape tape;
    CHECK_NOTHROW(ppi::bind_params(tape, d, p));
  }
  {
    ParamMap missing = p;
    missing.erase("head.b");
    Tape tape;
    CHECK_THROWS(ppi::bind_params(tape, d, missing));
  }
  {
    ParamMap bad = p;
    bad.at("head.w") = Tensor({3, 2});
    Tape tape;
    CHECK_THROWS(ppi::bind_params(tape, d, bad));
  }
}

TEST_CASE("embed_batch sums projection and three embedding tables") {
  ModelDims d = toy_dims();
  ParamMap p = init_params(d, 5, Dtype::f64);
  Tensor x = random_features(3, 6, 9);

  Tape tape;
  BoundModel m = ppi::bind_params(tape, d, p);
  SubgraphBatch b = toy_batch();
  Var h0 = ppi::embed_batch(tape, m, tape.leaf(x), b);
  const Tensor& h = tape.value(h0);
  REQUIRE(h.dim(0) == 3);
  REQUIRE(h.dim(1) == 8);

  // Recompute slot 1 by hand: x.row(1) @ W + b + role[3] + pos[1] + dist[1].
  for (int j = 0; j < 8; ++j) {
    double ex = p.at("proj.b").at(j);
    for (int c = 0; c < 6; ++c) ex += x.at(1, c) * p.at("proj.w").at(c, j);
    ex += p.at("emb.role").at(3, j);
    ex += p.at("emb.pos").at(1, j);
    ex += p.at("emb.dist").at(1, j);
    CHECK(h.at(1, j) == doctest::Approx(ex).epsilon(1e-12));
  }

  SUBCASE("role and distance ranges are enforced") {
    SubgraphBatch bad = toy_batch();
    bad.roles[1] = 4;  // == role_vocab
    CHECK_THROWS(ppi::embed_batch(tape, m, tape.leaf(x), bad));
    bad = toy_batch();
    bad.dists[2] = 3;  // > cap
    CHECK_THROWS(ppi::embed_batch(tape, m, tape.leaf(x), bad));
  }
}

TEST_CASE("encode_target readout is the layer sum at slot zero") {
  ModelDims d = toy_dims();
  ParamMap p = init_params(d, 5, Dtype::f64);

  // Ablation: all transformer weights zeroed, layer norms neutral. Each layer
  // then adds exactly nothing, and z = (D+1) * H0 row 0.
  for (auto& [name, t] : p) {
    if (name.rfind("L", 0) == 0) {
      if (name.find("ln") != std::string::npos && name.ends_with(".g")) continue;
      t.fill(0.0);
    }
  }

  Tensor x = random_features(3, 6, 11);
  Tape tape;
  BoundModel m = ppi::bind_params(tape, d, p);
  Var h0 = ppi::embed_batch(tape, m, tape.leaf(x), toy_batch());
  Var z = ppi::encode_target(tape, m, h0);
  const Tensor& zv = tape.value(z);
  const Tensor& h0v = tape.value(h0);
  REQUIRE(zv.dim(0) == 1);
  REQUIRE(zv.dim(1) == 8);
  for (int j = 0; j < 8; ++j)
    CHECK(zv.at(0, j) == doctest::Approx(3.0 * h0v.at(0, j)).epsilon(1e-9));
}

TEST_CASE("zero layers keep only the embedding readout") {
  ModelDims d = toy_dims();
  d.layers = 0;
  ParamMap p = init_params(d, 3, Dtype::f64);
  CHECK(p.count("L0.attn.wq") == 0);

  Tensor x = random_features(3, 6, 2);
  Tape tape;
  BoundModel m = ppi::bind_params(tape, d, p);
  Var h0 = ppi::embed_batch(tape, m, tape.leaf(x), toy_batch());
  Var z = ppi::encode_target(tape, m, h0);
  const Tensor& zv = tape.value(z);
  const Tensor& h0v = tape.value(h0);
  for (int j = 0; j < 8; ++j) CHECK(zv.at(0, j) == h0v.at(0, j));
}

TEST_CASE("encoder output is equivariant to context slot permutation") {
  // Swapping the two non-target slots (and their role/distance metadata)
  // must not change the target readout: attention is a set operation over
  // the context once position embeddings follow the slots.
  ModelDims d = toy_dims();
  ParamMap p = init_params(d, 21, Dtype::f64);
  // Slots 1 and 2 carry different position embeddings, which would break the
  // symmetry; tie those two rows so only the slot assignment moves.
  for (int j = 0; j < 8; ++j) p.at("emb.pos").at(2, j) = p.at("emb.pos").at(1, j);
  Tensor x = random_features(3, 6, 22);

  auto run = [&](const SubgraphBatch& b, const std::vector<int>& row_order) {
    Tensor xp({3, 6});
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 6; ++c) xp.at(r, c) = x.at(row_order[static_cast<size_t>(r)], c);
    Tape tape;
    BoundModel m = ppi::bind_params(tape, d, p);
    Var h0 = ppi::embed_batch(tape, m, tape.leaf(xp), b);
    return tape.value(ppi::encode_target(tape, m, h0));
  };

  SubgraphBatch b = toy_batch();
  Tensor base = run(b, {0, 1, 2});

  SubgraphBatch swapped = b;
  std::swap(swapped.nodes[1], swapped.nodes[2]);
  std::swap(swapped.roles[1], swapped.roles[2]);
  std::swap(swapped.dists[1], swapped.dists[2]);
  // Feature rows travel with their nodes.
  Tensor perm = run(swapped, {0, 2, 1});
  for (int j = 0; j < 8; ++j)
    CHECK(base.at(0, j) == doctest::Approx(perm.at(0, j)).epsilon(1e-10));
}

TEST_CASE("dropout masks activations only when an rng is supplied") {
  ModelDims d = toy_dims();
  ParamMap p = init_params(d, 33, Dtype::f64);
  Tensor x = random_features(3, 6, 34);

  auto run = [&](ppi::Dropout drop) {
    Tape tape;
    BoundModel m = ppi::bind_params(tape, d, p);
    Var h0 = ppi::embed_batch(tape, m, tape.leaf(x), toy_batch());
    return tape.value(ppi::target_logits(tape, m, ppi::encode_target(tape, m, h0, drop)));
  };

  Tensor inference1 = run({});
  Tensor inference2 = run({});
  CHECK(inference1.bitwise_equal(inference2));

  std::mt19937_64 rng(7);
  ppi::Dropout drop{0.5, 0.3, &rng};
  Tensor trained = run(drop);
  CHECK(!trained.bitwise_equal(inference1));

  // Same seed, same masks.
  std::mt19937_64 rng_a(9), rng_b(9);
  Tensor a = run({0.5, 0.3, &rng_a});
  Tensor b = run({0.5, 0.3, &rng_b});
  CHECK(a.bitwise_equal(b));
}

TEST_CASE("predict_label breaks ties toward non_interaction") {
  CHECK(ppi::predict_label(Tensor::from({1, 2}, {0.2, 0.7})) == ppi::Label::interaction);
  CHECK(ppi::predict_label(Tensor::from({1, 2}, {0.7, 0.2})) == ppi::Label::non_interaction);
  CHECK(ppi::predict_label(Tensor::from({1, 2}, {0.5, 0.5})) == ppi::Label::non_interaction);
  CHECK(ppi::predict_label(Tensor::from({2}, {-1.0, 1.0})) == ppi::Label::interaction);
}

TEST_CASE("checkpoint round-trips parameters dims and metadata") {
  ModelDims d = toy_dims();
  ParamMap p = init_params(d, 77, Dtype::f32);
  const std::string path =
      (std::filesystem::temp_directory_path() / "ckpt_rt.ppck").string();

  ppi::save_checkpoint(path, d, p, R"({"fold":3})");
  ppi::Checkpoint c = ppi::load_checkpoint(path);

  CHECK(c.dims.fused_dim == d.fused_dim);
  CHECK(c.dims.hidden == d.hidden);
  CHECK(c.dims.role_vocab == d.role_vocab);
  CHECK(c.meta_json.find("\"fold\"") != std::string::npos);
  REQUIRE(c.params.size() == p.size());
  for (const auto& [name, t] : p) {
    REQUIRE(c.params.count(name) == 1);
    CHECK(c.params.at(name).dtype() == Dtype::f32);
    CHECK(c.params.at(name).bitwise_equal(t));
  }
  std::remove(path.c_str());
}

TEST_CASE("load_checkpoint rejects corrupted files") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "ckpt_bad.ppck").string();
  ModelDims d = toy_dims();
  ParamMap p = init_params(d, 1, Dtype::f64);
  ppi::save_checkpoint(path, d, p);

  // Flip the magic.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  CHECK_THROWS(ppi::load_checkpoint(path));

  // Truncate mid-payload.
  ppi::save_checkpoint(path, d, p);
  const auto full = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, full / 2);
  CHECK_THROWS(ppi::load_checkpoint(path));

  CHECK_THROWS(ppi::load_checkpoint(path + ".does_not_exist"));
  std::remove(path.c_str());
}

TEST_CASE("full model gradient flows into every parameter family") {
  ModelDims d = toy_dims();
  ParamMap p = init_params(d, 55, Dtype::f64);
  Tensor x = random_features(3, 6, 56);

  Tape tape;
  BoundModel m = ppi::bind_params(tape, d, p);
  Var h0 = ppi::embed_batch(tape, m, tape.leaf(x), toy_batch());
  Var logits = ppi::target_logits(tape, m, ppi::encode_target(tape, m, h0));
  Var loss = tape.cross_entropy(logits, {1});
  tape.backward(loss);
  auto grads = tape.param_grads();

  auto grad_norm = [&](const std::string& name) {
    double s = 0.0;
    const Tensor& g = grads.at(name);
    for (int64_t i = 0; i < g.size(); ++i) s += g.at(i) * g.at(i);
    return std::sqrt(s);
  };
  for (const char* name : {"proj.w", "emb.role", "emb.pos", "emb.dist", "L0.attn.wq",
                           "L0.ffn.w1", "L1.attn.wv", "L1.ffn.w2", "head.w", "head.b"})
    CHECK(grad_norm(name) > 0.0);
}
