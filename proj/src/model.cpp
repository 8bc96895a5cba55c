#include "ppi/model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "ppi/matrix_io.hpp"

namespace ppi {

using num::Dtype;
using num::Tape;
using num::Tensor;
using num::Var;
using nlohmann::json;

void ModelDims::validate() const {
  std::vector<std::string> bad;
  if (fused_dim < 1) bad.push_back("fused_dim must be >= 1");
  if (hidden < 1) bad.push_back("hidden must be >= 1");
  if (heads < 1) bad.push_back("heads must be >= 1");
  if (heads >= 1 && hidden >= 1 && hidden % heads != 0)
    bad.push_back("hidden must be divisible by heads");
  if (layers < 0) bad.push_back("layers must be >= 0");
  if (role_vocab < 1) bad.push_back("role_vocab must be >= 1");
  if (subgraph_size < 1) bad.push_back("subgraph_size must be >= 1");
  if (distance_cap < 0) bad.push_back("distance_cap must be >= 0");
  if (d_p < 1) bad.push_back("d_p must be >= 1");
  if (d_s < 2 || d_s % 2 != 0) bad.push_back("d_s must be even and >= 2");
  if (classes != 2) bad.push_back("classes must be 2");
  if (bad.empty()) return;
  std::string msg = "model dims invalid:";
  for (const auto& b : bad) msg += " " + b + ";";
  throw std::invalid_argument(msg);
}

namespace {

enum class ParamKind { weight, bias, gain };

struct ParamSpec {
  std::vector<int> shape;
  ParamKind kind;
};

std::map<std::string, ParamSpec> param_specs(const ModelDims& d) {
  std::map<std::string, ParamSpec> specs;
  const int c = d.d_s / 2;
  specs["cnn.w3"] = {{3, d.d_p, c}, ParamKind::weight};
  specs["cnn.b3"] = {{c}, ParamKind::bias};
  specs["cnn.w4"] = {{4, d.d_p, c}, ParamKind::weight};
  specs["cnn.b4"] = {{c}, ParamKind::bias};
  specs["proj.w"] = {{d.fused_dim, d.hidden}, ParamKind::weight};
  specs["proj.b"] = {{d.hidden}, ParamKind::bias};
  specs["emb.role"] = {{d.role_vocab, d.hidden}, ParamKind::weight};
  specs["emb.pos"] = {{d.subgraph_size, d.hidden}, ParamKind::weight};
  specs["emb.dist"] = {{d.distance_cap + 1, d.hidden}, ParamKind::weight};
  for (int l = 0; l < d.layers; ++l) {
    const std::string p = "L" + std::to_string(l) + ".";
    specs[p + "ln1.g"] = {{d.hidden}, ParamKind::gain};
    specs[p + "ln1.b"] = {{d.hidden}, ParamKind::bias};
    for (const char* w : {"wq", "wk", "wv", "wo"})
      specs[p + "attn." + w] = {{d.hidden, d.hidden}, ParamKind::weight};
    for (const char* b : {"bq", "bk", "bv", "bo"})
      specs[p + "attn." + b] = {{d.hidden}, ParamKind::bias};
    specs[p + "ln2.g"] = {{d.hidden}, ParamKind::gain};
    specs[p + "ln2.b"] = {{d.hidden}, ParamKind::bias};
    specs[p + "ffn.w1"] = {{d.hidden, 4 * d.hidden}, ParamKind::weight};
    specs[p + "ffn.b1"] = {{4 * d.hidden}, ParamKind::bias};
    specs[p + "ffn.w2"] = {{4 * d.hidden, d.hidden}, ParamKind::weight};
    specs[p + "ffn.b2"] = {{d.hidden}, ParamKind::bias};
  }
  specs["head.w"] = {{d.hidden, d.classes}, ParamKind::weight};
  specs["head.b"] = {{d.classes}, ParamKind::bias};
  return specs;
}

double xavier_limit(const std::vector<int>& shape) {
  // Rank 2: [fan_in, fan_out]. Rank 3 conv kernels [w, cin, cout]: fans are
  // w*cin and w*cout.
  double fan_in, fan_out;
  if (shape.size() == 2) {
    fan_in = shape[0];
    fan_out = shape[1];
  } else {
    fan_in = static_cast<double>(shape[0]) * shape[1];
    fan_out = static_cast<double>(shape[0]) * shape[2];
  }
  return std::sqrt(6.0 / (fan_in + fan_out));
}

Var dropout(Tape& tape, Var x, double rate, std::mt19937_64* rng) {
  if (rng == nullptr || rate <= 0.0) return x;
  if (rate >= 1.0) throw std::invalid_argument("dropout: rate must be < 1");
  const Tensor& v = tape.value(x);
  Tensor mask(v.shape(), v.dtype());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep = 1.0 / (1.0 - rate);
  for (int64_t i = 0; i < mask.size(); ++i) mask.at(i) = u(*rng) < rate ? 0.0 : keep;
  mask.quantize();
  return tape.mul(x, tape.leaf(std::move(mask)));
}

void put_u8(std::ostream& out, uint8_t v) { out.put(static_cast<char>(v)); }

uint8_t get_u8(std::istream& in) {
  char c = 0;
  if (!in.get(c)) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<uint8_t>(c);
}

json dims_to_json(const ModelDims& d) {
  return json{{"fused_dim", d.fused_dim},   {"hidden", d.hidden},
              {"heads", d.heads},           {"layers", d.layers},
              {"role_vocab", d.role_vocab}, {"subgraph_size", d.subgraph_size},
              {"distance_cap", d.distance_cap}, {"d_p", d.d_p},
              {"d_s", d.d_s},               {"classes", d.classes}};
}

ModelDims dims_from_json(const json& j) {
  ModelDims d;
  d.fused_dim = j.at("fused_dim").get<int>();
  d.hidden = j.at("hidden").get<int>();
  d.heads = j.at("heads").get<int>();
  d.layers = j.at("layers").get<int>();
  d.role_vocab = j.at("role_vocab").get<int>();
  d.subgraph_size = j.at("subgraph_size").get<int>();
  d.distance_cap = j.at("distance_cap").get<int>();
  d.d_p = j.at("d_p").get<int>();
  d.d_s = j.at("d_s").get<int>();
  d.classes = j.at("classes").get<int>();
  return d;
}

}  // namespace

ParamMap init_params(const ModelDims& dims, uint64_t seed, Dtype dtype) {
  dims.validate();
  std::mt19937_64 rng(seed);
  ParamMap params;
  for (const auto& [name, spec] : param_specs(dims)) {
    Tensor t(spec.shape, dtype);
    switch (spec.kind) {
      case ParamKind::weight: {
        std::uniform_real_distribution<double> u(-xavier_limit(spec.shape),
                                                 xavier_limit(spec.shape));
        for (int64_t i = 0; i < t.size(); ++i) t.at(i) = u(rng);
        t.quantize();
        break;
      }
      case ParamKind::bias:
        break;  // zeros
      case ParamKind::gain:
        t.fill(1.0);
        break;
    }
    params.emplace(name, std::move(t));
  }
  return params;
}

Var BoundModel::at(const std::string& name) const {
  auto it = p.find(name);
  if (it == p.end()) throw std::runtime_error("model: no parameter named " + name);
  return it->second;
}

CnnVars BoundModel::cnn() const {
  return CnnVars{at("cnn.w3"), at("cnn.b3"), at("cnn.w4"), at("cnn.b4")};
}

BoundModel bind_params(Tape& tape, const ModelDims& dims, const ParamMap& params) {
  dims.validate();
  BoundModel m;
  m.dims = dims;
  for (const auto& [name, spec] : param_specs(dims)) {
    auto it = params.find(name);
    if (it == params.end())
      throw std::runtime_error("model: parameter map is missing " + name);
    if (it->second.shape() != spec.shape)
      throw std::runtime_error("model: parameter " + name + " has shape " +
                               it->second.shape_str() + ", expected " +
                               Tensor(spec.shape).shape_str());
    m.p.emplace(name, tape.param(name, it->second));
  }
  return m;
}

Var embed_batch(Tape& tape, const BoundModel& m, Var fused_rows,
                const SubgraphBatch& batch) {
  const ModelDims& d = m.dims;
  const Tensor& x = tape.value(fused_rows);
  if (x.rank() != 2 || x.dim(0) != d.subgraph_size || x.dim(1) != d.fused_dim)
    throw std::invalid_argument("embed_batch: fused rows are " + x.shape_str() +
                                ", expected [" + std::to_string(d.subgraph_size) + ", " +
                                std::to_string(d.fused_dim) + "]");
  if (static_cast<int>(batch.roles.size()) != d.subgraph_size ||
      static_cast<int>(batch.dists.size()) != d.subgraph_size)
    throw std::invalid_argument("embed_batch: batch role/distance lists mismatch subgraph size");
  for (int r : batch.roles)
    if (r < 0 || r >= d.role_vocab)
      throw std::out_of_range("embed_batch: role id " + std::to_string(r) + " out of range");
  for (int h : batch.dists)
    if (h < 0 || h > d.distance_cap)
      throw std::out_of_range("embed_batch: distance " + std::to_string(h) + " out of range");

  Var ex = tape.add_bias(tape.matmul(fused_rows, m.at("proj.w")), m.at("proj.b"));
  Var er = tape.rows(m.at("emb.role"), batch.roles);
  std::vector<int> slots(static_cast<size_t>(d.subgraph_size));
  std::iota(slots.begin(), slots.end(), 0);
  Var ep = tape.rows(m.at("emb.pos"), slots);
  Var ed = tape.rows(m.at("emb.dist"), batch.dists);
  return tape.add(tape.add(ex, er), tape.add(ep, ed));
}

Var encode_target(Tape& tape, const BoundModel& m, Var h0, const Dropout& drop) {
  const ModelDims& d = m.dims;
  const int dh = d.hidden / d.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  Var h = h0;
  Var acc = h0;  // running sum of H^(0) .. H^(m)
  for (int l = 0; l < d.layers; ++l) {
    const std::string p = "L" + std::to_string(l) + ".";
    Var a = tape.layer_norm(h, m.at(p + "ln1.g"), m.at(p + "ln1.b"));
    Var q = tape.add_bias(tape.matmul(a, m.at(p + "attn.wq")), m.at(p + "attn.bq"));
    Var k = tape.add_bias(tape.matmul(a, m.at(p + "attn.wk")), m.at(p + "attn.bk"));
    Var v = tape.add_bias(tape.matmul(a, m.at(p + "attn.wv")), m.at(p + "attn.bv"));
    std::vector<Var> ctx;
    ctx.reserve(static_cast<size_t>(d.heads));
    for (int head = 0; head < d.heads; ++head) {
      const int c0 = head * dh, c1 = c0 + dh;
      Var qh = tape.slice_cols(q, c0, c1);
      Var kh = tape.slice_cols(k, c0, c1);
      Var vh = tape.slice_cols(v, c0, c1);
      Var probs = tape.softmax_rows(tape.scale(tape.matmul(qh, tape.transpose(kh)), inv_sqrt));
      probs = dropout(tape, probs, drop.attention, drop.rng);
      ctx.push_back(tape.matmul(probs, vh));
    }
    Var attn = tape.add_bias(tape.matmul(tape.concat_cols(ctx), m.at(p + "attn.wo")),
                             m.at(p + "attn.bo"));
    attn = dropout(tape, attn, drop.hidden, drop.rng);
    h = tape.add(h, attn);

    Var b = tape.layer_norm(h, m.at(p + "ln2.g"), m.at(p + "ln2.b"));
    Var f = tape.gelu(tape.add_bias(tape.matmul(b, m.at(p + "ffn.w1")), m.at(p + "ffn.b1")));
    f = tape.add_bias(tape.matmul(f, m.at(p + "ffn.w2")), m.at(p + "ffn.b2"));
    f = dropout(tape, f, drop.hidden, drop.rng);
    h = tape.add(h, f);

    acc = tape.add(acc, h);
  }
  return tape.slice_rows(acc, 0, 1);
}

Var target_logits(Tape& tape, const BoundModel& m, Var z) {
  return tape.add_bias(tape.matmul(z, m.at("head.w")), m.at("head.b"));
}

Label predict_label(const Tensor& logits_row) {
  if (logits_row.size() != 2)
    throw std::invalid_argument("predict_label: expected 2 logits, got " +
                                logits_row.shape_str());
  return logits_row.at(1) > logits_row.at(0) ? Label::interaction : Label::non_interaction;
}

void save_checkpoint(const std::string& path, const ModelDims& dims,
                     const ParamMap& params, const std::string& meta_json) {
  dims.validate();
  json meta;
  try {
    meta = json::parse(meta_json);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: metadata is not valid JSON: ") + e.what());
  }
  json root{{"dims", dims_to_json(dims)}, {"meta", meta}};
  const std::string blob = root.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  out.write("PPCK", 4);
  io::put_u32(out, 1);
  io::put_u64(out, blob.size());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  io::put_u64(out, params.size());
  for (const auto& [name, t] : params) {
    io::put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u8(out, t.dtype() == Dtype::f64 ? 0 : 1);
    put_u8(out, static_cast<uint8_t>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) io::put_u64(out, static_cast<uint64_t>(t.dim(i)));
    for (int64_t i = 0; i < t.size(); ++i) io::put_f64(out, t.at(i));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "PPCK")
    throw std::runtime_error("checkpoint: " + path + " is not a PPCK file");
  const uint32_t version = io::get_u32(in);
  if (version != 1)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

  const uint64_t blob_len = io::get_u64(in);
  std::string blob(blob_len, '\0');
  in.read(blob.data(), static_cast<std::streamsize>(blob_len));
  if (!in) throw std::runtime_error("checkpoint: truncated metadata in " + path);

  Checkpoint ck;
  json root;
  try {
    root = json::parse(blob);
    ck.dims = dims_from_json(root.at("dims"));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: bad metadata block: ") + e.what());
  }
  ck.meta_json = root.value("meta", json::object()).dump();
  ck.dims.validate();

  const uint64_t count = io::get_u64(in);
  for (uint64_t i = 0; i < count; ++i) {
    const uint64_t name_len = io::get_u64(in);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    const uint8_t dtype_byte = get_u8(in);
    if (dtype_byte > 1)
      throw std::runtime_error("checkpoint: unknown dtype for tensor " + name);
    const int rank = get_u8(in);
    if (rank < 1 || rank > 3)
      throw std::runtime_error("checkpoint: bad rank for tensor " + name);
    std::vector<int> shape(static_cast<size_t>(rank));
    for (int r = 0; r < rank; ++r) {
      const uint64_t dim = io::get_u64(in);
      if (dim > (1u << 30)) throw std::runtime_error("checkpoint: oversized tensor " + name);
      shape[static_cast<size_t>(r)] = static_cast<int>(dim);
    }
    std::vector<double> data(static_cast<size_t>(Tensor::count(shape)));
    for (auto& v : data) v = io::get_f64(in);
    if (!in) throw std::runtime_error("checkpoint: truncated tensor " + name);
    ck.params.emplace(name, Tensor::from(shape, std::move(data),
                                         dtype_byte == 0 ? Dtype::f64 : Dtype::f32));
  }
  return ck;
}

}  // namespace ppi
