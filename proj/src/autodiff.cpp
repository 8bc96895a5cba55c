#include "ppi/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace ppi::num {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

}  // namespace

Var Tape::push(Tensor value, std::vector<int> parents, std::function<void(Tape&, int)> back) {
  require(!back_done_, "tape: cannot record ops after backward()");
  nodes_.push_back(Node{std::move(value), std::move(parents), std::move(back), {}});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::g(int id) { return grads_[static_cast<size_t>(id)]; }

void Tape::check_var(Var v, const char* op) const {
  require(v.valid() && v.id < static_cast<int>(nodes_.size()),
          std::string(op) + ": invalid var");
}

Dtype Tape::common_dtype(const Tensor& a, const Tensor& b, const char* op) {
  require(a.dtype() == b.dtype(), std::string(op) + ": dtype mismatch (" +
                                      dtype_name(a.dtype()) + " vs " + dtype_name(b.dtype()) + ")");
  return a.dtype();
}

Var Tape::leaf(Tensor value) { return push(std::move(value), {}, nullptr); }

Var Tape::param(const std::string& name, Tensor value) {
  Var v = push(std::move(value), {}, nullptr);
  nodes_[static_cast<size_t>(v.id)].pname = name;
  return v;
}

const Tensor& Tape::value(Var v) const {
  check_var(v, "value");
  return nodes_[static_cast<size_t>(v.id)].value;
}

Var Tape::matmul(Var a, Var b) {
  check_var(a, "matmul");
  check_var(b, "matmul");
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.rank() == 2 && B.rank() == 2 && A.dim(1) == B.dim(0),
          "matmul: incompatible shapes " + A.shape_str() + " x " + B.shape_str());
  Dtype dt = common_dtype(A, B, "matmul");
  const int m = A.dim(0), k = A.dim(1), n = B.dim(1);
  Tensor C({m, n}, dt);
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      const double aip = A.at(i, p);
      if (aip == 0.0) continue;
      for (int j = 0; j < n; ++j) C.at(i, j) += aip * B.at(p, j);
    }
  C.quantize();
  return push(std::move(C), {a.id, b.id}, [a, b, m, k, n](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    const Tensor& A2 = t.value(a);
    const Tensor& B2 = t.value(b);
    Tensor& ga = t.g(a.id);
    Tensor& gb = t.g(b.id);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const double gij = gc.at(i, j);
        if (gij == 0.0) continue;
        for (int p = 0; p < k; ++p) {
          ga.at(i, p) += gij * B2.at(p, j);
          gb.at(p, j) += gij * A2.at(i, p);
        }
      }
  });
}

Var Tape::add(Var a, Var b) {
  check_var(a, "add");
  check_var(b, "add");
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "add: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
  Dtype dt = common_dtype(A, B, "add");
  Tensor C(A.shape(), dt);
  for (int64_t i = 0; i < A.size(); ++i) C.at(i) = A.at(i) + B.at(i);
  C.quantize();
  return push(std::move(C), {a.id, b.id}, [a, b](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    Tensor& ga = t.g(a.id);
    Tensor& gb = t.g(b.id);
    for (int64_t i = 0; i < gc.size(); ++i) {
      ga.at(i) += gc.at(i);
      gb.at(i) += gc.at(i);
    }
  });
}

Var Tape::add_bias(Var a, Var bias) {
  check_var(a, "add_bias");
  check_var(bias, "add_bias");
  const Tensor& A = value(a);
  const Tensor& B = value(bias);
  require(A.rank() == 2 && B.rank() == 1 && A.dim(1) == B.dim(0),
          "add_bias: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
  Dtype dt = common_dtype(A, B, "add_bias");
  const int m = A.dim(0), n = A.dim(1);
  Tensor C({m, n}, dt);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) C.at(i, j) = A.at(i, j) + B.at(j);
  C.quantize();
  return push(std::move(C), {a.id, bias.id}, [a, bias, m, n](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    Tensor& ga = t.g(a.id);
    Tensor& gb = t.g(bias.id);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        ga.at(i, j) += gc.at(i, j);
        gb.at(j) += gc.at(i, j);
      }
  });
}

Var Tape::mul(Var a, Var b) {
  check_var(a, "mul");
  check_var(b, "mul");
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "mul: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
  Dtype dt = common_dtype(A, B, "mul");
  Tensor C(A.shape(), dt);
  for (int64_t i = 0; i < A.size(); ++i) C.at(i) = A.at(i) * B.at(i);
  C.quantize();
  return push(std::move(C), {a.id, b.id}, [a, b](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    const Tensor& A2 = t.value(a);
    const Tensor& B2 = t.value(b);
    Tensor& ga = t.g(a.id);
    Tensor& gb = t.g(b.id);
    for (int64_t i = 0; i < gc.size(); ++i) {
      ga.at(i) += gc.at(i) * B2.at(i);
      gb.at(i) += gc.at(i) * A2.at(i);
    }
  });
}

Var Tape::scale(Var a, double c) {
  check_var(a, "scale");
  const Tensor& A = value(a);
  Tensor C(A.shape(), A.dtype());
  for (int64_t i = 0; i < A.size(); ++i) C.at(i) = A.at(i) * c;
  C.quantize();
  return push(std::move(C), {a.id}, [a, c](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    Tensor& ga = t.g(a.id);
    for (int64_t i = 0; i < gc.size(); ++i) ga.at(i) += gc.at(i) * c;
  });
}

Var Tape::relu(Var a) {
  check_var(a, "relu");
  const Tensor& A = value(a);
  Tensor C(A.shape(), A.dtype());
  for (int64_t i = 0; i < A.size(); ++i) C.at(i) = A.at(i) > 0.0 ? A.at(i) : 0.0;
  return push(std::move(C), {a.id}, [a](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    const Tensor& A2 = t.value(a);
    Tensor& ga = t.g(a.id);
    for (int64_t i = 0; i < gc.size(); ++i)
      if (A2.at(i) > 0.0) ga.at(i) += gc.at(i);
  });
}

Var Tape::gelu(Var a) {
  check_var(a, "gelu");
  const Tensor& A = value(a);
  Tensor C(A.shape(), A.dtype());
  for (int64_t i = 0; i < A.size(); ++i) {
    const double x = A.at(i);
    C.at(i) = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  }
  C.quantize();
  return push(std::move(C), {a.id}, [a](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    const Tensor& A2 = t.value(a);
    Tensor& ga = t.g(a.id);
    for (int64_t i = 0; i < gc.size(); ++i) {
      const double x = A2.at(i);
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      ga.at(i) += gc.at(i) * (cdf + x * pdf);
    }
  });
}

Var Tape::softmax_rows(Var a) {
  check_var(a, "softmax");
  const Tensor& A = value(a);
  require(A.rank() == 1 || A.rank() == 2, "softmax: rank must be 1 or 2, got " + A.shape_str());
  const int m = A.rank() == 2 ? A.dim(0) : 1;
  const int n = A.rank() == 2 ? A.dim(1) : A.dim(0);
  require(n > 0, "softmax: empty row");
  Tensor C(A.shape(), A.dtype());
  for (int i = 0; i < m; ++i) {
    const double* row = A.data() + static_cast<int64_t>(i) * n;
    double* out = C.data() + static_cast<int64_t>(i) * n;
    double mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      out[j] = std::exp(row[j] - mx);
      s += out[j];
    }
    for (int j = 0; j < n; ++j) out[j] /= s;
  }
  C.quantize();
  return push(std::move(C), {a.id}, [a, m, n](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    const Tensor& Y = t.node(self).value;
    Tensor& ga = t.g(a.id);
    for (int i = 0; i < m; ++i) {
      const double* y = Y.data() + static_cast<int64_t>(i) * n;
      const double* gy = gc.data() + static_cast<int64_t>(i) * n;
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += gy[j] * y[j];
      double* gx = ga.data() + static_cast<int64_t>(i) * n;
      for (int j = 0; j < n; ++j) gx[j] += y[j] * (gy[j] - dot);
    }
  });
}

Var Tape::transpose(Var a) {
  check_var(a, "transpose");
  const Tensor& A = value(a);
  require(A.rank() == 2, "transpose: rank must be 2, got " + A.shape_str());
  const int m = A.dim(0), n = A.dim(1);
  Tensor C({n, m}, A.dtype());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) C.at(j, i) = A.at(i, j);
  return push(std::move(C), {a.id}, [a, m, n](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    Tensor& ga = t.g(a.id);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) ga.at(i, j) += gc.at(j, i);
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  int n = -1, total = 0;
  Dtype dt = Dtype::f64;
  for (size_t p = 0; p < parts.size(); ++p) {
    check_var(parts[p], "concat_rows");
    const Tensor& T = value(parts[p]);
    require(T.rank() == 2, "concat_rows: rank must be 2, got " + T.shape_str());
    if (n < 0) {
      n = T.dim(1);
      dt = T.dtype();
    }
    require(T.dim(1) == n, "concat_rows: column mismatch " + T.shape_str() + " vs [*, " +
                               std::to_string(n) + "]");
    require(T.dtype() == dt, "concat_rows: dtype mismatch");
    total += T.dim(0);
  }
  Tensor C({total, n}, dt);
  std::vector<int> ids;
  std::vector<int> offsets;
  int r = 0;
  for (Var p : parts) {
    const Tensor& T = value(p);
    for (int i = 0; i < T.dim(0); ++i)
      for (int j = 0; j < n; ++j) C.at(r + i, j) = T.at(i, j);
    ids.push_back(p.id);
    offsets.push_back(r);
    r += T.dim(0);
  }
  return push(std::move(C), ids, [ids, offsets, n](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    for (size_t p = 0; p < ids.size(); ++p) {
      Tensor& gp = t.g(ids[p]);
      for (int i = 0; i < gp.dim(0); ++i)
        for (int j = 0; j < n; ++j) gp.at(i, j) += gc.at(offsets[p] + i, j);
    }
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  int m = -1, total = 0;
  Dtype dt = Dtype::f64;
  for (size_t p = 0; p < parts.size(); ++p) {
    check_var(parts[p], "concat_cols");
    const Tensor& T = value(parts[p]);
    require(T.rank() == 2, "concat_cols: rank must be 2, got " + T.shape_str());
    if (m < 0) {
      m = T.dim(0);
      dt = T.dtype();
    }
    require(T.dim(0) == m, "concat_cols: row mismatch " + T.shape_str() + " vs [" +
                               std::to_string(m) + ", *]");
    require(T.dtype() == dt, "concat_cols: dtype mismatch");
    total += T.dim(1);
  }
  Tensor C({m, total}, dt);
  std::vector<int> ids;
  std::vector<int> offsets;
  int c = 0;
  for (Var p : parts) {
    const Tensor& T = value(p);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < T.dim(1); ++j) C.at(i, c + j) = T.at(i, j);
    ids.push_back(p.id);
    offsets.push_back(c);
    c += T.dim(1);
  }
  return push(std::move(C), ids, [ids, offsets, m](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    for (size_t p = 0; p < ids.size(); ++p) {
      Tensor& gp = t.g(ids[p]);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < gp.dim(1); ++j) gp.at(i, j) += gc.at(i, offsets[p] + j);
    }
  });
}

Var Tape::slice_rows(Var a, int r0, int r1) {
  check_var(a, "slice_rows");
  const Tensor& A = value(a);
  require(A.rank() == 2, "slice_rows: rank must be 2, got " + A.shape_str());
  require(0 <= r0 && r0 <= r1 && r1 <= A.dim(0),
          "slice_rows: bad range [" + std::to_string(r0) + ", " + std::to_string(r1) +
              ") for " + A.shape_str());
  const int n = A.dim(1);
  Tensor C({r1 - r0, n}, A.dtype());
  for (int i = r0; i < r1; ++i)
    for (int j = 0; j < n; ++j) C.at(i - r0, j) = A.at(i, j);
  return push(std::move(C), {a.id}, [a, r0, r1, n](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    Tensor& ga = t.g(a.id);
    for (int i = r0; i < r1; ++i)
      for (int j = 0; j < n; ++j) ga.at(i, j) += gc.at(i - r0, j);
  });
}

Var Tape::slice_cols(Var a, int c0, int c1) {
  check_var(a, "slice_cols");
  const Tensor& A = value(a);
  require(A.rank() == 2, "slice_cols: rank must be 2, got " + A.shape_str());
  require(0 <= c0 && c0 <= c1 && c1 <= A.dim(1),
          "slice_cols: bad range [" + std::to_string(c0) + ", " + std::to_string(c1) +
              ") for " + A.shape_str());
  const int m = A.dim(0);
  Tensor C({m, c1 - c0}, A.dtype());
  for (int i = 0; i < m; ++i)
    for (int j = c0; j < c1; ++j) C.at(i, j - c0) = A.at(i, j);
  return push(std::move(C), {a.id}, [a, c0, c1, m](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    Tensor& ga = t.g(a.id);
    for (int i = 0; i < m; ++i)
      for (int j = c0; j < c1; ++j) ga.at(i, j) += gc.at(i, j - c0);
  });
}

Var Tape::rows(Var table, const std::vector<int>& idx) {
  check_var(table, "rows");
  const Tensor& T = value(table);
  require(T.rank() == 2, "rows: table rank must be 2, got " + T.shape_str());
  const int r = T.dim(0), n = T.dim(1);
  for (int i : idx)
    require(0 <= i && i < r,
            "rows: index " + std::to_string(i) + " out of range for " + T.shape_str());
  Tensor C({static_cast<int>(idx.size()), n}, T.dtype());
  for (size_t i = 0; i < idx.size(); ++i)
    for (int j = 0; j < n; ++j) C.at(static_cast<int>(i), j) = T.at(idx[i], j);
  return push(std::move(C), {table.id}, [table, idx, n](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    Tensor& gt = t.g(table.id);
    for (size_t i = 0; i < idx.size(); ++i)
      for (int j = 0; j < n; ++j) gt.at(idx[i], j) += gc.at(static_cast<int>(i), j);
  });
}

Var Tape::max_pool_rows(Var a, int valid_rows) {
  check_var(a, "max_pool_rows");
  const Tensor& A = value(a);
  require(A.rank() == 2, "max_pool_rows: rank must be 2, got " + A.shape_str());
  require(0 <= valid_rows && valid_rows <= A.dim(0),
          "max_pool_rows: valid_rows " + std::to_string(valid_rows) + " out of range for " +
              A.shape_str());
  const int n = A.dim(1);
  Tensor C({1, n}, A.dtype());
  std::vector<int> arg(static_cast<size_t>(n), -1);
  if (valid_rows > 0) {
    for (int j = 0; j < n; ++j) {
      double best = A.at(0, j);
      int bi = 0;
      for (int i = 1; i < valid_rows; ++i)
        if (A.at(i, j) > best) {
          best = A.at(i, j);
          bi = i;
        }
      C.at(0, j) = best;
      arg[static_cast<size_t>(j)] = bi;
    }
  }
  return push(std::move(C), {a.id}, [a, arg, n](Tape& t, int self) {
    const Tensor& gc = t.g(self);
    Tensor& ga = t.g(a.id);
    for (int j = 0; j < n; ++j)
      if (arg[static_cast<size_t>(j)] >= 0) ga.at(arg[static_cast<size_t>(j)], j) += gc.at(0, j);
  });
}

Var Tape::conv1d(Var input, Var kernel, Var bias) {
  check_var(input, "conv1d");
  check_var(kernel, "conv1d");
  check_var(bias, "conv1d");
  const Tensor& X = value(input);
  const Tensor& K = value(kernel);
  const Tensor& B = value(bias);
  require(X.rank() == 2 && K.rank() == 3 && B.rank() == 1,
          "conv1d: expected input [L,Cin], kernel [w,Cin,Cout], bias [Cout]; got " +
              X.shape_str() + ", " + K.shape_str() + ", " + B.shape_str());
  const int L = X.dim(0), cin = X.dim(1), w = K.dim(0), cout = K.dim(2);
  require(K.dim(1) == cin, "conv1d: channel mismatch " + X.shape_str() + " vs " + K.shape_str());
  require(B.dim(0) == cout, "conv1d: bias mismatch " + B.shape_str() + " vs " + K.shape_str());
  require(L >= w, "conv1d: input length " + std::to_string(L) + " shorter than window " +
                      std::to_string(w));
  common_dtype(X, K, "conv1d");
  Dtype dt = common_dtype(K, B, "conv1d");
  const int lout = L - w + 1;
  Tensor C({lout, cout}, dt);
  for (int t0 = 0; t0 < lout; ++t0)
    for (int o = 0; o < cout; ++o) {
      double acc = B.at(o);
      for (int d = 0; d < w; ++d)
        for (int c = 0; c < cin; ++c) acc += X.at(t0 + d, c) * K.at(d, c, o);
      C.at(t0, o) = acc;
    }
  C.quantize();
  return push(std::move(C), {input.id, kernel.id, bias.id},
              [input, kernel, bias, lout, cout, w, cin](Tape& t, int self) {
                const Tensor& gc = t.g(self);
                const Tensor& X2 = t.value(input);
                const Tensor& K2 = t.value(kernel);
                Tensor& gx = t.g(input.id);
                Tensor& gk = t.g(kernel.id);
                Tensor& gb = t.g(bias.id);
                for (int t0 = 0; t0 < lout; ++t0)
                  for (int o = 0; o < cout; ++o) {
                    const double go = gc.at(t0, o);
                    if (go == 0.0) continue;
                    gb.at(o) += go;
                    for (int d = 0; d < w; ++d)
                      for (int c = 0; c < cin; ++c) {
                        gx.at(t0 + d, c) += go * K2.at(d, c, o);
                        gk.at(d, c, o) += go * X2.at(t0 + d, c);
                      }
                  }
              });
}

Var Tape::layer_norm(Var a, Var gain, Var bias, double eps) {
  check_var(a, "layer_norm");
  check_var(gain, "layer_norm");
  check_var(bias, "layer_norm");
  const Tensor& A = value(a);
  const Tensor& G = value(gain);
  const Tensor& B = value(bias);
  require(A.rank() == 2 && G.rank() == 1 && B.rank() == 1 && G.dim(0) == A.dim(1) &&
              B.dim(0) == A.dim(1),
          "layer_norm: shape mismatch " + A.shape_str() + ", " + G.shape_str() + ", " +
              B.shape_str());
  const int m = A.dim(0), n = A.dim(1);
  Tensor C({m, n}, A.dtype());
  // Saved normalized rows and inverse std for the backward pass.
  std::vector<double> xhat(static_cast<size_t>(m) * n);
  std::vector<double> inv_std(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += A.at(i, j);
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = A.at(i, j) - mu;
      var += d * d;
    }
    var /= n;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(i)] = is;
    for (int j = 0; j < n; ++j) {
      const double xh = (A.at(i, j) - mu) * is;
      xhat[static_cast<size_t>(i) * n + j] = xh;
      C.at(i, j) = G.at(j) * xh + B.at(j);
    }
  }
  C.quantize();
  return push(std::move(C), {a.id, gain.id, bias.id},
              [a, gain, bias, m, n, xhat = std::move(xhat),
               inv_std = std::move(inv_std)](Tape& t, int self) {
                const Tensor& gc = t.g(self);
                const Tensor& G2 = t.value(gain);
                Tensor& ga = t.g(a.id);
                Tensor& gg = t.g(gain.id);
                Tensor& gb = t.g(bias.id);
                for (int i = 0; i < m; ++i) {
                  const double* xh = xhat.data() + static_cast<size_t>(i) * n;
                  double mean_dxh = 0.0, mean_dxh_xh = 0.0;
                  for (int j = 0; j < n; ++j) {
                    const double dxh = gc.at(i, j) * G2.at(j);
                    mean_dxh += dxh;
                    mean_dxh_xh += dxh * xh[j];
                  }
                  mean_dxh /= n;
                  mean_dxh_xh /= n;
                  const double is = inv_std[static_cast<size_t>(i)];
                  for (int j = 0; j < n; ++j) {
                    const double dxh = gc.at(i, j) * G2.at(j);
                    ga.at(i, j) += is * (dxh - mean_dxh - xh[j] * mean_dxh_xh);
                    gg.at(j) += gc.at(i, j) * xh[j];
                    gb.at(j) += gc.at(i, j);
                  }
                }
              });
}

Var Tape::sum(Var a) {
  check_var(a, "sum");
  const Tensor& A = value(a);
  double s = 0.0;
  for (int64_t i = 0; i < A.size(); ++i) s += A.at(i);
  Tensor C = Tensor::from({1}, {s}, A.dtype());
  return push(std::move(C), {a.id}, [a](Tape& t, int self) {
    const double go = t.g(self).at(0);
    Tensor& ga = t.g(a.id);
    for (int64_t i = 0; i < ga.size(); ++i) ga.at(i) += go;
  });
}

Var Tape::mean_all(Var a) {
  check_var(a, "mean_all");
  const Tensor& A = value(a);
  require(A.size() > 0, "mean_all: empty tensor");
  double s = 0.0;
  for (int64_t i = 0; i < A.size(); ++i) s += A.at(i);
  const double inv = 1.0 / static_cast<double>(A.size());
  Tensor C = Tensor::from({1}, {s * inv}, A.dtype());
  return push(std::move(C), {a.id}, [a, inv](Tape& t, int self) {
    const double go = t.g(self).at(0) * inv;
    Tensor& ga = t.g(a.id);
    for (int64_t i = 0; i < ga.size(); ++i) ga.at(i) += go;
  });
}

Var Tape::cross_entropy(Var logits, const std::vector<int>& labels,
                        const std::vector<double>& class_weights) {
  check_var(logits, "cross_entropy");
  const Tensor& Z = value(logits);
  require(Z.rank() == 2, "cross_entropy: logits rank must be 2, got " + Z.shape_str());
  const int m = Z.dim(0), k = Z.dim(1);
  require(static_cast<int>(labels.size()) == m,
          "cross_entropy: " + std::to_string(labels.size()) + " labels for " + Z.shape_str());
  require(class_weights.empty() || static_cast<int>(class_weights.size()) == k,
          "cross_entropy: class_weights size mismatch");
  for (int y : labels)
    require(0 <= y && y < k, "cross_entropy: label " + std::to_string(y) + " out of range");

  std::vector<double> probs(static_cast<size_t>(m) * k);
  std::vector<double> wrow(static_cast<size_t>(m), 1.0);
  double wsum = 0.0, loss = 0.0;
  for (int i = 0; i < m; ++i) {
    const double* z = Z.data() + static_cast<int64_t>(i) * k;
    double mx = z[0];
    for (int j = 1; j < k; ++j) mx = std::max(mx, z[j]);
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += std::exp(z[j] - mx);
    const double lse = mx + std::log(s);
    for (int j = 0; j < k; ++j) probs[static_cast<size_t>(i) * k + j] = std::exp(z[j] - lse);
    const double w = class_weights.empty() ? 1.0 : class_weights[static_cast<size_t>(labels[i])];
    wrow[static_cast<size_t>(i)] = w;
    wsum += w;
    loss += w * (lse - z[labels[static_cast<size_t>(i)]]);
  }
  require(wsum > 0.0, "cross_entropy: zero total weight");
  Tensor C = Tensor::from({1}, {loss / wsum}, Z.dtype());
  return push(std::move(C), {logits.id},
              [logits, labels, probs = std::move(probs), wrow = std::move(wrow), wsum, m,
               k](Tape& t, int self) {
                const double go = t.g(self).at(0) / wsum;
                Tensor& gz = t.g(logits.id);
                for (int i = 0; i < m; ++i) {
                  const double w = wrow[static_cast<size_t>(i)] * go;
                  for (int j = 0; j < k; ++j) {
                    double d = probs[static_cast<size_t>(i) * k + j];
                    if (j == labels[static_cast<size_t>(i)]) d -= 1.0;
                    gz.at(i, j) += w * d;
                  }
                }
              });
}

void Tape::backward(Var loss) {
  check_var(loss, "backward");
  require(!back_done_, "backward: already run on this tape");
  const Tensor& L = value(loss);
  require(L.size() == 1, "backward: loss must be a scalar, got " + L.shape_str());
  back_done_ = true;

  grads_.clear();
  grads_.reserve(nodes_.size());
  for (const Node& nd : nodes_) grads_.emplace_back(nd.value.shape(), Dtype::f64);

  std::vector<char> reached(nodes_.size(), 0);
  reached[static_cast<size_t>(loss.id)] = 1;
  grads_[static_cast<size_t>(loss.id)].at(0) = 1.0;

  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    if (!reached[static_cast<size_t>(i)]) continue;
    Node& nd = nodes_[static_cast<size_t>(i)];
    for (int p : nd.parents) reached[static_cast<size_t>(p)] = 1;
    if (nd.back) nd.back(*this, i);
  }
}

Tensor Tape::grad(Var v) const {
  check_var(v, "grad");
  require(back_done_, "grad: backward() has not run");
  return grads_[static_cast<size_t>(v.id)];
}

std::map<std::string, Tensor> Tape::param_grads() const {
  require(back_done_, "param_grads: backward() has not run");
  std::map<std::string, Tensor> out;
  for (size_t i = 0; i < nodes_.size(); ++i)
    if (!nodes_[i].pname.empty()) out.emplace(nodes_[i].pname, grads_[i]);
  return out;
}

}  // namespace ppi::num
