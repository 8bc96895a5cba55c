#include "ppi/intimacy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ppi {

namespace {

// Column-normalized adjacency as dense matrix. Isolated nodes get a
// self-loop so every column sums to one and the PPR system stays stochastic.
Eigen::MatrixXd column_normalized(const Adjacency& graph) {
  const int n = graph.node_count();
  Eigen::MatrixXd abar = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const auto& nbrs = graph.neighbors(j);
    if (nbrs.empty()) {
      abar(j, j) = 1.0;
      continue;
    }
    const double w = 1.0 / static_cast<double>(nbrs.size());
    for (int i : nbrs) abar(i, j) = w;
  }
  return abar;
}

Eigen::VectorXd power_row(const Adjacency& graph, int i, double alpha) {
  const int n = graph.node_count();
  // s = alpha * e_i + (1 - alpha) * Abar^T s converges to row i of S because
  // S^T = alpha * (I - (1-alpha) * Abar^T)^-1.
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  s(i) = 1.0;
  std::vector<double> inv_deg(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    const auto& nbrs = graph.neighbors(j);
    inv_deg[static_cast<size_t>(j)] = nbrs.empty() ? 1.0 : 1.0 / static_cast<double>(nbrs.size());
  }
  Eigen::VectorXd next(n);
  for (int iter = 0; iter < 100000; ++iter) {
    next.setZero();
    // (Abar^T s)(j) = sum_u Abar(u, j) * s(u) = (1/deg(j)) * sum over j's
    // neighbors, since column j of Abar spreads 1/deg(j) to each neighbor.
    for (int j = 0; j < n; ++j) {
      const auto& nbrs = graph.neighbors(j);
      double acc;
      if (nbrs.empty()) {
        acc = s(j);
      } else {
        acc = 0.0;
        for (int u : nbrs) acc += s(u);
        acc *= inv_deg[static_cast<size_t>(j)];
      }
      next(j) = (1.0 - alpha) * acc;
    }
    next(i) += alpha;
    const double resid = (next - s).lpNorm<Eigen::Infinity>();
    s.swap(next);
    if (resid <= 1e-9) return s;
  }
  throw std::runtime_error("intimacy: power iteration failed to converge");
}

}  // namespace

Eigen::VectorXd intimacy_row(const Adjacency& graph, int i, double alpha,
                             IntimacyMethod method, int direct_max) {
  const int n = graph.node_count();
  if (i < 0 || i >= n) throw std::out_of_range("intimacy_row: node out of range");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("intimacy_row: alpha must be in (0, 1)");
  bool direct = method == IntimacyMethod::direct ||
                (method == IntimacyMethod::automatic && n <= direct_max);
  if (!direct) return power_row(graph, i, alpha);

  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - (1.0 - alpha) * column_normalized(graph);
  // Row i of S solves m^T x = alpha * e_i.
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(i) = alpha;
  return m.transpose().partialPivLu().solve(rhs);
}

IntimacyTopK compute_intimacy(const Adjacency& graph, double alpha, int k,
                              IntimacyMethod method, int direct_max) {
  if (k < 0) throw std::invalid_argument("compute_intimacy: k must be >= 0");
  const int n = graph.node_count();
  IntimacyTopK out;
  out.k = k;
  out.top.resize(static_cast<size_t>(n));

  // The direct path factors the system once and reuses it for every row.
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  bool direct = method == IntimacyMethod::direct ||
                (method == IntimacyMethod::automatic && n <= direct_max);
  if (direct) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - (1.0 - alpha) * column_normalized(graph);
    lu.compute(m.transpose());
  }

  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd row;
    if (direct) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
      rhs(i) = alpha;
      row = lu.solve(rhs);
    } else {
      row = power_row(graph, i, alpha);
    }
    std::vector<std::pair<int, double>> cand;
    for (int j = 0; j < n; ++j) {
      if (j == i || row(j) <= 0.0) continue;
      cand.emplace_back(j, row(j));
    }
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (static_cast<int>(cand.size()) > k) cand.resize(static_cast<size_t>(k));
    out.top[static_cast<size_t>(i)] = std::move(cand);
  }
  return out;
}

}  // namespace ppi
