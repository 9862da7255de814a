#include "dcsca/distributed.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace dcsca {
namespace distributed {

namespace {

void push_message(MessageLog* log, MessageKind kind, Index node,
                  std::size_t reals) {
  if (!log) return;
  log->push_back({kind, node, reals, message_bytes(reals)});
}

}  // namespace

std::vector<NodeShard> shard(const anomaly::Problem& p, const anomaly::State& z,
                             Index L) {
  const Index N = p.Y.rows();
  if (L < 1 || L > N) throw std::invalid_argument("shard: need 1 <= L <= N");
  if (z.P.rows() != N) throw std::invalid_argument("shard: state shape mismatch");
  std::vector<NodeShard> shards(L);
  const Index base = N / L, rem = N % L;
  Index row = 0;
  for (Index l = 0; l < L; ++l) {
    const Index rows = base + (l < rem ? 1 : 0);
    shards[l].node_id = l;
    shards[l].row_offset = row;
    shards[l].Y_l = p.Y.middleRows(row, rows);
    shards[l].D_l = p.D.middleRows(row, rows);
    shards[l].P_l = z.P.middleRows(row, rows);
    // Same construction order as the centralized solver's cached residual.
    const Matrix PQ_l = shards[l].P_l * z.Q;
    const Matrix DS_l = shards[l].D_l * z.S;
    shards[l].R_l = PQ_l + DS_l - shards[l].Y_l;
    row += rows;
  }
  return shards;
}

Matrix assemble_p(const std::vector<NodeShard>& shards) {
  Index rows = 0;
  for (const auto& s : shards) rows += s.P_l.rows();
  Matrix P(rows, shards.front().P_l.cols());
  for (const auto& s : shards) P.middleRows(s.row_offset, s.P_l.rows()) = s.P_l;
  return P;
}

BestResponses distributed_best_response(const std::vector<NodeShard>& shards,
                                        const Matrix& Q_t, const Matrix& S_t,
                                        double lambda, double mu,
                                        MessageLog* log) {
  const Index L = Index(shards.size());
  const Index rho = Q_t.rows(), K = Q_t.cols(), I = S_t.rows();

  // Q Q^T + lambda I is small and replicated; each node solves its own
  // P subproblem with it.
  Matrix lhs_p = Q_t * Q_t.transpose();
  lhs_p.diagonal().array() += lambda;

  BestResponses out;
  out.BP.resize(L);
  Matrix gram_pp = Matrix::Zero(rho, rho);
  Matrix gram_py = Matrix::Zero(rho, K);
  Vector dDtD = Vector::Zero(I);
  Matrix M = Matrix::Zero(I, K);

  // Sequential node-order reductions keep the sums deterministic.
  for (Index l = 0; l < L; ++l) {
    const NodeShard& sh = shards[size_t(l)];
    const Matrix PQ_l = sh.P_l * Q_t;
    const Matrix YmDS_l = PQ_l - sh.R_l;
    out.BP[size_t(l)] =
        solve_spd(lhs_p, Matrix(Q_t * YmDS_l.transpose())).transpose();

    // Partial products are materialized before the reduction so that each
    // node's contribution is rounded exactly like a standalone product.
    const Matrix part_pp = sh.P_l.transpose() * sh.P_l;
    const Matrix part_py = sh.P_l.transpose() * YmDS_l;
    gram_pp += part_pp;
    gram_py += part_py;
    push_message(log, MessageKind::GramPQ, l, std::size_t(rho * rho + rho * K));

    dDtD += sh.D_l.colwise().squaredNorm().transpose();
    push_message(log, MessageKind::GramD, l, std::size_t(I));

    const Matrix part_m = sh.D_l.transpose() * sh.R_l;
    M += part_m;
    push_message(log, MessageKind::ResidualSum, l, std::size_t(I * K));
  }

  for (Index i = 0; i < I; ++i)
    if (!(dDtD(i) > 0))
      throw std::invalid_argument("distributed_best_response: D has a zero column");

  gram_pp.diagonal().array() += lambda;
  out.BQ = solve_spd(gram_pp, gram_py);

  Matrix target = dDtD.asDiagonal() * S_t - M;
  soft_threshold_inplace(target, mu);
  for (Index i = 0; i < I; ++i) target.row(i) *= 1.0 / dDtD(i);
  out.BS = std::move(target);
  out.dDtD = std::move(dDtD);
  return out;
}

DistributedCoeffs distributed_coeffs(const std::vector<NodeShard>& shards,
                                     const BestResponses& br, const Matrix& Q_t,
                                     const Matrix& S_t, double lambda, double mu,
                                     MessageLog* log) {
  const Index L = Index(shards.size());
  const double Ld = double(L);
  const Matrix dQ = br.BQ - Q_t;
  const Matrix dS = br.BS - S_t;
  const double dq_sq = dQ.squaredNorm();
  const double q_dq = Q_t.cwiseProduct(dQ).sum();
  const double ds_l1 =
      br.BS.template lpNorm<1>() - S_t.template lpNorm<1>();

  DistributedCoeffs out;
  out.per_node.resize(size_t(L));
  out.W.resize(size_t(L));
  out.U.resize(size_t(L));
  out.total = {};
  for (Index l = 0; l < L; ++l) {
    const NodeShard& sh = shards[size_t(l)];
    const Matrix dP = br.BP[size_t(l)] - sh.P_l;
    Matrix U = dP * dQ;
    Matrix W = sh.P_l * dQ;
    W.noalias() += dP * Q_t;
    W.noalias() += sh.D_l * dS;
    const Matrix& R = sh.R_l;

    std::array<double, 4>& v = out.per_node[size_t(l)];
    v[0] = 2.0 * U.squaredNorm();
    v[1] = 3.0 * U.cwiseProduct(W).sum();
    v[2] = 2.0 * U.cwiseProduct(R).sum() + W.squaredNorm() +
           lambda * dP.squaredNorm() + (lambda / Ld) * dq_sq;
    v[3] = W.cwiseProduct(R).sum() + lambda * sh.P_l.cwiseProduct(dP).sum() +
           (lambda / Ld) * q_dq + (mu / Ld) * ds_l1;
    push_message(log, MessageKind::Coeffs4, l, 4);

    out.total.a += v[0];
    out.total.b += v[1];
    out.total.c += v[2];
    out.total.d += v[3];
    out.W[size_t(l)] = std::move(W);
    out.U[size_t(l)] = std::move(U);
  }
  return out;
}

std::string CommReport::to_json() const {
  std::string out = "{\n  \"iterations\": [";
  char buf[160];
  for (size_t i = 0; i < per_iteration.size(); ++i) {
    const auto& it = per_iteration[i];
    std::snprintf(buf, sizeof(buf),
                  "%s\n    {\"iter\": %d, \"messages\": %zu, \"bytes\": %zu}",
                  i ? "," : "", it.iteration, it.messages, it.bytes);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "\n  ],\n  \"total_messages\": %zu,\n  \"total_bytes\": %zu\n}\n",
                total_messages, total_bytes);
  out += buf;
  return out;
}

Result run_distributed_stela(const anomaly::Problem& p, const anomaly::State& z0,
                             Index L, double delta, int max_iter) {
  if (!(delta > 0))
    throw std::invalid_argument("run_distributed_stela: delta must be > 0");
  Stopwatch clock;
  std::vector<NodeShard> shards = shard(p, z0, L);
  Result res;
  res.z = z0;
  res.z.P = assemble_p(shards);

  // h from node-order partial sums, combined exactly like the centralized
  // solver combines its full-matrix norms.
  const auto h_now = [&]() {
    double rsq = 0.0, psq = 0.0;
    for (const NodeShard& sh : shards) {
      rsq += sh.R_l.squaredNorm();
      psq += sh.P_l.squaredNorm();
    }
    return anomaly::h_combine(rsq, psq, res.z.Q.squaredNorm(),
                              res.z.S.template lpNorm<1>(), p.lambda, p.mu);
  };
  double h_cur = h_now();
  res.trace.push_back({0, h_cur, 0.0, 0.0, clock.seconds()});

  for (int t = 0; t < max_iter; ++t) {
    MessageLog log;
    const BestResponses br =
        distributed_best_response(shards, res.z.Q, res.z.S, p.lambda, p.mu, &log);
    const DistributedCoeffs dc =
        distributed_coeffs(shards, br, res.z.Q, res.z.S, p.lambda, p.mu, &log);

    CommIteration ci;
    ci.iteration = t + 1;
    ci.messages = log.size();
    for (const auto& m : log) ci.bytes += m.byte_size;
    res.comm.per_iteration.push_back(ci);
    res.comm.total_messages += ci.messages;
    res.comm.total_bytes += ci.bytes;

    const double gap = std::abs(dc.total.d);
    res.final_gap = gap;
    if (gap <= delta) {
      res.converged = true;
      return res;
    }
    const double gamma =
        quartic_min_unit(dc.total.a, dc.total.b, dc.total.c, dc.total.d);
    for (Index l = 0; l < L; ++l) {
      NodeShard& sh = shards[size_t(l)];
      sh.P_l += gamma * (br.BP[size_t(l)] - sh.P_l);
      sh.R_l += gamma * dc.W[size_t(l)] + (gamma * gamma) * dc.U[size_t(l)];
    }
    res.z.P = assemble_p(shards);
    res.z.Q += gamma * (br.BQ - res.z.Q);
    res.z.S += gamma * (br.BS - res.z.S);
    const double h_next = h_now();
    if (h_next > h_cur + 1e-10)
      throw std::runtime_error(
          "run_distributed_stela: objective increased (internal error)");
    h_cur = h_next;
    res.trace.push_back({t + 1, h_cur, gap, gamma, clock.seconds()});
  }
  return res;
}

}  // namespace distributed
}  // namespace dcsca
