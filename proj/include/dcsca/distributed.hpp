#pragma once

#include <array>

#include "dcsca/anomaly.hpp"

namespace dcsca {
namespace distributed {

/// In-process simulation of the L-node row decomposition of the anomaly
/// solver. Y, D and P are split into contiguous row blocks; Q and S are
/// replicated. All reductions run sequentially in node-id order so the
/// floating-point sums are deterministic.

struct NodeShard {
  Index node_id = 0;
  Index row_offset = 0;
  Matrix Y_l;  // N_l x K
  Matrix D_l;  // N_l x I
  Matrix P_l;  // N_l x rho
  Matrix R_l;  // N_l x K cached local residual P_l Q + D_l S - Y_l
};

enum class MessageKind { GramPQ, GramD, ResidualSum, Coeffs4 };

/// One reduction contribution. byte_size = 16-byte header + 8 bytes per real.
struct ReductionMessage {
  MessageKind kind;
  Index node_id = 0;
  std::size_t reals = 0;
  std::size_t byte_size = 0;
};

constexpr std::size_t message_bytes(std::size_t reals) { return 16 + 8 * reals; }

using MessageLog = std::vector<ReductionMessage>;

/// Contiguous balanced row partition; sizes differ by at most one (the first
/// N mod L shards get the extra row). L = 1 reproduces the full problem.
std::vector<NodeShard> shard(const anomaly::Problem& p, const anomaly::State& z,
                             Index L);

/// Stack the per-node P blocks back into the global P.
Matrix assemble_p(const std::vector<NodeShard>& shards);

struct BestResponses {
  std::vector<Matrix> BP;  // per node, N_l x rho
  Matrix BQ;
  Matrix BS;
  Vector dDtD;  // reduced diag(D^T D)
};

/// Node-local P best responses plus reduced Q and S best responses. Every
/// partial-sum contribution is appended to log (if non-null):
/// GramPQ carries P_l^T P_l and P_l^T (Y_l - D_l S), GramD the local
/// diag(D_l^T D_l), ResidualSum the local D_l^T R_l.
BestResponses distributed_best_response(const std::vector<NodeShard>& shards,
                                        const Matrix& Q_t, const Matrix& S_t,
                                        double lambda, double mu,
                                        MessageLog* log);

struct DistributedCoeffs {
  anomaly::QuarticCoeffs total;
  std::vector<std::array<double, 4>> per_node;
  // Node-local residual-update matrices: R_l advances by g W_l + g^2 U_l.
  std::vector<Matrix> W;
  std::vector<Matrix> U;
};

/// Per-node (a_l, b_l, c_l, d_l) whose node-order sums equal the centralized
/// quartic coefficients; the shared Q regularizer and mu terms are divided
/// by L so the sums are exact. Each 4-vector is exchanged as one Coeffs4
/// message.
DistributedCoeffs distributed_coeffs(const std::vector<NodeShard>& shards,
                                     const BestResponses& br, const Matrix& Q_t,
                                     const Matrix& S_t, double lambda, double mu,
                                     MessageLog* log);

struct CommIteration {
  int iteration = 0;
  std::size_t messages = 0;
  std::size_t bytes = 0;
};

struct CommReport {
  std::vector<CommIteration> per_iteration;
  std::size_t total_messages = 0;
  std::size_t total_bytes = 0;

  std::string to_json() const;
};

struct Result {
  anomaly::State z;
  std::vector<IterationTrace> trace;
  bool converged = false;
  double final_gap = 0.0;
  CommReport comm;
};

/// L-node run; iterate-for-iterate value-identical to anomaly::run_stela
/// (bitwise for L = 1, reduction-order noise otherwise).
Result run_distributed_stela(const anomaly::Problem& p, const anomaly::State& z0,
                             Index L, double delta, int max_iter);

}  // namespace distributed
}  // namespace dcsca
