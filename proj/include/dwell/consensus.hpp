#pragma once

#include "dwell/model.hpp"
#include "dwell/synthesis.hpp"

namespace dwell {

/// Identical agents coupled through their delayed states by a time-varying
/// Laplacian that slides between two commuting topologies,
///   L(sigma) = sigma L1 + (1 - sigma) L2, sigma in [0, 1].
/// Commutation makes L1 and L2 simultaneously diagonalizable, so one scalar
/// design over the coupling-eigenvalue range covers every network mode.
struct ConsensusNetwork {
  Matrix A, Ad, B, E;      // agent dynamics (Ad enters through the coupling)
  Matrix C, Cd, D, F;      // agent performance channel (Cd likewise)
  Matrix L1, L2;           // symmetric Laplacians with zero row sums

  int agents() const { return static_cast<int>(L1.rows()); }

  /// Shape checks plus: both Laplacians symmetric with zero row sums, and
  /// commuting to 1e-12 (otherwise the scalarized design does not transfer
  /// to the network; the error says so explicitly).
  void validate() const;
};

struct ConsensusBuild {
  /// Single-agent plant scheduled on the coupling eigenvalue, box
  /// [0, lambda_max]: A_d(rho) = rho * Ad_agent, C_d(rho) = rho * Cd_agent.
  LpvDelaySystem scalarized;
  /// Full stacked plant scheduled on the topology mix sigma in [0, 1]:
  /// A_d(sigma) = L(sigma) (x) Ad_agent, everything else block diagonal.
  LpvDelaySystem network;
  double lambda_max = 0.0;
};

ConsensusBuild build_consensus(const ConsensusNetwork& net);

/// Lifts a scalarized split-structure gain (U = tau*Ua + rho*Ub, constant X)
/// onto the network:
///   K_net(tau, sigma) = tau * I (x) (Ua X^-1) + L(sigma) (x) (Ub X^-1),
/// returned as a schedule over (tau, sigma) with identity X factor.
GainSchedule lift_gain(const GainSchedule& scalar_gain, const ConsensusNetwork& net);

}  // namespace dwell
