#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "propshare/game.hpp"
#include "propshare/matrix.hpp"

namespace propshare {

// ---------------------------------------------------------------------------
// Social optimum
// ---------------------------------------------------------------------------

struct MachineAssignment {
  double value = 0.0;
  std::vector<std::size_t> owner;  // machine -> user with the maximum weight
};

// Without parallelism bounds the optimum hands each machine to the user who
// values it most (lowest index on ties).
MachineAssignment social_optimum_unbounded(const Matrix& weights);

struct SlotMatch {
  std::size_t user = 0;
  std::size_t slot = 0;  // which of the user's parallelism slots
  std::size_t machine = 0;
};

struct MatchingOptimum {
  double value = 0.0;
  std::vector<SlotMatch> matches;
};

// With bounds k_i the optimum is a maximum-weight matching between user
// slots (k_i copies of user i's weight row) and machines.
MatchingOptimum social_optimum_bounded(const Matrix& weights,
                                       const std::vector<std::size_t>& bounds);

// Whole-machine allocations realizing the above optima.
Matrix assignment_allocation(const MachineAssignment& assignment, std::size_t users,
                             std::size_t machines);
Matrix matching_allocation(const MatchingOptimum& matching, std::size_t users,
                           std::size_t machines);

// ---------------------------------------------------------------------------
// Two-player analytic equilibria (two machines, normalized weights)
// ---------------------------------------------------------------------------

// Both users weight the machines (alpha, 1-alpha).
struct EqualWeightEquilibrium {
  double bid = 0.0;  // each user bids `bid` on machine 1
  std::array<double, 2> utilities{};
};
EqualWeightEquilibrium two_player_equal_weight_equilibrium(double alpha);

enum class EquilibriumKind { kSymmetric, kAsymmetric, kThreshold };

struct TwoPlayerEquilibrium {
  double delta = 0.0;  // root of the cubic, (2-s)/s for s = total on machine 1
  double bid_user1 = 0.0;
  double bid_user2 = 0.0;
  double welfare = 0.0;
  double efficiency = 0.0;
  EquilibriumKind kind = EquilibriumKind::kSymmetric;
};

struct OppositeGameEquilibria {
  double alpha = 0.0;
  double cubic_c = 0.0;  // delta^3 - c delta^2 + c delta - 1 = 0
  double optimum = 0.0;
  std::vector<TwoPlayerEquilibrium> equilibria;  // sorted by delta
};

// User 1 weights (alpha, 1-alpha), user 2 the opposite. Every equilibrium is
// a nonnegative root of the cubic, which factors exactly as
// (delta - 1)(delta^2 - (c-1) delta + 1); the asymmetric pair exists iff
// (c-1)^2 >= 4. Bids are recovered per root and verified against both
// first-order conditions.
OppositeGameEquilibria two_player_opposite_equilibria(double alpha);

// ---------------------------------------------------------------------------
// Worst-case construction and the utility floor
// ---------------------------------------------------------------------------

struct WorstCaseInstance {
  GameConfig config;  // m = n^2 + n users, unit budgets
  Matrix weights;     // n^2 uniform users + n single-machine users
  Matrix bids;        // candidate equilibrium: uniform spread + all-in
  double optimum = 0.0;
  double welfare = 0.0;  // 2n/(n+1) up to the tiny-weight correction
};

// The m = n^2 + n player game whose equilibrium welfare stays below 2 while
// the optimum is n. Zero weights are replaced by 1e-9 (rows renormalized) so
// the game stays strongly competitive.
WorstCaseInstance worst_case_instance(std::size_t machines);

// Bids proportional to the money already on each machine. With unit budgets
// this guarantees a 1/m share of every machine, hence utility 1/m.
std::vector<double> utility_floor_bid(std::span<const double> prices_excluding_user,
                                      double budget);

}  // namespace propshare
