#pragma once

#include "dhs/task.hpp"

#include <cstdint>
#include <vector>

namespace dhs {

/// Which table plays the trap role. Swapped exchanges h0 and h1, the variant
/// used against policies that pick h1 at step 1.
enum class PiOrientation { Standard, Swapped };

/// Number of trap-cluster states behind s3 in the Pi_n family: 2^(n-2) - 3, so
/// that a trapped search expands exactly 2^(n-2) states before the goal.
std::size_t pi_cluster_size(int n);

/*
  Pi_n: s0 -o1-> s1 -o2-> s2 (goal), s0 -o3-> s3, and s3 -> s_k for every
  cluster state. Two tabular heuristics:
      h0: s0 5, s1 5, s2 0, s3 3, s_k 1
      h1: s0 6, s1 3, s2 0, s3 4, s_k 1
  State ids: s0..s3 = 0..3, cluster from 4. Unit costs. Requires n >= 4.
*/
ExplicitTask gen_pi_n(int n, PiOrientation orientation = PiOrientation::Standard);

/// Pi'_n: as Pi_n with s' (id 4, h0 2, h1 10) spliced between s1 and s2;
/// cluster ids start at 5.
ExplicitTask gen_pi_prime_n(int n, PiOrientation orientation = PiOrientation::Standard);

struct ArtificialInstance {
    ExplicitTask task;
    /// List to pick at each step (root first, then the informative heuristic
    /// of each layer); as a scripted policy it solves the task in exactly
    /// `depth` expansions.
    std::vector<std::size_t> witness;
};

/*
  Layered two-heuristic domain where at each layer exactly one heuristic
  ranks the on-path successor first and the other ranks the layer's
  `branching` distractor leaves first. A seeded coin picks the informative
  heuristic per layer.
*/
ArtificialInstance gen_artificial(int depth, int branching, std::uint64_t seed);

struct TransportInstance {
    SasTask task;
    Plan witness;
};

/// One truck on a connected road map, packages with random origins and
/// destinations; drive/load/unload operators with unit cost.
TransportInstance gen_transport(int locations, int packages, std::uint64_t seed);

}  // namespace dhs
