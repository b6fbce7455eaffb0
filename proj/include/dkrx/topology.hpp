#pragma once

#include "dkrx/channel.hpp"

#include <string>
#include <vector>

namespace dkrx {

enum class TopologyKind { chain, subarray_tree };

/// Processing architecture over M leaf nodes (antennas), 0-based.
///
/// A chain is the flat daisy-chain tree rooted at node 0. A sub-array tree
/// groups leaves under node common buses; `weights[i]` is the pooling weight
/// of sub-array i at the root, and the weights sum to one.
struct Topology {
    TopologyKind kind = TopologyKind::chain;
    int M = 0;
    std::vector<std::vector<int>> subarrays;
    std::vector<double> weights;
};

/// Leaves visited sequentially from a shared initial guess; the group output
/// is the estimate held by its last leaf.
struct PoolingGroup {
    std::vector<int> leaves;
    double weight = 1.0;
};

/// Visitation plan for one cycle.
struct Schedule {
    std::vector<int> dispersion_order;
    std::vector<PoolingGroup> groups;

    /// True when pooling just hands the last leaf estimate back to the root.
    bool pass_through() const { return groups.size() == 1 && groups.front().weight == 1.0; }
};

Topology build_chain(int M);

/// Two-level tree. An empty `weights` means uniform 1/S at the root.
Topology build_subarray_tree(std::vector<std::vector<int>> partition, std::vector<double> weights = {});

/// Index m drawn with probability ||h_m||^2 / sum_i ||h_i||^2.
int select_random_root(const ChannelRealization& channel, RngStream& rng);

/// For a chain, the dispersion order is rotated to start at `root`
/// (root, root+1, ..., M-1, 0, ..., root-1). For a tree, each sub-array is
/// visited in ascending leaf order and `root` must be 0.
Schedule make_schedule(const Topology& topology, int root = 0);

/// Weighted combination of group outputs in ascending group order.
/// A pass-through schedule returns the single group output unchanged.
CVector pool_estimates(const Schedule& schedule, const std::vector<CVector>& group_outputs);

/// Parses `chain`, `tree:SxN` (S groups of N consecutive leaves), or
/// `file:<path>` pointing at {"subarrays": [[...]], "weights": [...]} with
/// 1-based leaf indices.
Topology parse_topology(const std::string& spec, int M);

/// Canonical text form used in CSV output.
std::string describe(const Topology& topology);

}  // namespace dkrx
