#include "dkrx/topology.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace dkrx {

namespace {

constexpr double kWeightSumTolerance = 1e-12;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument("topology: " + msg); }

int parse_positive(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    int value = 0;
    try {
        value = std::stoi(text, &used);
    } catch (const std::exception&) {
        bad("cannot parse " + what + " from '" + text + "'");
    }
    if (used != text.size() || value < 1) {
        bad("invalid " + what + " '" + text + "'");
    }
    return value;
}

Topology load_partition_file(const std::string& path, int M) {
    std::ifstream in(path);
    if (!in) {
        bad("cannot open partition file '" + path + "'");
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        bad("malformed partition file: " + std::string(e.what()));
    }
    if (!doc.contains("subarrays") || !doc["subarrays"].is_array()) {
        bad("partition file needs a \"subarrays\" array");
    }
    std::vector<std::vector<int>> partition;
    for (const auto& group : doc["subarrays"]) {
        std::vector<int> leaves;
        for (const auto& leaf : group) {
            leaves.push_back(leaf.get<int>() - 1);
        }
        partition.push_back(std::move(leaves));
    }
    std::vector<double> weights;
    if (doc.contains("weights") && !doc["weights"].is_null()) {
        weights = doc["weights"].get<std::vector<double>>();
    }
    Topology t = build_subarray_tree(std::move(partition), std::move(weights));
    if (t.M != M) {
        bad("partition covers " + std::to_string(t.M) + " leaves but M=" + std::to_string(M));
    }
    return t;
}

}  // namespace

Topology build_chain(int M) {
    if (M < 1) {
        bad("chain needs M >= 1");
    }
    Topology t;
    t.kind = TopologyKind::chain;
    t.M = M;
    return t;
}

Topology build_subarray_tree(std::vector<std::vector<int>> partition, std::vector<double> weights) {
    if (partition.empty()) {
        bad("empty partition");
    }
    std::size_t total = 0;
    for (const auto& group : partition) {
        if (group.empty()) {
            bad("empty sub-array");
        }
        total += group.size();
    }
    std::vector<int> seen(total, 0);
    for (const auto& group : partition) {
        for (int leaf : group) {
            if (leaf < 0 || static_cast<std::size_t>(leaf) >= total) {
                bad("leaf index " + std::to_string(leaf) + " outside the partition range");
            }
            if (seen[static_cast<std::size_t>(leaf)]++ != 0) {
                bad("leaf " + std::to_string(leaf) + " appears in more than one sub-array");
            }
        }
    }
    // total leaves placed and no duplicates implies a cover of 0..total-1

    if (weights.empty()) {
        weights.assign(partition.size(), 1.0 / static_cast<double>(partition.size()));
    }
    if (weights.size() != partition.size()) {
        bad("expected " + std::to_string(partition.size()) + " weights, got " + std::to_string(weights.size()));
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            bad("pooling weights must be positive");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
        bad("pooling weights sum to " + std::to_string(sum) + ", expected 1");
    }

    for (auto& group : partition) {
        std::sort(group.begin(), group.end());
    }
    Topology t;
    t.kind = TopologyKind::subarray_tree;
    t.M = static_cast<int>(total);
    t.subarrays = std::move(partition);
    t.weights = std::move(weights);
    return t;
}

int select_random_root(const ChannelRealization& channel, RngStream& rng) {
    const Eigen::VectorXd energy = channel.row_energy();
    const double total = energy.sum();
    if (!(total > 0.0)) {
        throw std::invalid_argument("select_random_root: channel has zero energy");
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    int last_positive = 0;
    for (int m = 0; m < energy.size(); ++m) {
        if (energy[m] <= 0.0) {
            continue;
        }
        last_positive = m;
        acc += energy[m];
        if (target < acc) {
            return m;
        }
    }
    return last_positive;
}

Schedule make_schedule(const Topology& topology, int root) {
    if (root < 0 || root >= topology.M) {
        throw std::invalid_argument("make_schedule: root " + std::to_string(root) + " outside [0, " +
                                    std::to_string(topology.M) + ")");
    }
    Schedule s;
    if (topology.kind == TopologyKind::chain) {
        PoolingGroup group;
        group.leaves.resize(static_cast<std::size_t>(topology.M));
        for (int i = 0; i < topology.M; ++i) {
            group.leaves[static_cast<std::size_t>(i)] = (root + i) % topology.M;
        }
        s.dispersion_order = group.leaves;
        s.groups.push_back(std::move(group));
        return s;
    }
    if (root != 0) {
        throw std::invalid_argument("make_schedule: root rotation applies to chains only");
    }
    for (std::size_t i = 0; i < topology.subarrays.size(); ++i) {
        s.groups.push_back(PoolingGroup{topology.subarrays[i], topology.weights[i]});
        s.dispersion_order.insert(s.dispersion_order.end(), topology.subarrays[i].begin(),
                                  topology.subarrays[i].end());
    }
    return s;
}

CVector pool_estimates(const Schedule& schedule, const std::vector<CVector>& group_outputs) {
    if (group_outputs.size() != schedule.groups.size() || group_outputs.empty()) {
        throw std::invalid_argument("pool_estimates: one output per group required");
    }
    if (schedule.pass_through()) {
        return group_outputs.front();
    }
    CVector pooled = schedule.groups[0].weight * group_outputs[0];
    for (std::size_t g = 1; g < group_outputs.size(); ++g) {
        pooled += schedule.groups[g].weight * group_outputs[g];
    }
    return pooled;
}

Topology parse_topology(const std::string& spec, int M) {
    if (spec == "chain") {
        return build_chain(M);
    }
    if (spec.starts_with("tree:")) {
        const std::string dims = spec.substr(5);
        const auto x = dims.find('x');
        if (x == std::string::npos) {
            bad("expected tree:SxN, got '" + spec + "'");
        }
        const int groups = parse_positive(dims.substr(0, x), "sub-array count");
        const int size = parse_positive(dims.substr(x + 1), "sub-array size");
        if (groups * size != M) {
            bad(spec + " covers " + std::to_string(groups * size) + " leaves but M=" + std::to_string(M));
        }
        std::vector<std::vector<int>> partition(static_cast<std::size_t>(groups));
        for (int g = 0; g < groups; ++g) {
            partition[static_cast<std::size_t>(g)].resize(static_cast<std::size_t>(size));
            std::iota(partition[static_cast<std::size_t>(g)].begin(), partition[static_cast<std::size_t>(g)].end(),
                      g * size);
        }
        return build_subarray_tree(std::move(partition));
    }
    if (spec.starts_with("file:")) {
        return load_partition_file(spec.substr(5), M);
    }
    if (spec.ends_with(".json")) {
        return load_partition_file(spec, M);
    }
    bad("unknown topology '" + spec + "' (expected chain, tree:SxN or a JSON partition file)");
}

std::string describe(const Topology& topology) {
    if (topology.kind == TopologyKind::chain) {
        return "chain";
    }
    const auto S = topology.subarrays.size();
    const auto N = topology.subarrays.front().size();
    bool regular = true;
    for (std::size_t g = 0; g < S && regular; ++g) {
        const auto& leaves = topology.subarrays[g];
        regular = leaves.size() == N && std::abs(topology.weights[g] - 1.0 / static_cast<double>(S)) < 1e-15;
        for (std::size_t i = 0; i < leaves.size() && regular; ++i) {
            regular = leaves[i] == static_cast<int>(g * N + i);
        }
    }
    if (regular) {
        return "tree:" + std::to_string(S) + "x" + std::to_string(N);
    }
    return "tree:custom" + std::to_string(S);
}

}  // namespace dkrx
