#include "curverec/cluster.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>

#include "spatial.hpp"

namespace curverec {

void DensityParams::validate() const {
    if (k < 1) raise(Errc::domain_error, "K must be >= 1");
    if (min_pts < 1) raise(Errc::domain_error, "MinPts must be >= 1");
}

double knn_epsilon(const FeaturePointSet& x, int k) {
    if (k < 1) raise(Errc::domain_error, "K must be >= 1");
    if (x.size() <= static_cast<std::size_t>(k))
        raise(Errc::too_few_points, "need more than K points for the epsilon estimate");

    detail::KdTree tree(x.points);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto nn = tree.knn(static_cast<int>(i), k);
        sum += nn.back().first; // distance to the k-th neighbour
    }
    return sum / static_cast<double>(x.size());
}

ClusterResult dbscan(const FeaturePointSet& x, const DensityParams& params) {
    params.validate();
    const std::size_t n = x.size();

    ClusterResult result;
    result.labels.assign(n, 0);
    double eps = params.epsilon;
    if (eps <= 0.0) eps = knn_epsilon(x, params.k);
    result.epsilon = eps;
    if (n == 0) return result;

    detail::KdTree tree(x.points);

    // neighbourhood includes the point itself, as in the usual core-point count
    std::vector<std::vector<int>> nbrs(n);
    std::vector<char> core(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        nbrs[i] = tree.radius(static_cast<int>(i), eps);
        core[i] = static_cast<int>(nbrs[i].size()) >= params.min_pts;
    }

    // connected components over density-reachable core points
    constexpr int kUnset = -1;
    std::vector<int> comp(n, kUnset);
    int ncomp = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (!core[seed] || comp[seed] != kUnset) continue;
        int id = ncomp++;
        std::vector<int> stack{static_cast<int>(seed)};
        comp[seed] = id;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : nbrs[static_cast<std::size_t>(u)]) {
                if (core[static_cast<std::size_t>(v)] && comp[static_cast<std::size_t>(v)] == kUnset) {
                    comp[static_cast<std::size_t>(v)] = id;
                    stack.push_back(v);
                }
            }
        }
    }

    // border points join the cluster of their nearest core neighbour, so the
    // partition does not depend on input order
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        double best = std::numeric_limits<double>::infinity();
        int best_comp = kUnset;
        for (int v : nbrs[i]) {
            if (!core[static_cast<std::size_t>(v)]) continue;
            double d = (x.points[i] - x.points[static_cast<std::size_t>(v)]).norm();
            if (d < best || (d == best && comp[static_cast<std::size_t>(v)] < best_comp)) {
                best = d;
                best_comp = comp[static_cast<std::size_t>(v)];
            }
        }
        comp[i] = best_comp; // stays kUnset => noise
    }

    // gather, then order clusters by decreasing size with ties by smallest member
    std::vector<std::vector<int>> members(static_cast<std::size_t>(ncomp));
    for (std::size_t i = 0; i < n; ++i) {
        if (comp[i] == kUnset)
            result.noise_ids.push_back(static_cast<int>(i));
        else
            members[static_cast<std::size_t>(comp[i])].push_back(static_cast<int>(i));
    }
    std::vector<int> order(static_cast<std::size_t>(ncomp));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& ma = members[static_cast<std::size_t>(a)];
        const auto& mb = members[static_cast<std::size_t>(b)];
        if (ma.size() != mb.size()) return ma.size() > mb.size();
        return ma.front() < mb.front();
    });

    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        Cluster c;
        c.label = static_cast<int>(rank) + 1;
        c.member_ids = members[static_cast<std::size_t>(order[rank])];
        c.points.reserve(c.member_ids.size());
        for (int id : c.member_ids) {
            c.points.push_back(x.points[static_cast<std::size_t>(id)]);
            result.labels[static_cast<std::size_t>(id)] = c.label;
        }
        c.small = c.member_ids.size() < 3 * static_cast<std::size_t>(params.min_pts);
        result.clusters.push_back(std::move(c));
    }
    return result;
}

void dump_labels_csv(const ClusterResult& result, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) raise(Errc::io_error, "cannot write '" + path + "'");
    std::fprintf(out, "point_index,cluster_label\n");
    for (std::size_t i = 0; i < result.labels.size(); ++i)
        std::fprintf(out, "%zu,%d\n", i, result.labels[i]);
    std::fclose(out);
}

} // namespace curverec
