#pragma once

#include <string>
#include <vector>

#include "curverec/features.hpp"

namespace curverec {

struct DensityParams {
    int k = 50;           // neighbour count for the epsilon estimate
    int min_pts = 5;      // DBSCAN core threshold
    double epsilon = 0.0; // density radius; <= 0 means estimate via knn_epsilon

    void validate() const;
};

struct Cluster {
    std::vector<Vec3> points;
    std::vector<int> member_ids; // ascending indices into the feature set
    int label = 0;               // 1..m, in output order
    bool small = false;          // fewer than 3 * min_pts members
};

struct ClusterResult {
    std::vector<Cluster> clusters; // ordered by decreasing size, ties by smallest member id
    std::vector<int> noise_ids;    // feature-set indices left unassigned
    std::vector<int> labels;       // per input point; 0 = noise
    double epsilon = 0.0;          // radius actually used
};

/// Mean distance from each point to its k-th nearest neighbour (self excluded).
double knn_epsilon(const FeaturePointSet& x, int k);

/// Density clustering. Core points need >= min_pts neighbours within epsilon
/// (point itself included); clusters are maximal density-connected sets.
/// Border points go to the cluster of their nearest core point, which keeps
/// the partition independent of input order.
ClusterResult dbscan(const FeaturePointSet& x, const DensityParams& params);

/// Debug dump, one "point_index,cluster_label" row per point (0 = noise).
void dump_labels_csv(const ClusterResult& result, const std::string& path);

} // namespace curverec
