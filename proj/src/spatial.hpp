#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <vector>

#include "curverec/geometry.hpp"

namespace curverec::detail {

/// Median-split k-d tree over a fixed point set. Queries return indices into
/// the original array; results are deterministic (ties sorted by index).
class KdTree {
public:
    explicit KdTree(const std::vector<Vec3>& points) : pts_(points) {
        order_.resize(pts_.size());
        std::iota(order_.begin(), order_.end(), 0);
        nodes_.reserve(pts_.size());
        if (!order_.empty()) root_ = build(0, order_.size(), 0);
    }

    /// k nearest neighbours of pts_[query], the query point itself excluded.
    /// Returns pairs (distance, index) sorted by distance then index.
    std::vector<std::pair<double, int>> knn(int query, int k) const {
        std::priority_queue<std::pair<double, int>> heap; // max-heap on distance
        knn_search(root_, query, k, heap);
        std::vector<std::pair<double, int>> out(heap.size());
        for (std::size_t i = out.size(); i-- > 0;) {
            out[i] = heap.top();
            heap.pop();
        }
        for (auto& [d, idx] : out) d = std::sqrt(d);
        std::stable_sort(out.begin(), out.end());
        return out;
    }

    /// Indices (ascending) of all points within radius of pts_[query],
    /// including the query point itself.
    std::vector<int> radius(int query, double r) const {
        std::vector<int> out;
        radius_search(root_, pts_[static_cast<std::size_t>(query)], r * r, out);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    struct Node {
        int point = -1;
        int left = -1;
        int right = -1;
        int axis = 0;
    };

    int build(std::size_t lo, std::size_t hi, int depth) {
        if (lo >= hi) return -1;
        int axis = depth % 3;
        std::size_t mid = (lo + hi) / 2;
        std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                         [&](int a, int b) {
                             double va = pts_[static_cast<std::size_t>(a)][axis];
                             double vb = pts_[static_cast<std::size_t>(b)][axis];
                             return va < vb || (va == vb && a < b);
                         });
        Node node;
        node.point = order_[mid];
        node.axis = axis;
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        int l = build(lo, mid, depth + 1);
        int r = build(mid + 1, hi, depth + 1);
        nodes_[static_cast<std::size_t>(id)].left = l;
        nodes_[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    void knn_search(int node_id, int query, int k,
                    std::priority_queue<std::pair<double, int>>& heap) const {
        if (node_id < 0) return;
        const Node& node = nodes_[static_cast<std::size_t>(node_id)];
        const Vec3& q = pts_[static_cast<std::size_t>(query)];
        if (node.point != query) {
            double d2 = (pts_[static_cast<std::size_t>(node.point)] - q).squaredNorm();
            if (static_cast<int>(heap.size()) < k)
                heap.emplace(d2, node.point);
            else if (d2 < heap.top().first) {
                heap.pop();
                heap.emplace(d2, node.point);
            }
        }
        double diff = q[node.axis] - pts_[static_cast<std::size_t>(node.point)][node.axis];
        int near = diff <= 0 ? node.left : node.right;
        int far = diff <= 0 ? node.right : node.left;
        knn_search(near, query, k, heap);
        if (static_cast<int>(heap.size()) < k || diff * diff <= heap.top().first)
            knn_search(far, query, k, heap);
    }

    void radius_search(int node_id, const Vec3& q, double r2, std::vector<int>& out) const {
        if (node_id < 0) return;
        const Node& node = nodes_[static_cast<std::size_t>(node_id)];
        const Vec3& p = pts_[static_cast<std::size_t>(node.point)];
        if ((p - q).squaredNorm() <= r2) out.push_back(node.point);
        double diff = q[node.axis] - p[node.axis];
        int near = diff <= 0 ? node.left : node.right;
        int far = diff <= 0 ? node.right : node.left;
        radius_search(near, q, r2, out);
        if (diff * diff <= r2) radius_search(far, q, r2, out);
    }

    const std::vector<Vec3>& pts_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace curverec::detail
