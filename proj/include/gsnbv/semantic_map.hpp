#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsnbv/scene.hpp"

namespace gsnbv {

inline constexpr double kDefaultResolution = 0.003;  // m per voxel
inline const Vec3 kGridExtentM(0.42, 0.45, 0.84);
inline constexpr float kLogOddsOcc = 0.85f;
inline constexpr float kLogOddsFree = -0.4f;
inline constexpr float kLogOddsMin = -2.0f;
inline constexpr float kLogOddsMax = 3.5f;
inline constexpr float kMaxFusionProb = 0.9f;

// Region-of-interest cuboid around the estimated fruit position.
struct RoiBox {
    Vec3 center = Vec3::Zero();
    Vec3 half_extents{0.1, 0.1, 0.15};
};

// Binary entropy in bits; 0 log 0 := 0.
double binary_entropy(double p);

// Dense W x H x D voxel grid carrying occupancy log-odds, a semantic class
// with its probability, and a region-of-interest flag per voxel.
class SemanticVoxelGrid {
public:
    SemanticVoxelGrid(const Vec3& origin, double resolution, int w, int h, int d);

    // Grid of the default physical extent centered on `center`.
    static SemanticVoxelGrid centered_on(const Vec3& center,
                                         double resolution = kDefaultResolution);

    int width() const { return w_; }
    int height() const { return h_; }
    int depth() const { return d_; }
    double resolution() const { return res_; }
    const Vec3& origin() const { return origin_; }
    size_t voxel_count() const { return log_odds_.size(); }

    size_t index_of(int x, int y, int z) const {
        return static_cast<size_t>(x) +
               static_cast<size_t>(w_) * (static_cast<size_t>(y) +
                                          static_cast<size_t>(h_) * static_cast<size_t>(z));
    }
    Vec3 voxel_center(size_t idx) const;
    bool contains_point(const Vec3& p) const;
    // Voxel containing p; false when p is outside the grid.
    bool voxel_at(const Vec3& p, int& x, int& y, int& z) const;

    float log_odds(size_t idx) const { return log_odds_[idx]; }
    uint8_t voxel_class(size_t idx) const { return class_[idx]; }
    float class_prob(size_t idx) const { return p_cls_[idx]; }
    bool in_roi(size_t idx) const { return roi_[idx] != 0; }
    bool occupied(size_t idx) const { return log_odds_[idx] > 0.0f; }
    bool unobserved(size_t idx) const {
        return log_odds_[idx] == 0.0f && class_[idx] == kNoClass;
    }
    double occupancy_probability(size_t idx) const {
        return 1.0 / (1.0 + std::exp(-static_cast<double>(log_odds_[idx])));
    }

    // Flags voxels whose centers lie inside the box; returns how many.
    // Throws AlreadyMarked on a second call.
    size_t mark_roi(const RoiBox& box);
    size_t roi_voxel_count() const { return roi_count_; }

    // Every voxel the segment [a, b] passes through, in order (exact DDA walk).
    std::vector<size_t> traverse(const Vec3& a, const Vec3& b) const;

    // Calls visitor(index, t_entry) for each voxel along origin + t * dir,
    // t in [0, max_range]; stops early when the visitor returns false.
    template <class Visitor>
    void walk_ray(const Vec3& origin, const Vec3& dir, double max_range,
                  Visitor&& visit) const;

    struct InsertStats {
        size_t rays = 0;
        size_t endpoint_updates = 0;
        size_t free_updates = 0;
    };
    // Per valid-depth pixel: free-space log-odds on voxels strictly before the
    // measured endpoint, occupied log-odds on the endpoint voxel, and semantic
    // max-fusion (p_in = 0.9) on the endpoint voxel when the pixel is labeled.
    InsertStats insert_observation(const Observation& obs, const CameraModel& cam);

    // Uncertainty of a voxel in bits: binary entropy of its class probability;
    // unobserved voxels count a full bit, observed unlabeled ones zero.
    double semantic_entropy(size_t idx) const;

    // First voxel along the ray with occupancy probability > 0.5, with the
    // ray distance where the voxel is entered.
    std::optional<std::pair<size_t, double>> first_occupied_along(const Vec3& origin,
                                                                  const Vec3& dir,
                                                                  double max_range) const;

    // Binary dump: 16-byte header (magic "SVXG", version, W, H, D as uint16,
    // resolution float32) then per-voxel records (log-odds float32, class
    // uint8, class probability float32, roi uint8), x-fastest.
    void dump(const std::string& path) const;

private:
    void apply_log_odds(size_t idx, float delta) {
        float v = log_odds_[idx] + delta;
        log_odds_[idx] = v < kLogOddsMin ? kLogOddsMin : (v > kLogOddsMax ? kLogOddsMax : v);
    }
    void fuse_class(size_t idx, uint8_t cls, float p_in);

    Vec3 origin_;
    double res_;
    int w_, h_, d_;
    std::vector<float> log_odds_;
    std::vector<uint8_t> class_;
    std::vector<float> p_cls_;
    std::vector<uint8_t> roi_;
    size_t roi_count_ = 0;
    bool roi_marked_ = false;
};

template <class Visitor>
void SemanticVoxelGrid::walk_ray(const Vec3& origin, const Vec3& dir, double max_range,
                                 Visitor&& visit) const {
    const Vec3 lo = origin_;
    const Vec3 hi = origin_ + Vec3(w_ * res_, h_ * res_, d_ * res_);

    // Clip [0, max_range] against the grid box.
    double t0 = 0.0;
    double t1 = max_range;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(dir[i]) < 1e-15) {
            if (origin[i] < lo[i] || origin[i] > hi[i]) return;
            continue;
        }
        double ta = (lo[i] - origin[i]) / dir[i];
        double tb = (hi[i] - origin[i]) / dir[i];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (t0 > t1) return;

    const Vec3 entry = origin + t0 * dir;
    int ix[3];
    const int dims[3] = {w_, h_, d_};
    for (int i = 0; i < 3; ++i) {
        ix[i] = static_cast<int>(std::floor((entry[i] - origin_[i]) / res_));
        ix[i] = std::clamp(ix[i], 0, dims[i] - 1);
    }

    int step[3];
    double t_next[3], t_delta[3];
    for (int i = 0; i < 3; ++i) {
        if (dir[i] > 1e-15) {
            step[i] = 1;
            t_delta[i] = res_ / dir[i];
            t_next[i] = (origin_[i] + (ix[i] + 1) * res_ - origin[i]) / dir[i];
        } else if (dir[i] < -1e-15) {
            step[i] = -1;
            t_delta[i] = -res_ / dir[i];
            t_next[i] = (origin_[i] + ix[i] * res_ - origin[i]) / dir[i];
        } else {
            step[i] = 0;
            t_delta[i] = std::numeric_limits<double>::infinity();
            t_next[i] = std::numeric_limits<double>::infinity();
        }
    }

    double t_entry = t0;
    while (true) {
        if (!visit(index_of(ix[0], ix[1], ix[2]), t_entry)) return;
        int axis = 0;
        if (t_next[1] < t_next[axis]) axis = 1;
        if (t_next[2] < t_next[axis]) axis = 2;
        if (t_next[axis] > t1) return;
        t_entry = t_next[axis];
        ix[axis] += step[axis];
        if (ix[axis] < 0 || ix[axis] >= dims[axis]) return;
        t_next[axis] += t_delta[axis];
    }
}

}  // namespace gsnbv
