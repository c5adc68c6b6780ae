#include "gsnbv/semantic_map.hpp"

#include <cstring>
#include <fstream>

#include "gsnbv/errors.hpp"

namespace gsnbv {

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

SemanticVoxelGrid::SemanticVoxelGrid(const Vec3& origin, double resolution, int w, int h,
                                     int d)
    : origin_(origin), res_(resolution), w_(w), h_(h), d_(d) {
    if (!(resolution > 0.0) || w < 1 || h < 1 || d < 1)
        throw Error("voxel grid needs positive resolution and dimensions");
    const size_t n = static_cast<size_t>(w) * h * d;
    log_odds_.assign(n, 0.0f);
    class_.assign(n, kNoClass);
    p_cls_.assign(n, 0.0f);
    roi_.assign(n, 0);
}

SemanticVoxelGrid SemanticVoxelGrid::centered_on(const Vec3& center, double resolution) {
    const int w = static_cast<int>(std::lround(kGridExtentM.x() / resolution));
    const int h = static_cast<int>(std::lround(kGridExtentM.y() / resolution));
    const int d = static_cast<int>(std::lround(kGridExtentM.z() / resolution));
    const Vec3 origin = center - 0.5 * Vec3(w * resolution, h * resolution, d * resolution);
    return SemanticVoxelGrid(origin, resolution, w, h, d);
}

Vec3 SemanticVoxelGrid::voxel_center(size_t idx) const {
    const size_t x = idx % w_;
    const size_t y = (idx / w_) % h_;
    const size_t z = idx / (static_cast<size_t>(w_) * h_);
    return origin_ + res_ * Vec3(x + 0.5, y + 0.5, z + 0.5);
}

bool SemanticVoxelGrid::contains_point(const Vec3& p) const {
    const Vec3 rel = p - origin_;
    return rel.x() >= 0.0 && rel.x() < w_ * res_ && rel.y() >= 0.0 && rel.y() < h_ * res_ &&
           rel.z() >= 0.0 && rel.z() < d_ * res_;
}

bool SemanticVoxelGrid::voxel_at(const Vec3& p, int& x, int& y, int& z) const {
    if (!contains_point(p)) return false;
    const Vec3 rel = (p - origin_) / res_;
    x = std::min(static_cast<int>(rel.x()), w_ - 1);
    y = std::min(static_cast<int>(rel.y()), h_ - 1);
    z = std::min(static_cast<int>(rel.z()), d_ - 1);
    return true;
}

size_t SemanticVoxelGrid::mark_roi(const RoiBox& box) {
    if (roi_marked_) throw AlreadyMarked{};
    roi_marked_ = true;
    size_t count = 0;
    for (size_t idx = 0; idx < roi_.size(); ++idx) {
        const Vec3 rel = (voxel_center(idx) - box.center).cwiseAbs();
        if (rel.x() <= box.half_extents.x() && rel.y() <= box.half_extents.y() &&
            rel.z() <= box.half_extents.z()) {
            roi_[idx] = 1;
            ++count;
        }
    }
    roi_count_ = count;
    return count;
}

std::vector<size_t> SemanticVoxelGrid::traverse(const Vec3& a, const Vec3& b) const {
    std::vector<size_t> out;
    const Vec3 diff = b - a;
    const double len = diff.norm();
    if (len < 1e-15) {
        int x, y, z;
        if (voxel_at(a, x, y, z)) out.push_back(index_of(x, y, z));
        return out;
    }
    walk_ray(a, diff / len, len, [&out](size_t idx, double) {
        out.push_back(idx);
        return true;
    });
    return out;
}

void SemanticVoxelGrid::fuse_class(size_t idx, uint8_t cls, float p_in) {
    if (class_[idx] == kNoClass) {
        class_[idx] = cls;
        p_cls_[idx] = p_in;
    } else if (cls == class_[idx]) {
        p_cls_[idx] = std::max(p_cls_[idx], p_in);
    } else if (p_in > p_cls_[idx]) {  // strict: ties keep the incumbent class
        class_[idx] = cls;
        p_cls_[idx] = p_in;
    }
}

SemanticVoxelGrid::InsertStats SemanticVoxelGrid::insert_observation(const Observation& obs,
                                                                     const CameraModel& cam) {
    InsertStats stats;
    const Vec3 cam_pos = obs.pose.position;
    for (int v = 0; v < obs.height; ++v) {
        for (int u = 0; u < obs.width; ++u) {
            if (!obs.depth_valid(u, v)) continue;
            const double d = obs.depth_at(u, v);
            const Vec3 dir_world = obs.pose.orientation * cam.pixel_dir_cam(u, v);
            const Vec3 endpoint = cam_pos + d * dir_world;
            ++stats.rays;

            // The endpoint voxel (if the hit lies inside the grid) gets the
            // occupied update; everything traversed before it is free space.
            int ex, ey, ez;
            const bool end_inside = voxel_at(endpoint, ex, ey, ez);
            const size_t end_idx = end_inside ? index_of(ex, ey, ez) : 0;

            walk_ray(cam_pos, dir_world, d, [&](size_t idx, double) {
                if (end_inside && idx == end_idx) {
                    apply_log_odds(idx, kLogOddsOcc);
                    ++stats.endpoint_updates;
                    const uint8_t label = obs.label_at(u, v);
                    if (label != kNoClass) fuse_class(idx, label, kMaxFusionProb);
                } else {
                    apply_log_odds(idx, kLogOddsFree);
                    ++stats.free_updates;
                }
                return true;
            });
        }
    }
    return stats;
}

double SemanticVoxelGrid::semantic_entropy(size_t idx) const {
    const uint8_t cls = class_[idx];
    if (cls == static_cast<uint8_t>(SemanticClass::Avocado) ||
        cls == static_cast<uint8_t>(SemanticClass::Peduncle))
        return binary_entropy(p_cls_[idx]);
    if (unobserved(idx)) return 1.0;  // maximal uncertainty prior
    return 0.0;  // observed free space or background
}

std::optional<std::pair<size_t, double>> SemanticVoxelGrid::first_occupied_along(
    const Vec3& origin, const Vec3& dir, double max_range) const {
    std::optional<std::pair<size_t, double>> hit;
    walk_ray(origin, dir, max_range, [&](size_t idx, double t_entry) {
        if (occupied(idx)) {
            hit = {idx, t_entry};
            return false;
        }
        return true;
    });
    return hit;
}

void SemanticVoxelGrid::dump(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open map dump file: " + path);

    char header[16];
    std::memcpy(header, "SVXG", 4);
    const uint16_t version = 1;
    const uint16_t w = static_cast<uint16_t>(w_);
    const uint16_t h = static_cast<uint16_t>(h_);
    const uint16_t d = static_cast<uint16_t>(d_);
    const float res = static_cast<float>(res_);
    std::memcpy(header + 4, &version, 2);
    std::memcpy(header + 6, &w, 2);
    std::memcpy(header + 8, &h, 2);
    std::memcpy(header + 10, &d, 2);
    std::memcpy(header + 12, &res, 4);
    out.write(header, sizeof(header));

    std::vector<char> record(10);
    for (size_t idx = 0; idx < log_odds_.size(); ++idx) {
        std::memcpy(record.data(), &log_odds_[idx], 4);
        record[4] = static_cast<char>(class_[idx]);
        std::memcpy(record.data() + 5, &p_cls_[idx], 4);
        record[9] = static_cast<char>(roi_[idx]);
        out.write(record.data(), record.size());
    }
    if (!out) throw Error("failed writing map dump: " + path);
}

}  // namespace gsnbv
