#include "gsnbv/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsnbv/errors.hpp"

namespace gsnbv {

namespace {

bool is_fruit(const Observation& obs, int u, int v) {
    return obs.has_label(u, v, SemanticClass::Avocado);
}

// Clamp a unit vector to at most kMaxAxisTiltRad from +z, rotating it toward
// +z within their common plane so the azimuth is preserved.
Vec3 clamp_axis_tilt(const Vec3& axis) {
    const Vec3 unit = axis.normalized();
    const double cos_tilt = std::clamp(unit.z(), -1.0, 1.0);
    if (std::acos(cos_tilt) <= kMaxAxisTiltRad) return unit;
    const Vec3 horizontal(unit.x(), unit.y(), 0.0);
    const double h = horizontal.norm();
    if (h < 1e-12) return Vec3::UnitZ();  // pointing straight down: no azimuth to keep
    return std::sin(kMaxAxisTiltRad) * (horizontal / h) +
           std::cos(kMaxAxisTiltRad) * Vec3::UnitZ();
}

}  // namespace

Vec3 back_project(const CameraModel& cam, const Viewpoint& pose, int u, int v, double depth) {
    return pose.position + pose.orientation * (cam.pixel_dir_cam(u, v) * depth);
}

CurvePair extract_curves(const Observation& obs, int dilation_px) {
    const int w = obs.width;
    const int h = obs.height;
    std::vector<uint8_t> mask(static_cast<size_t>(w) * h, 0);
    bool any = false;
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            if (is_fruit(obs, u, v)) {
                mask[obs.idx(u, v)] = 1;
                any = true;
            }
    if (!any) throw EmptyMask{};

    const auto in_set = [&](const std::vector<uint8_t>& set, int u, int v) {
        return u >= 0 && u < w && v >= 0 && v < h && set[static_cast<size_t>(v) * w + u];
    };
    const auto is_boundary = [&](const std::vector<uint8_t>& set, int u, int v) {
        for (int dv = -1; dv <= 1; ++dv)
            for (int du = -1; du <= 1; ++du) {
                if (du == 0 && dv == 0) continue;
                if (!in_set(set, u + du, v + dv)) return true;
            }
        return false;
    };

    CurvePair out;
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            if (mask[obs.idx(u, v)] && is_boundary(mask, u, v)) out.contour.push_back({u, v});

    // Dilate by a Euclidean disc, seeding only from contour pixels (interior
    // pixels cannot add anything new).
    std::vector<uint8_t> dilated = mask;
    const int r2 = dilation_px * dilation_px;
    for (const PixelCoord& p : out.contour)
        for (int dv = -dilation_px; dv <= dilation_px; ++dv)
            for (int du = -dilation_px; du <= dilation_px; ++du) {
                if (du * du + dv * dv > r2) continue;
                const int uu = p.u + du;
                const int vv = p.v + dv;
                if (uu >= 0 && uu < w && vv >= 0 && vv < h)
                    dilated[static_cast<size_t>(vv) * w + uu] = 1;
            }

    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            if (dilated[obs.idx(u, v)] && !mask[obs.idx(u, v)] && is_boundary(dilated, u, v))
                out.surrounding.push_back({u, v});
    return out;
}

int discoverability(const Observation& obs) {
    std::vector<PixelCoord> peduncle;
    for (int v = 0; v < obs.height; ++v)
        for (int u = 0; u < obs.width; ++u)
            if (obs.has_label(u, v, SemanticClass::Peduncle)) peduncle.push_back({u, v});
    if (peduncle.empty()) return 0;

    std::vector<uint8_t> fruit(static_cast<size_t>(obs.width) * obs.height, 0);
    bool any_fruit = false;
    for (int v = 0; v < obs.height; ++v)
        for (int u = 0; u < obs.width; ++u)
            if (is_fruit(obs, u, v)) {
                fruit[obs.idx(u, v)] = 1;
                any_fruit = true;
            }
    if (!any_fruit) return 0;

    constexpr int r = kDiscoverabilityRadiusPx;
    for (const PixelCoord& p : peduncle)
        for (int dv = -r; dv <= r; ++dv)
            for (int du = -r; du <= r; ++du) {
                if (du * du + dv * dv > r * r) continue;
                const int uu = p.u + du;
                const int vv = p.v + dv;
                if (uu >= 0 && uu < obs.width && vv >= 0 && vv < obs.height &&
                    fruit[static_cast<size_t>(vv) * obs.width + uu])
                    return 1;
            }
    return 0;
}

double occlusion_rate(const Observation& obs, const std::vector<PixelCoord>& surrounding,
                      double d_fmin, double d_offset) {
    if (surrounding.empty()) throw EmptyCurve{};
    size_t occluding = 0;
    for (const PixelCoord& p : surrounding)
        if (obs.depth_valid(p.u, p.v) && obs.depth_at(p.u, p.v) < d_fmin + d_offset)
            ++occluding;
    return static_cast<double>(occluding) / static_cast<double>(surrounding.size());
}

double picking_score(int s_dis, double s_occ) { return s_dis * (1.0 - s_occ); }

bool pickable(double s_pick) { return s_pick > kPickableThreshold; }

FruitPose estimate_fruit_pose(const Observation& obs, const CameraModel& cam) {
    std::vector<Vec3> points;
    for (int v = 0; v < obs.height; ++v)
        for (int u = 0; u < obs.width; ++u)
            if (is_fruit(obs, u, v) && obs.depth_valid(u, v))
                points.push_back(back_project(cam, obs.pose, u, v, obs.depth_at(u, v)));
    if (points.size() < 2) throw TooFewPoints{};

    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : points) centroid += p;
    centroid /= static_cast<double>(points.size());

    std::vector<double> dist(points.size());
    double mean = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
        dist[i] = (points[i] - centroid).norm();
        mean += dist[i];
    }
    mean /= static_cast<double>(points.size());
    double var = 0.0;
    for (const double d : dist) var += (d - mean) * (d - mean);
    const double sigma = std::sqrt(var / static_cast<double>(points.size()));

    // Keep points within one standard deviation above the mean distance.
    std::vector<const Vec3*> kept;
    for (size_t i = 0; i < points.size(); ++i)
        if (dist[i] <= mean + sigma) kept.push_back(&points[i]);
    if (kept.size() < 2) throw TooFewPoints{};

    FruitPose pose;
    pose.position = Vec3::Zero();
    const Vec3* highest = kept.front();
    const Vec3* lowest = kept.front();
    for (const Vec3* p : kept) {
        pose.position += *p;
        if (p->z() > highest->z()) highest = p;  // strict: ties keep the earliest
        if (p->z() < lowest->z()) lowest = p;
    }
    pose.position /= static_cast<double>(kept.size());

    const Vec3 span = *highest - *lowest;
    pose.axis = span.norm() < 1e-9 ? Vec3(Vec3::UnitZ()) : clamp_axis_tilt(span);
    return pose;
}

FruitPose update_fruit_pose(const FruitPose& prev, const FruitPose& next, double k) {
    FruitPose out;
    out.position = prev.position + k * (next.position - prev.position);
    out.axis = clamp_axis_tilt(prev.axis + k * (next.axis - prev.axis));
    return out;
}

std::vector<Vec3> extract_obstacle_points(const Observation& obs,
                                          const std::vector<PixelCoord>& surrounding,
                                          double d_fmin, const CameraModel& cam) {
    std::vector<Vec3> points;
    for (const PixelCoord& p : surrounding)
        if (obs.depth_valid(p.u, p.v) && obs.depth_at(p.u, p.v) < d_fmin)
            points.push_back(back_project(cam, obs.pose, p.u, p.v, obs.depth_at(p.u, p.v)));
    return points;
}

SensingResult analyze_observation(const Observation& obs, const CameraModel& cam,
                                  int dilation_px) {
    SensingResult result;
    result.report.s_dis = discoverability(obs);
    result.report.d_fmin = std::numeric_limits<double>::quiet_NaN();

    double d_fmin = std::numeric_limits<double>::infinity();
    for (int v = 0; v < obs.height; ++v)
        for (int u = 0; u < obs.width; ++u)
            if (is_fruit(obs, u, v) && obs.depth_valid(u, v))
                d_fmin = std::min(d_fmin, obs.depth_at(u, v));
    result.fruit_visible = std::isfinite(d_fmin);

    if (result.fruit_visible) {
        result.report.d_fmin = d_fmin;
        result.curves = extract_curves(obs, dilation_px);
        if (!result.curves.surrounding.empty()) {
            result.report.s_occ = occlusion_rate(obs, result.curves.surrounding, d_fmin);
            result.obstacle_points =
                extract_obstacle_points(obs, result.curves.surrounding, d_fmin, cam);
        }
    }
    result.report.s_pick = picking_score(result.report.s_dis, result.report.s_occ);
    return result;
}

}  // namespace gsnbv
