#pragma once

#include <numbers>
#include <vector>

#include "gsnbv/scene.hpp"

namespace gsnbv {

struct PixelCoord {
    int u = 0;
    int v = 0;
    bool operator==(const PixelCoord&) const = default;
};

// Fruit contour and its dilated surrounding curve, in pixel coordinates.
struct CurvePair {
    std::vector<PixelCoord> contour;      // boundary pixels of the fruit mask
    std::vector<PixelCoord> surrounding;  // ring around the dilated mask, outside the mask
};

struct PickReport {
    int s_dis = 0;        // 0/1 discoverability
    double s_occ = 0.0;   // occlusion rate over the surrounding curve
    double s_pick = 0.0;  // s_dis * (1 - s_occ)
    double d_fmin = 0.0;  // minimum valid depth over fruit-mask pixels (m)
};

inline constexpr double kOcclusionDepthOffset = 0.06;  // m behind d_fmin still occluding
inline constexpr double kPickableThreshold = 0.9;      // strict: pickable iff s_pick > 0.9
inline constexpr int kDiscoverabilityRadiusPx = 5;
inline constexpr int kDefaultDilationPx = 3;
inline constexpr double kMaxAxisTiltRad = 30.0 * std::numbers::pi / 180.0;
inline constexpr double kPoseBlendFactor = 0.7;

// World-frame point for pixel (u, v) at along-ray distance `depth`.
Vec3 back_project(const CameraModel& cam, const Viewpoint& pose, int u, int v, double depth);

// Contour = mask pixels with an 8-neighbour outside the mask. Surrounding =
// boundary of the mask dilated by a Euclidean disc of radius dilation_px,
// keeping only pixels outside the original mask. Throws EmptyMask.
CurvePair extract_curves(const Observation& obs, int dilation_px = kDefaultDilationPx);

// 1 iff both fruit and peduncle pixels exist and their minimum pairwise
// Euclidean pixel distance is <= 5 (overlap counts as 0 distance).
int discoverability(const Observation& obs);

// Fraction of surrounding-curve pixels measurably in front of the fruit:
// valid depth < d_fmin + d_offset. Invalid depths never count as occluding.
// Throws EmptyCurve.
double occlusion_rate(const Observation& obs, const std::vector<PixelCoord>& surrounding,
                      double d_fmin, double d_offset = kOcclusionDepthOffset);

double picking_score(int s_dis, double s_occ);
bool pickable(double s_pick);

// Back-projects valid-depth fruit pixels, drops points farther than one
// standard deviation above the mean distance to the raw centroid, averages
// the survivors, and takes the axis from the extreme-height survivors.
// The axis is clamped to at most 30 degrees from world +z, preserving
// azimuth. Throws TooFewPoints (< 2 usable pixels).
FruitPose estimate_fruit_pose(const Observation& obs, const CameraModel& cam);

// prev + k * (next - prev), axis renormalized and re-clamped.
FruitPose update_fruit_pose(const FruitPose& prev, const FruitPose& next,
                            double k = kPoseBlendFactor);

// World points for surrounding-curve pixels with valid depth strictly less
// than d_fmin. The caller owns accumulation across iterations.
std::vector<Vec3> extract_obstacle_points(const Observation& obs,
                                          const std::vector<PixelCoord>& surrounding,
                                          double d_fmin, const CameraModel& cam);

// One-shot analysis used by the planners: curves, scores, obstacle points.
struct SensingResult {
    bool fruit_visible = false;  // any valid-depth fruit pixel
    CurvePair curves;
    PickReport report;
    std::vector<Vec3> obstacle_points;
};

SensingResult analyze_observation(const Observation& obs, const CameraModel& cam,
                                  int dilation_px = kDefaultDilationPx);

}  // namespace gsnbv
