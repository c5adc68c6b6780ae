#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "gsnbv/geometry.hpp"

namespace gsnbv {

enum class SemanticClass : uint8_t { Background = 0, Avocado = 1, Peduncle = 2 };

/// Sentinel for "no semantic label" in mask storage.
constexpr uint8_t kNoClass = 255;

struct Ellipsoid {
    Vec3 center;
    Vec3 semi_axes;              // (a, b, c), all positive
    Vec3 axis{Vec3::UnitZ()};    // direction of the c semi-axis
};

struct Cylinder {
    Vec3 base;
    Vec3 axis{Vec3::UnitZ()};    // unit, from base toward the cap
    double radius = 0.0;
    double height = 0.0;
};

struct Disc {
    Vec3 center;
    Vec3 normal{Vec3::UnitZ()};
    double radius = 0.0;
};

struct Box {
    Vec3 center;
    Vec3 half_extents;
    Quat rotation{Quat::Identity()};
};

struct Primitive {
    std::variant<Ellipsoid, Cylinder, Disc, Box> shape;
    SemanticClass cls = SemanticClass::Background;
};

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit
};

/// Smallest t > 0 with origin + t*direction on the primitive surface.
std::optional<double> intersect(const Ray& ray, const Primitive& prim);

struct Scene {
    std::vector<Primitive> primitives;
    FruitPose fruit_truth;
    Vec3 workspace_min{Vec3::Zero()};
    Vec3 workspace_max{Vec3::Zero()};

    /// Checks the scene invariants: exactly one avocado and one peduncle
    /// primitive, positive extents, peduncle base on the fruit top.
    void validate() const;
};

struct CameraModel {
    int width = 640;
    int height = 480;
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    double near_clip = 0.03;
    double far_clip = 0.72;

    static CameraModel from_hfov(int width, int height, double hfov_rad,
                                 double near_clip = 0.03, double far_clip = 0.72);

    /// Unit ray direction through pixel (u, v) in the camera frame
    /// (x right, y down, z forward). The principal point sits at integer
    /// pixel (width/2, height/2) so the center pixel is exactly on-axis.
    Vec3 pixel_dir_cam(int u, int v) const;
};

/// Depth + semantic mask from one sensing step. Depth is along-ray
/// distance in meters; negative means no valid return at that pixel.
struct Observation {
    int width = 0;
    int height = 0;
    std::vector<double> depth;
    std::vector<uint8_t> semantic;  // SemanticClass value or kNoClass
    Viewpoint pose;

    size_t idx(int u, int v) const { return static_cast<size_t>(v) * width + u; }
    bool depth_valid(int u, int v) const { return depth[idx(u, v)] >= 0.0; }
    double depth_at(int u, int v) const { return depth[idx(u, v)]; }
    uint8_t label_at(int u, int v) const { return semantic[idx(u, v)]; }
    bool has_label(int u, int v, SemanticClass c) const {
        return semantic[idx(u, v)] == static_cast<uint8_t>(c);
    }
};

/// Per-pixel nearest-hit raycast with [near, far] depth clipping. Pixels
/// whose nearest hit falls outside the clip band are invalid; the semantic
/// label is the class of the nearest hit wherever depth is valid.
Observation render(const Scene& scene, const CameraModel& camera, const Viewpoint& pose);

/// Independently reset each labeled pixel to no-class with probability
/// dropout_rate. Depth is untouched.
Observation apply_mask_noise(Observation obs, double dropout_rate, std::mt19937_64& rng);

/// 16-bit PGM, millimeter-quantized depth (invalid pixels = 0).
void write_depth_pgm(const Observation& obs, const std::string& path);

/// 8-bit PGM index map of the semantic mask (255 = unlabeled).
void write_semantic_pgm(const Observation& obs, const std::string& path);

}  // namespace gsnbv
