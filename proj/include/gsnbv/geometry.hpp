#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <vector>

#include "gsnbv/errors.hpp"

namespace gsnbv {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// Camera pose: position + unit quaternion (seven numbers).
/// Camera frame convention: x right, y down, z forward (optical axis).
struct Viewpoint {
    Vec3 position{Vec3::Zero()};
    Quat orientation{Quat::Identity()};
};

/// Estimated fruit pose: position and unit axis (gravity-clamped by perception).
struct FruitPose {
    Vec3 position{Vec3::Zero()};
    Vec3 axis{Vec3::UnitZ()};
};

/// Wrap an angle to [0, 2*pi).
double wrap_angle(double a);

/// Signed angular difference a - b wrapped to (-pi, pi].
double signed_angle_diff(double a, double b);

/// Quaternion rotating camera-forward (+z) onto normalize(target - from),
/// roll resolved by up_hint (falls back to world +x when direction is
/// parallel to up_hint).
///
/// Throws DegenerateDirection if |target - from| <= 1e-6.
Quat look_at_quaternion(const Vec3& from, const Vec3& target,
                        const Vec3& up_hint = Vec3::UnitZ());

/// Circle of candidate camera positions around the fruit, in the plane
/// normal to the fruit axis. Angles are measured from world +x projected
/// into the ring plane, counterclockwise about the normal.
class PickingRing {
public:
    PickingRing(const Vec3& center, const Vec3& normal, double radius);

    const Vec3& center() const { return center_; }
    const Vec3& normal() const { return normal_; }
    double radius() const { return radius_; }

    /// Point on the ring at angle theta.
    Vec3 point_at(double theta) const;

    /// Angle of the closest ring point to p. Throws OnAxis when the
    /// in-plane component of p - center is below 1e-9.
    double bearing_of(const Vec3& p) const;

private:
    Vec3 center_;
    Vec3 normal_;
    Vec3 u_, v_;  // in-plane orthonormal basis, u at theta = 0
    double radius_;
};

PickingRing ring_from_pose(const FruitPose& f, double radius);

struct ArcInterval {
    double lo, hi;  // 0 <= lo < hi <= 2*pi
};

/// Union of disjoint angular intervals on a ring, kept sorted and canonical.
class ArcSet {
public:
    ArcSet() = default;

    static ArcSet full_circle();
    /// Sector of the given width centered at `center` (may wrap through 0).
    static ArcSet sector(double center, double width);

    bool empty() const { return intervals_.empty(); }
    double measure() const;
    bool contains(double theta) const;

    /// Remove the counterclockwise interval from `start` to `end`
    /// (end >= start; spans >= 2*pi clear the set).
    void subtract(double start, double end);

    /// Union with the counterclockwise interval from `start` to `end`
    /// (end >= start; spans >= 2*pi fill the circle).
    void add(double start, double end);

    const std::vector<ArcInterval>& intervals() const { return intervals_; }

private:
    void subtract_canonical(double lo, double hi);
    void add_canonical(double lo, double hi);
    std::vector<ArcInterval> intervals_;
};

ArcSet subtract_interval(ArcSet arcs, double start, double end);

/// n angles at arc-length fractions (i + 0.5)/n of the remaining measure,
/// mapped through the interval list in order. Throws EmptySamplingSpace.
std::vector<double> uniform_equidistant_sample(const ArcSet& arcs, int n);

}  // namespace gsnbv
