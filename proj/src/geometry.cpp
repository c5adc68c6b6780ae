#include "gsnbv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gsnbv {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_angle(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w;
}

double signed_angle_diff(double a, double b) {
    double d = wrap_angle(a - b);
    if (d > std::numbers::pi) d -= kTwoPi;
    return d;
}

Quat look_at_quaternion(const Vec3& from, const Vec3& target, const Vec3& up_hint) {
    const Vec3 delta = target - from;
    if (delta.norm() <= 1e-6) throw DegenerateDirection{};
    const Vec3 forward = delta.normalized();

    Vec3 up = up_hint;
    if (forward.cross(up).norm() < 1e-9) up = Vec3::UnitX();

    const Vec3 right = forward.cross(up).normalized();
    const Vec3 down = forward.cross(right);

    Eigen::Matrix3d rot;
    rot.col(0) = right;
    rot.col(1) = down;
    rot.col(2) = forward;
    return Quat(rot).normalized();
}

PickingRing::PickingRing(const Vec3& center, const Vec3& normal, double radius)
    : center_(center), normal_(normal.normalized()), radius_(radius) {
    if (!(radius > 0.0)) throw Error("picking ring radius must be positive");
    // theta = 0 along world +x projected into the ring plane; +y if degenerate.
    Vec3 ref = Vec3::UnitX();
    Vec3 u = ref - ref.dot(normal_) * normal_;
    if (u.norm() < 1e-9) {
        ref = Vec3::UnitY();
        u = ref - ref.dot(normal_) * normal_;
    }
    u_ = u.normalized();
    v_ = normal_.cross(u_);
}

Vec3 PickingRing::point_at(double theta) const {
    return center_ + radius_ * (std::cos(theta) * u_ + std::sin(theta) * v_);
}

double PickingRing::bearing_of(const Vec3& p) const {
    const Vec3 w = p - center_;
    const Vec3 in_plane = w - w.dot(normal_) * normal_;
    if (in_plane.norm() <= 1e-9) throw OnAxis{};
    return wrap_angle(std::atan2(in_plane.dot(v_), in_plane.dot(u_)));
}

PickingRing ring_from_pose(const FruitPose& f, double radius) {
    return PickingRing(f.position, f.axis, radius);
}

ArcSet ArcSet::full_circle() {
    ArcSet s;
    s.intervals_.push_back({0.0, kTwoPi});
    return s;
}

ArcSet ArcSet::sector(double center, double width) {
    if (width >= kTwoPi) return full_circle();
    ArcSet s = full_circle();
    // Remove the complement of [center - width/2, center + width/2].
    s.subtract(center + width / 2.0, center - width / 2.0 + kTwoPi);
    return s;
}

double ArcSet::measure() const {
    double m = 0.0;
    for (const auto& iv : intervals_) m += iv.hi - iv.lo;
    return m;
}

bool ArcSet::contains(double theta) const {
    const double t = wrap_angle(theta);
    for (const auto& iv : intervals_) {
        if (t >= iv.lo && t < iv.hi) return true;
    }
    // 2*pi wraps to 0, which belongs to an interval ending at 2*pi.
    if (t == 0.0) {
        for (const auto& iv : intervals_) {
            if (iv.hi == kTwoPi) return true;
        }
    }
    return false;
}

void ArcSet::subtract(double start, double end) {
    if (end < start) std::swap(start, end);
    if (end - start >= kTwoPi) {
        intervals_.clear();
        return;
    }
    const double lo = wrap_angle(start);
    const double hi = lo + (end - start);
    if (hi <= kTwoPi) {
        subtract_canonical(lo, hi);
    } else {
        subtract_canonical(lo, kTwoPi);
        subtract_canonical(0.0, hi - kTwoPi);
    }
}

void ArcSet::subtract_canonical(double lo, double hi) {
    if (hi <= lo) return;
    std::vector<ArcInterval> out;
    out.reserve(intervals_.size() + 1);
    for (const auto& iv : intervals_) {
        if (iv.hi <= lo || iv.lo >= hi) {
            out.push_back(iv);
            continue;
        }
        if (iv.lo < lo) out.push_back({iv.lo, lo});
        if (iv.hi > hi) out.push_back({hi, iv.hi});
    }
    intervals_ = std::move(out);
}

void ArcSet::add(double start, double end) {
    if (end < start) std::swap(start, end);
    if (end - start >= kTwoPi) {
        *this = full_circle();
        return;
    }
    const double lo = wrap_angle(start);
    const double hi = lo + (end - start);
    if (hi <= kTwoPi) {
        add_canonical(lo, hi);
    } else {
        add_canonical(lo, kTwoPi);
        add_canonical(0.0, hi - kTwoPi);
    }
}

void ArcSet::add_canonical(double lo, double hi) {
    if (hi <= lo) return;
    std::vector<ArcInterval> out;
    out.reserve(intervals_.size() + 1);
    for (const auto& iv : intervals_) {
        if (iv.hi < lo || iv.lo > hi) {
            out.push_back(iv);
        } else {  // overlapping or touching: absorb into the new interval
            lo = std::min(lo, iv.lo);
            hi = std::max(hi, iv.hi);
        }
    }
    out.push_back({lo, hi});
    std::sort(out.begin(), out.end(),
              [](const ArcInterval& a, const ArcInterval& b) { return a.lo < b.lo; });
    intervals_ = std::move(out);
}

ArcSet subtract_interval(ArcSet arcs, double start, double end) {
    arcs.subtract(start, end);
    return arcs;
}

std::vector<double> uniform_equidistant_sample(const ArcSet& arcs, int n) {
    const double total = arcs.measure();
    if (!(total > 0.0) || n < 1) throw EmptySamplingSpace{};
    std::vector<double> samples;
    samples.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double s = total * (i + 0.5) / n;
        for (const auto& iv : arcs.intervals()) {
            const double len = iv.hi - iv.lo;
            if (s < len) {
                samples.push_back(iv.lo + s);
                break;
            }
            s -= len;
        }
    }
    return samples;
}

}  // namespace gsnbv
