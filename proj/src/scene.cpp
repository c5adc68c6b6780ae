#include "gsnbv/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace gsnbv {

namespace {

constexpr double kTMin = 1e-12;

std::optional<double> min_positive(double t0, double t1) {
    double best = std::numeric_limits<double>::infinity();
    if (t0 > kTMin) best = std::min(best, t0);
    if (t1 > kTMin) best = std::min(best, t1);
    if (std::isinf(best)) return std::nullopt;
    return best;
}

// Orthonormal frame whose z column is `axis`.
Eigen::Matrix3d frame_from_axis(const Vec3& axis) {
    const Vec3 w = axis.normalized();
    Vec3 ref = std::abs(w.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 u = (ref - ref.dot(w) * w).normalized();
    const Vec3 v = w.cross(u);
    Eigen::Matrix3d m;
    m.col(0) = u;
    m.col(1) = v;
    m.col(2) = w;
    return m;
}

std::optional<double> intersect_ellipsoid(const Ray& ray, const Ellipsoid& e) {
    const Eigen::Matrix3d rot = frame_from_axis(e.axis);
    const Vec3 inv_s(1.0 / e.semi_axes.x(), 1.0 / e.semi_axes.y(), 1.0 / e.semi_axes.z());
    const Vec3 o = inv_s.cwiseProduct(rot.transpose() * (ray.origin - e.center));
    const Vec3 d = inv_s.cwiseProduct(rot.transpose() * ray.direction);
    const double a = d.squaredNorm();
    const double b = 2.0 * o.dot(d);
    const double c = o.squaredNorm() - 1.0;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0 || a == 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    return min_positive((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a));
}

std::optional<double> intersect_disc(const Ray& ray, const Disc& disc) {
    const Vec3 n = disc.normal.normalized();
    const double denom = ray.direction.dot(n);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    const double t = (disc.center - ray.origin).dot(n) / denom;
    if (t <= kTMin) return std::nullopt;
    const Vec3 p = ray.origin + t * ray.direction;
    if ((p - disc.center).norm() > disc.radius) return std::nullopt;
    return t;
}

std::optional<double> intersect_cylinder(const Ray& ray, const Cylinder& cyl) {
    const Vec3 w = cyl.axis.normalized();
    const Vec3 oq = ray.origin - cyl.base;
    const Vec3 alpha = ray.direction - ray.direction.dot(w) * w;
    const Vec3 beta = oq - oq.dot(w) * w;

    double best = std::numeric_limits<double>::infinity();

    const double a = alpha.squaredNorm();
    if (a > 1e-18) {
        const double b = 2.0 * alpha.dot(beta);
        const double c = beta.squaredNorm() - cyl.radius * cyl.radius;
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            for (const double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
                if (t <= kTMin) continue;
                const double s = (oq + t * ray.direction).dot(w);
                if (s >= 0.0 && s <= cyl.height && t < best) best = t;
            }
        }
    }

    // End caps.
    for (const double cap_s : {0.0, cyl.height}) {
        Disc cap;
        cap.center = cyl.base + cap_s * w;
        cap.normal = w;
        cap.radius = cyl.radius;
        if (const auto t = intersect_disc(ray, cap); t && *t < best) best = *t;
    }

    if (std::isinf(best)) return std::nullopt;
    return best;
}

std::optional<double> intersect_box(const Ray& ray, const Box& box) {
    const Eigen::Matrix3d rot = box.rotation.toRotationMatrix();
    const Vec3 o = rot.transpose() * (ray.origin - box.center);
    const Vec3 d = rot.transpose() * ray.direction;
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        const double h = box.half_extents[k];
        if (std::abs(d[k]) < 1e-15) {
            if (o[k] < -h || o[k] > h) return std::nullopt;
            continue;
        }
        double ta = (-h - o[k]) / d[k];
        double tb = (h - o[k]) / d[k];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return std::nullopt;
    }
    return min_positive(t0, t1);
}

}  // namespace

std::optional<double> intersect(const Ray& ray, const Primitive& prim) {
    return std::visit(
        [&](const auto& shape) -> std::optional<double> {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, Ellipsoid>) return intersect_ellipsoid(ray, shape);
            if constexpr (std::is_same_v<T, Cylinder>) return intersect_cylinder(ray, shape);
            if constexpr (std::is_same_v<T, Disc>) return intersect_disc(ray, shape);
            if constexpr (std::is_same_v<T, Box>) return intersect_box(ray, shape);
        },
        prim.shape);
}

void Scene::validate() const {
    int n_avocado = 0;
    int n_peduncle = 0;
    const Ellipsoid* fruit = nullptr;
    const Cylinder* peduncle = nullptr;
    for (const auto& prim : primitives) {
        std::visit(
            [](const auto& shape) {
                using T = std::decay_t<decltype(shape)>;
                if constexpr (std::is_same_v<T, Ellipsoid>) {
                    if (!(shape.semi_axes.minCoeff() > 0.0))
                        throw Error("ellipsoid semi-axes must be positive");
                } else if constexpr (std::is_same_v<T, Cylinder>) {
                    if (!(shape.radius > 0.0 && shape.height > 0.0))
                        throw Error("cylinder radius/height must be positive");
                } else if constexpr (std::is_same_v<T, Disc>) {
                    if (!(shape.radius > 0.0)) throw Error("disc radius must be positive");
                } else if constexpr (std::is_same_v<T, Box>) {
                    if (!(shape.half_extents.minCoeff() > 0.0))
                        throw Error("box half-extents must be positive");
                }
            },
            prim.shape);
        if (prim.cls == SemanticClass::Avocado) {
            ++n_avocado;
            fruit = std::get_if<Ellipsoid>(&prim.shape);
        } else if (prim.cls == SemanticClass::Peduncle) {
            ++n_peduncle;
            peduncle = std::get_if<Cylinder>(&prim.shape);
        }
    }
    if (n_avocado != 1 || n_peduncle != 1)
        throw Error("scene must contain exactly one avocado and one peduncle");
    if (fruit && peduncle) {
        const Vec3 fruit_top =
            fruit->center + fruit->semi_axes.z() * fruit->axis.normalized();
        if ((peduncle->base - fruit_top).norm() > 1e-6)
            throw Error("peduncle base must touch the fruit top");
    }
}

CameraModel CameraModel::from_hfov(int width, int height, double hfov_rad,
                                   double near_clip, double far_clip) {
    CameraModel cam;
    cam.width = width;
    cam.height = height;
    cam.fx = (width / 2.0) / std::tan(hfov_rad / 2.0);
    cam.fy = cam.fx;
    cam.cx = width / 2.0;
    cam.cy = height / 2.0;
    cam.near_clip = near_clip;
    cam.far_clip = far_clip;
    if (!(near_clip < far_clip)) throw Error("camera near clip must be below far clip");
    return cam;
}

Vec3 CameraModel::pixel_dir_cam(int u, int v) const {
    return Vec3((u - cx) / fx, (v - cy) / fy, 1.0).normalized();
}

Observation render(const Scene& scene, const CameraModel& camera, const Viewpoint& pose) {
    Observation obs;
    obs.width = camera.width;
    obs.height = camera.height;
    obs.depth.assign(static_cast<size_t>(camera.width) * camera.height, -1.0);
    obs.semantic.assign(obs.depth.size(), kNoClass);
    obs.pose = pose;

    const Eigen::Matrix3d rot = pose.orientation.toRotationMatrix();
    for (int v = 0; v < camera.height; ++v) {
        for (int u = 0; u < camera.width; ++u) {
            Ray ray;
            ray.origin = pose.position;
            ray.direction = rot * camera.pixel_dir_cam(u, v);
            double best = std::numeric_limits<double>::infinity();
            SemanticClass best_cls = SemanticClass::Background;
            for (const auto& prim : scene.primitives) {
                if (const auto t = intersect(ray, prim); t && *t < best) {
                    best = *t;
                    best_cls = prim.cls;
                }
            }
            if (std::isinf(best)) continue;
            if (best < camera.near_clip || best > camera.far_clip) continue;
            const size_t i = obs.idx(u, v);
            obs.depth[i] = best;
            obs.semantic[i] = static_cast<uint8_t>(best_cls);
        }
    }
    return obs;
}

Observation apply_mask_noise(Observation obs, double dropout_rate, std::mt19937_64& rng) {
    if (dropout_rate <= 0.0) return obs;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& label : obs.semantic) {
        if (label == kNoClass) continue;
        if (u(rng) < dropout_rate) label = kNoClass;
    }
    return obs;
}

void write_depth_pgm(const Observation& obs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "P5\n" << obs.width << " " << obs.height << "\n65535\n";
    for (const double d : obs.depth) {
        uint16_t mm = 0;
        if (d >= 0.0) mm = static_cast<uint16_t>(std::min(65535.0, std::round(d * 1000.0)));
        const unsigned char bytes[2] = {static_cast<unsigned char>(mm >> 8),
                                        static_cast<unsigned char>(mm & 0xff)};
        out.write(reinterpret_cast<const char*>(bytes), 2);
    }
    if (!out) throw Error("failed writing " + path);
}

void write_semantic_pgm(const Observation& obs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "P5\n" << obs.width << " " << obs.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(obs.semantic.data()),
              static_cast<std::streamsize>(obs.semantic.size()));
    if (!out) throw Error("failed writing " + path);
}

}  // namespace gsnbv
