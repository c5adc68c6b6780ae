#include "gsnbv/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "gsnbv/errors.hpp"

namespace gsnbv {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

// Ground-truth fruit geometry shared by the builtin scenarios.
const Vec3 kFruitCenter(0.01, -0.36, 0.559);
const Vec3 kFruitSemiAxes(0.04, 0.04, 0.06);

void set_workspace(Scene& scene) {
    scene.workspace_min = scene.fruit_truth.position - 0.5 * kGridExtentM;
    scene.workspace_max = scene.fruit_truth.position + 0.5 * kGridExtentM;
}

Primitive make_fruit(const Vec3& center, const Vec3& semi_axes, const Vec3& axis) {
    Ellipsoid e;
    e.center = center;
    e.semi_axes = semi_axes;
    e.axis = axis;
    return Primitive{e, SemanticClass::Avocado};
}

Primitive make_peduncle(const Vec3& fruit_center, const Vec3& fruit_axis,
                        double fruit_c_semi) {
    Cylinder c;
    c.base = fruit_center + fruit_c_semi * fruit_axis;
    c.axis = fruit_axis;
    c.radius = 0.004;
    c.height = 0.05;
    return Primitive{c, SemanticClass::Peduncle};
}

Primitive leaf_disc(const Vec3& center, const Vec3& normal, double radius) {
    Disc d;
    d.center = center;
    d.normal = normal.normalized();
    d.radius = radius;
    return Primitive{d, SemanticClass::Background};
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw Error("expected a 3-element array");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json quat_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

Quat quat_from(const json& j) {
    if (!j.is_array() || j.size() != 4) throw Error("expected a 4-element quaternion");
    return Quat(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                j[3].get<double>());
}

std::string class_name(SemanticClass c) {
    switch (c) {
        case SemanticClass::Avocado: return "avocado";
        case SemanticClass::Peduncle: return "peduncle";
        default: return "background";
    }
}

SemanticClass class_from(const std::string& s) {
    if (s == "avocado") return SemanticClass::Avocado;
    if (s == "peduncle") return SemanticClass::Peduncle;
    if (s == "background") return SemanticClass::Background;
    throw Error("unknown semantic class: " + s);
}

json occluder_json(const Primitive& prim) {
    json j;
    j["class"] = class_name(prim.cls);
    if (const auto* d = std::get_if<Disc>(&prim.shape)) {
        j["type"] = "disc";
        j["center"] = vec_json(d->center);
        j["normal"] = vec_json(d->normal);
        j["radius"] = d->radius;
    } else if (const auto* b = std::get_if<Box>(&prim.shape)) {
        j["type"] = "box";
        j["center"] = vec_json(b->center);
        j["half_extents"] = vec_json(b->half_extents);
        j["rotation"] = quat_json(b->rotation);
    } else if (const auto* c = std::get_if<Cylinder>(&prim.shape)) {
        j["type"] = "cylinder";
        j["base"] = vec_json(c->base);
        j["axis"] = vec_json(c->axis);
        j["radius"] = c->radius;
        j["height"] = c->height;
    } else if (const auto* e = std::get_if<Ellipsoid>(&prim.shape)) {
        j["type"] = "ellipsoid";
        j["center"] = vec_json(e->center);
        j["semi_axes"] = vec_json(e->semi_axes);
        j["axis"] = vec_json(e->axis);
    }
    return j;
}

Primitive occluder_from(const json& j) {
    Primitive prim;
    prim.cls = class_from(j.at("class").get<std::string>());
    const std::string type = j.at("type").get<std::string>();
    if (type == "disc") {
        Disc d;
        d.center = vec_from(j.at("center"));
        d.normal = vec_from(j.at("normal"));
        d.radius = j.at("radius").get<double>();
        prim.shape = d;
    } else if (type == "box") {
        Box b;
        b.center = vec_from(j.at("center"));
        b.half_extents = vec_from(j.at("half_extents"));
        if (j.contains("rotation")) b.rotation = quat_from(j.at("rotation"));
        prim.shape = b;
    } else if (type == "cylinder") {
        Cylinder c;
        c.base = vec_from(j.at("base"));
        c.axis = vec_from(j.at("axis"));
        c.radius = j.at("radius").get<double>();
        c.height = j.at("height").get<double>();
        prim.shape = c;
    } else if (type == "ellipsoid") {
        Ellipsoid e;
        e.center = vec_from(j.at("center"));
        e.semi_axes = vec_from(j.at("semi_axes"));
        e.axis = vec_from(j.at("axis"));
        prim.shape = e;
    } else {
        throw Error("unknown occluder type: " + type);
    }
    return prim;
}

json config_json(const PlannerConfig& cfg) {
    json j;
    j["ring_radius"] = cfg.ring_radius;
    j["sector_rad"] = cfg.sector_rad;
    j["n_candidates"] = cfg.n_candidates;
    j["lambda"] = cfg.lambda;
    j["dissimilarity_radius"] = cfg.dissimilarity_radius;
    j["min_utility"] = cfg.min_utility;
    j["max_iterations"] = cfg.max_iterations;
    j["blend_k"] = cfg.blend_k;
    j["gain_ray_stride"] = cfg.gain_ray_stride;
    j["dilation_px"] = cfg.dilation_px;
    j["mask_dropout"] = cfg.mask_dropout;
    return j;
}

void apply_config(const json& j, PlannerConfig& cfg) {
    if (j.contains("ring_radius")) cfg.ring_radius = j["ring_radius"].get<double>();
    if (j.contains("sector_rad")) cfg.sector_rad = j["sector_rad"].get<double>();
    else if (j.contains("sector_deg"))
        cfg.sector_rad = j["sector_deg"].get<double>() * kPi / 180.0;
    if (j.contains("n_candidates")) cfg.n_candidates = j["n_candidates"].get<int>();
    if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
    if (j.contains("dissimilarity_radius"))
        cfg.dissimilarity_radius = j["dissimilarity_radius"].get<double>();
    if (j.contains("min_utility")) cfg.min_utility = j["min_utility"].get<double>();
    if (j.contains("max_iterations")) cfg.max_iterations = j["max_iterations"].get<int>();
    if (j.contains("blend_k")) cfg.blend_k = j["blend_k"].get<double>();
    if (j.contains("gain_ray_stride")) cfg.gain_ray_stride = j["gain_ray_stride"].get<int>();
    if (j.contains("dilation_px")) cfg.dilation_px = j["dilation_px"].get<int>();
    if (j.contains("mask_dropout")) cfg.mask_dropout = j["mask_dropout"].get<double>();
}

size_t count_fruit_pixels(const Scene& scene, const CameraModel& cam,
                          const Viewpoint& pose) {
    const Observation obs = render(scene, cam, pose);
    size_t n = 0;
    for (const uint8_t s : obs.semantic)
        if (s == static_cast<uint8_t>(SemanticClass::Avocado)) ++n;
    return n;
}

}  // namespace

Viewpoint Scenario::initial_viewpoint() const {
    Viewpoint vp;
    vp.position = initial_position;
    vp.orientation = look_at_quaternion(initial_position, initial_target);
    return vp;
}

Scenario builtin_group1() {
    Scenario s;
    s.name = "group1";
    s.camera = CameraModel::from_hfov(640, 480, 69.0 * kPi / 180.0);

    s.scene.fruit_truth.position = kFruitCenter;
    s.scene.fruit_truth.axis = Vec3::UnitZ();
    set_workspace(s.scene);

    s.scene.primitives.push_back(make_fruit(kFruitCenter, kFruitSemiAxes, Vec3::UnitZ()));
    s.scene.primitives.push_back(
        make_peduncle(kFruitCenter, Vec3::UnitZ(), kFruitSemiAxes.z()));

    // Trunk behind the fruit, outside the reachable sector.
    {
        Cylinder trunk;
        trunk.base = Vec3(0.01, -0.46, 0.16);
        trunk.axis = Vec3::UnitZ();
        trunk.radius = 0.02;
        trunk.height = 0.8;
        s.scene.primitives.push_back(Primitive{trunk, SemanticClass::Background});
    }

    // Leaf cluster in front of the fruit (between the initial camera and the
    // fruit); sizes and offsets calibrated so the initial view keeps roughly
    // 28% of the unoccluded fruit pixels.
    s.scene.primitives.push_back(
        leaf_disc(Vec3(-0.005, -0.30, 0.585), Vec3::UnitY(), 0.028));
    s.scene.primitives.push_back(
        leaf_disc(Vec3(0.040, -0.30, 0.545), Vec3::UnitY(), 0.0265));
    s.scene.primitives.push_back(
        leaf_disc(Vec3(-0.010, -0.30, 0.520), Vec3::UnitY(), 0.0245));

    s.initial_position = Vec3(0.01, -0.15, 0.559);
    s.initial_target = kFruitCenter;
    return s;
}

Scenario builtin_group2() {
    Scenario s = builtin_group1();
    s.name = "group2";
    // Board east of the plant: blocks the fruit from every ring pose in the
    // rightmost quarter of the sector while leaving ring poses themselves free.
    Box board;
    board.center = Vec3(0.10, -0.36, 0.58);
    board.half_extents = Vec3(0.005, 0.15, 0.12);
    s.scene.primitives.push_back(Primitive{board, SemanticClass::Background});
    return s;
}

Scenario random_scenario(uint64_t seed, int n_leaves, double leaf_radius_min,
                         double leaf_radius_max) {
    if (n_leaves < 0) throw Error("n_leaves must be non-negative");
    if (!(leaf_radius_min > 0.0) || leaf_radius_max < leaf_radius_min)
        throw Error("invalid leaf radius range");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.03, 0.03);
    std::uniform_real_distribution<double> lx(-0.06, 0.06);
    std::uniform_real_distribution<double> ly(0.04, 0.09);
    std::uniform_real_distribution<double> lz(-0.07, 0.07);
    std::uniform_real_distribution<double> lr(leaf_radius_min, leaf_radius_max);
    std::uniform_real_distribution<double> tilt(-0.3, 0.3);

    Scenario s;
    std::ostringstream name;
    name << "random-" << seed << "-" << n_leaves;
    s.name = name.str();
    s.camera = CameraModel::from_hfov(640, 480, 69.0 * kPi / 180.0);

    // Sequenced draws: argument evaluation order would not be portable.
    const double jx = jitter(rng);
    const double jy = jitter(rng);
    const double jz = jitter(rng);
    const Vec3 fruit = kFruitCenter + Vec3(jx, jy, jz);
    s.scene.fruit_truth.position = fruit;
    s.scene.fruit_truth.axis = Vec3::UnitZ();
    set_workspace(s.scene);
    s.scene.primitives.push_back(make_fruit(fruit, kFruitSemiAxes, Vec3::UnitZ()));
    s.scene.primitives.push_back(make_peduncle(fruit, Vec3::UnitZ(), kFruitSemiAxes.z()));

    for (int i = 0; i < n_leaves; ++i) {
        const double cx = lx(rng);
        const double cy = ly(rng);
        const double cz = lz(rng);
        const double tx = tilt(rng);
        const double tz = tilt(rng);
        const double radius = lr(rng);
        s.scene.primitives.push_back(leaf_disc(
            fruit + Vec3(cx, cy, cz), Vec3(tx, 1.0, tz).normalized(), radius));
    }

    s.initial_position = fruit + Vec3(0.0, 0.21, 0.0);
    s.initial_target = fruit;

    // The initial view must keep at least one fruit pixel; shed leaves from
    // the back of the list until it does.
    while (count_fruit_pixels(s.scene, s.camera, s.initial_viewpoint()) == 0 &&
           s.scene.primitives.size() > 2)
        s.scene.primitives.pop_back();
    return s;
}

double fruit_visibility(const Scenario& scenario) {
    Scene bare;
    bare.fruit_truth = scenario.scene.fruit_truth;
    bare.workspace_min = scenario.scene.workspace_min;
    bare.workspace_max = scenario.scene.workspace_max;
    for (const Primitive& p : scenario.scene.primitives)
        if (p.cls != SemanticClass::Background) bare.primitives.push_back(p);

    const Viewpoint pose = scenario.initial_viewpoint();
    const size_t with = count_fruit_pixels(scenario.scene, scenario.camera, pose);
    const size_t without = count_fruit_pixels(bare, scenario.camera, pose);
    if (without == 0) throw Error("fruit invisible even without occluders");
    return static_cast<double>(with) / static_cast<double>(without);
}

std::string scenario_to_json(const Scenario& scenario) {
    const Scene& scene = scenario.scene;
    const Ellipsoid* fruit = nullptr;
    const Cylinder* peduncle = nullptr;
    for (const Primitive& p : scene.primitives) {
        if (p.cls == SemanticClass::Avocado) fruit = std::get_if<Ellipsoid>(&p.shape);
        if (p.cls == SemanticClass::Peduncle) peduncle = std::get_if<Cylinder>(&p.shape);
    }
    if (!fruit || !peduncle) throw Error("scenario lacks a fruit/peduncle pair");

    json j;
    j["name"] = scenario.name;
    j["camera"] = {{"width", scenario.camera.width},   {"height", scenario.camera.height},
                   {"fx", scenario.camera.fx},         {"fy", scenario.camera.fy},
                   {"cx", scenario.camera.cx},         {"cy", scenario.camera.cy},
                   {"near", scenario.camera.near_clip}, {"far", scenario.camera.far_clip}};
    j["initial_pose"] = {{"position", vec_json(scenario.initial_position)},
                         {"target", vec_json(scenario.initial_target)}};
    j["fruit"] = {{"center", vec_json(fruit->center)},
                  {"semi_axes", vec_json(fruit->semi_axes)},
                  {"axis", vec_json(fruit->axis)}};
    j["peduncle"] = {{"base", vec_json(peduncle->base)},
                     {"axis", vec_json(peduncle->axis)},
                     {"radius", peduncle->radius},
                     {"height", peduncle->height}};
    j["occluders"] = json::array();
    for (const Primitive& p : scene.primitives)
        if (p.cls == SemanticClass::Background) j["occluders"].push_back(occluder_json(p));
    j["ground_truth"] = {{"f_pos", vec_json(scene.fruit_truth.position)},
                         {"f_axis", vec_json(scene.fruit_truth.axis)}};
    j["config_overrides"] = config_json(scenario.config);
    return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("scenario parse error: ") + e.what());
    }

    Scenario s;
    try {
        s.name = j.at("name").get<std::string>();
        const json& cam = j.at("camera");
        s.camera.width = cam.at("width").get<int>();
        s.camera.height = cam.at("height").get<int>();
        s.camera.fx = cam.at("fx").get<double>();
        s.camera.fy = cam.at("fy").get<double>();
        s.camera.cx = cam.at("cx").get<double>();
        s.camera.cy = cam.at("cy").get<double>();
        s.camera.near_clip = cam.at("near").get<double>();
        s.camera.far_clip = cam.at("far").get<double>();

        s.initial_position = vec_from(j.at("initial_pose").at("position"));
        s.initial_target = vec_from(j.at("initial_pose").at("target"));

        const json& fj = j.at("fruit");
        s.scene.primitives.push_back(make_fruit(
            vec_from(fj.at("center")), vec_from(fj.at("semi_axes")), vec_from(fj.at("axis"))));

        const json& pj = j.at("peduncle");
        Cylinder ped;
        ped.base = vec_from(pj.at("base"));
        ped.axis = vec_from(pj.at("axis"));
        ped.radius = pj.at("radius").get<double>();
        ped.height = pj.at("height").get<double>();
        s.scene.primitives.push_back(Primitive{ped, SemanticClass::Peduncle});

        for (const json& oj : j.at("occluders"))
            s.scene.primitives.push_back(occluder_from(oj));

        s.scene.fruit_truth.position = vec_from(j.at("ground_truth").at("f_pos"));
        s.scene.fruit_truth.axis = vec_from(j.at("ground_truth").at("f_axis"));
        set_workspace(s.scene);

        if (j.contains("config_overrides")) apply_config(j.at("config_overrides"), s.config);
    } catch (const json::exception& e) {
        throw Error(std::string("scenario field error: ") + e.what());
    }

    s.scene.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json(buf.str());
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write scenario file: " + path);
    out << scenario_to_json(scenario);
    if (!out) throw Error("failed writing scenario file: " + path);
}

Scenario resolve_scenario(const std::string& name_or_path) {
    if (name_or_path == "group1") return builtin_group1();
    if (name_or_path == "group2") return builtin_group2();
    return load_scenario(name_or_path);
}

}  // namespace gsnbv
