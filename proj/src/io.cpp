#include "aquacal/io.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>

namespace aquacal {

namespace {

using Code = CalibrationError::Code;
namespace fs = std::filesystem;

constexpr int kSchemaVersion = 1;

[[noreturn]] void parse_fail(const fs::path& file, const std::string& msg) {
    throw CalibrationError(Code::kParseError, file.string() + ": " + msg);
}

[[noreturn]] void schema_fail(const fs::path& file, const std::string& msg) {
    throw CalibrationError(Code::kSchemaError, file.string() + ": " + msg);
}

YAML::Node load_file(const fs::path& file) {
    std::error_code ec;
    if (!fs::exists(file, ec)) {
        parse_fail(file, "file not found");
    }
    try {
        return YAML::LoadFile(file.string());
    } catch (const YAML::ParserException& e) {
        parse_fail(file, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    } catch (const YAML::Exception& e) {
        parse_fail(file, e.msg);
    }
}

YAML::Node require(const YAML::Node& node, const std::string& key, const fs::path& file) {
    const YAML::Node child = node[key];
    if (!child) {
        schema_fail(file, "missing field '" + key + "'");
    }
    return child;
}

template <typename T>
T as(const YAML::Node& node, const std::string& key, const fs::path& file) {
    try {
        return require(node, key, file).as<T>();
    } catch (const YAML::Exception&) {
        schema_fail(file, "field '" + key + "' has the wrong type");
    }
}

void check_schema(const YAML::Node& root, const fs::path& file) {
    const int version = as<int>(root, "schema", file);
    if (version != kSchemaVersion) {
        schema_fail(file, "unsupported schema version " + std::to_string(version));
    }
}

void write_text(const fs::path& file, const YAML::Node& root) {
    std::ofstream out(file);
    if (!out) {
        throw CalibrationError(Code::kValidationError, "cannot write " + file.string());
    }
    out << root << "\n";
}

YAML::Node vec3_node(const Vec3& v) {
    YAML::Node n;
    n.SetStyle(YAML::EmitterStyle::Flow);
    n.push_back(v.x());
    n.push_back(v.y());
    n.push_back(v.z());
    return n;
}

Vec3 vec3_from(const YAML::Node& node, const std::string& key, const fs::path& file) {
    const YAML::Node n = require(node, key, file);
    if (!n.IsSequence() || n.size() != 3) {
        schema_fail(file, "field '" + key + "' must be a 3-vector");
    }
    try {
        return Vec3(n[0].as<double>(), n[1].as<double>(), n[2].as<double>());
    } catch (const YAML::Exception&) {
        schema_fail(file, "field '" + key + "' has non-numeric entries");
    }
}

YAML::Node image_size_node(const std::array<int, 2>& size) {
    YAML::Node n;
    n.SetStyle(YAML::EmitterStyle::Flow);
    n.push_back(size[0]);
    n.push_back(size[1]);
    return n;
}

std::array<int, 2> image_size_from(const YAML::Node& node, const std::string& key,
                                   const fs::path& file) {
    const YAML::Node n = require(node, key, file);
    if (!n.IsSequence() || n.size() != 2) {
        schema_fail(file, "field '" + key + "' must be [width, height]");
    }
    try {
        return {n[0].as<int>(), n[1].as<int>()};
    } catch (const YAML::Exception&) {
        schema_fail(file, "field '" + key + "' has non-integer entries");
    }
}

YAML::Node target_node(const TargetInfo& target) {
    YAML::Node n;
    n["type"] = to_string(target.type);
    n["rows"] = target.rows;
    n["cols"] = target.cols;
    n["spacing"] = target.spacing;
    return n;
}

TargetInfo target_from(const YAML::Node& node, const fs::path& file) {
    TargetInfo target;
    target.type = target_type_from_string(as<std::string>(node, "type", file));
    target.rows = as<int>(node, "rows", file);
    target.cols = as<int>(node, "cols", file);
    target.spacing = as<double>(node, "spacing", file);
    return target;
}

YAML::Node observations_node(const std::vector<Observation>& observations) {
    YAML::Node n;
    for (const Observation& obs : observations) {
        YAML::Node row;
        row.SetStyle(YAML::EmitterStyle::Flow);
        row.push_back(obs.pixel.x());
        row.push_back(obs.pixel.y());
        row.push_back(obs.point.x());
        row.push_back(obs.point.y());
        row.push_back(obs.point.z());
        n.push_back(row);
    }
    return n;
}

std::vector<Observation> observations_from(const YAML::Node& node, const fs::path& file) {
    if (!node.IsSequence()) {
        schema_fail(file, "observations must be a list");
    }
    std::vector<Observation> out;
    out.reserve(node.size());
    for (const YAML::Node& row : node) {
        if (!row.IsSequence() || row.size() != 5) {
            schema_fail(file, "each observation must be [u, v, X, Y, Z]");
        }
        try {
            Observation obs;
            obs.pixel = Pixel(row[0].as<double>(), row[1].as<double>());
            obs.point = Vec3(row[2].as<double>(), row[3].as<double>(), row[4].as<double>());
            out.push_back(obs);
        } catch (const YAML::Exception&) {
            schema_fail(file, "observation entries must be numeric");
        }
    }
    return out;
}

YAML::Node intrinsics_node(const CameraIntrinsics& intrinsics) {
    YAML::Node n;
    n["model"] = to_string(intrinsics.model);
    n["fx"] = intrinsics.fx;
    n["fy"] = intrinsics.fy;
    n["cx"] = intrinsics.cx;
    n["cy"] = intrinsics.cy;
    YAML::Node dist;
    dist.SetStyle(YAML::EmitterStyle::Flow);
    for (double k : intrinsics.distortion) dist.push_back(k);
    n["distortion"] = dist;
    return n;
}

CameraIntrinsics intrinsics_from(const YAML::Node& node, const fs::path& file) {
    CameraIntrinsics out;
    out.model = camera_model_from_string(as<std::string>(node, "model", file));
    out.fx = as<double>(node, "fx", file);
    out.fy = as<double>(node, "fy", file);
    out.cx = as<double>(node, "cx", file);
    out.cy = as<double>(node, "cy", file);
    const YAML::Node dist = require(node, "distortion", file);
    if (!dist.IsSequence()) {
        schema_fail(file, "distortion must be a list");
    }
    for (const YAML::Node& k : dist) {
        try {
            out.distortion.push_back(k.as<double>());
        } catch (const YAML::Exception&) {
            schema_fail(file, "distortion entries must be numeric");
        }
    }
    try {
        out.validate();
    } catch (const CalibrationError& e) {
        schema_fail(file, e.what());
    }
    return out;
}

YAML::Node pose_entries_node(const std::vector<PoseEntry>& poses) {
    YAML::Node n;
    for (const PoseEntry& entry : poses) {
        YAML::Node p;
        p["id"] = entry.view_id;
        p["rotation"] = vec3_node(entry.rotation_axis_angle);
        p["translation"] = vec3_node(entry.translation);
        n.push_back(p);
    }
    return n;
}

std::vector<PoseEntry> pose_entries_from(const YAML::Node& node, const fs::path& file) {
    if (!node.IsSequence()) {
        schema_fail(file, "poses must be a list");
    }
    std::vector<PoseEntry> out;
    for (const YAML::Node& p : node) {
        PoseEntry entry;
        entry.view_id = as<int>(p, "id", file);
        entry.rotation_axis_angle = vec3_from(p, "rotation", file);
        entry.translation = vec3_from(p, "translation", file);
        out.push_back(entry);
    }
    return out;
}

YAML::Node std_devs_node(const std::map<std::string, double>& std_devs) {
    YAML::Node n;
    for (const auto& [key, value] : std_devs) n[key] = value;
    return n;
}

std::map<std::string, double> std_devs_from(const YAML::Node& node, const fs::path& file) {
    std::map<std::string, double> out;
    if (!node.IsMap()) {
        schema_fail(file, "std_devs/metrics must be a map");
    }
    for (const auto& item : node) {
        try {
            out[item.first.as<std::string>()] = item.second.as<double>();
        } catch (const YAML::Exception&) {
            schema_fail(file, "std_devs/metrics entries must be numeric");
        }
    }
    return out;
}

YAML::Node per_view_node(const std::vector<double>& values) {
    YAML::Node n;
    n.SetStyle(YAML::EmitterStyle::Flow);
    for (double v : values) n.push_back(v);
    return n;
}

std::vector<double> per_view_from(const YAML::Node& node, const fs::path& file) {
    if (!node.IsSequence()) {
        schema_fail(file, "per-view list must be a sequence");
    }
    std::vector<double> out;
    for (const YAML::Node& v : node) {
        try {
            out.push_back(v.as<double>());
        } catch (const YAML::Exception&) {
            schema_fail(file, "per-view entries must be numeric");
        }
    }
    return out;
}

YAML::Node housing_node(const Housing& housing, bool with_constants) {
    YAML::Node n;
    if (const auto* flat = std::get_if<FlatPort>(&housing)) {
        n["port"] = "flat";
        n["normal"] = vec3_node(flat->normal);
        n["distance"] = flat->distance;
        if (with_constants) {
            YAML::Node c;
            c["thickness"] = flat->thickness;
            c["mu_air"] = flat->mu_air;
            c["mu_glass"] = flat->mu_glass;
            c["mu_water"] = flat->mu_water;
            n["constants"] = c;
        }
    } else {
        const DomePort& dome = std::get<DomePort>(housing);
        n["port"] = "dome";
        n["decentering"] = vec3_node(dome.decentering);
        if (with_constants) {
            YAML::Node c;
            c["radius"] = dome.radius;
            c["thickness"] = dome.thickness;
            c["mu_air"] = dome.mu_air;
            c["mu_glass"] = dome.mu_glass;
            c["mu_water"] = dome.mu_water;
            n["constants"] = c;
        }
    }
    return n;
}

Housing housing_from(const YAML::Node& node, const fs::path& file) {
    const std::string port = as<std::string>(node, "port", file);
    const YAML::Node constants = require(node, "constants", file);
    if (port == "flat") {
        FlatPort flat;
        flat.normal = vec3_from(node, "normal", file);
        flat.distance = as<double>(node, "distance", file);
        flat.thickness = as<double>(constants, "thickness", file);
        flat.mu_air = as<double>(constants, "mu_air", file);
        flat.mu_glass = as<double>(constants, "mu_glass", file);
        flat.mu_water = as<double>(constants, "mu_water", file);
        return flat;
    }
    if (port == "dome") {
        DomePort dome;
        dome.decentering = vec3_from(node, "decentering", file);
        dome.radius = as<double>(constants, "radius", file);
        dome.thickness = as<double>(constants, "thickness", file);
        dome.mu_air = as<double>(constants, "mu_air", file);
        dome.mu_glass = as<double>(constants, "mu_glass", file);
        dome.mu_water = as<double>(constants, "mu_water", file);
        return dome;
    }
    schema_fail(file, "unknown port type '" + port + "'");
}

fs::path dataset_manifest(const fs::path& path) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        return path / "dataset.yaml";
    }
    return path;
}

}  // namespace

void save_dataset(const ObservationDataset& dataset, const fs::path& directory) {
    fs::create_directories(directory);
    YAML::Node root;
    root["schema"] = kSchemaVersion;
    root["target"] = target_node(dataset.target);
    root["image_size"] = image_size_node(dataset.image_size);
    YAML::Node views;
    for (const View& view : dataset.views) {
        YAML::Node v;
        v["id"] = view.id;
        v["observations"] = observations_node(view.observations);
        views.push_back(v);
    }
    root["views"] = views;
    write_text(directory / "dataset.yaml", root);
}

ObservationDataset load_dataset(const fs::path& path) {
    const fs::path file = dataset_manifest(path);
    std::error_code ec;
    if (fs::is_directory(path, ec) && !fs::exists(file, ec)) {
        parse_fail(path, "no views found (missing dataset.yaml)");
    }
    const YAML::Node root = load_file(file);
    check_schema(root, file);
    if (root["cameras"]) {
        schema_fail(file, "stereo dataset given where a single-camera dataset was expected");
    }

    ObservationDataset dataset;
    dataset.target = target_from(require(root, "target", file), file);
    dataset.image_size = image_size_from(root, "image_size", file);
    const YAML::Node views = require(root, "views", file);
    if (!views.IsSequence()) {
        schema_fail(file, "views must be a list");
    }
    for (const YAML::Node& v : views) {
        View view;
        view.id = as<int>(v, "id", file);
        view.observations = observations_from(require(v, "observations", file), file);
        dataset.views.push_back(std::move(view));
    }
    try {
        dataset.validate();
    } catch (const CalibrationError& e) {
        throw CalibrationError(Code::kValidationError, file.string() + ": " + e.what());
    }
    return dataset;
}

void save_stereo_dataset(const StereoDataset& dataset, const fs::path& directory) {
    fs::create_directories(directory);
    YAML::Node root;
    root["schema"] = kSchemaVersion;
    root["target"] = target_node(dataset.target);
    YAML::Node cameras;
    YAML::Node cam1, cam2;
    cam1["name"] = "cam1";
    cam1["image_size"] = image_size_node(dataset.image_size1);
    cam2["name"] = "cam2";
    cam2["image_size"] = image_size_node(dataset.image_size2);
    cameras.push_back(cam1);
    cameras.push_back(cam2);
    root["cameras"] = cameras;
    YAML::Node views;
    for (const StereoView& view : dataset.views) {
        YAML::Node v;
        v["id"] = view.id;
        v["cam1"] = observations_node(view.cam1);
        v["cam2"] = observations_node(view.cam2);
        views.push_back(v);
    }
    root["views"] = views;
    write_text(directory / "dataset.yaml", root);
}

StereoDataset load_stereo_dataset(const fs::path& path) {
    const fs::path file = dataset_manifest(path);
    std::error_code ec;
    if (fs::is_directory(path, ec) && !fs::exists(file, ec)) {
        parse_fail(path, "no views found (missing dataset.yaml)");
    }
    const YAML::Node root = load_file(file);
    check_schema(root, file);

    const YAML::Node cameras = require(root, "cameras", file);
    if (!cameras.IsSequence() || cameras.size() != 2) {
        schema_fail(file, "stereo dataset must declare exactly 2 cameras");
    }

    StereoDataset dataset;
    dataset.target = target_from(require(root, "target", file), file);
    dataset.image_size1 = image_size_from(cameras[0], "image_size", file);
    dataset.image_size2 = image_size_from(cameras[1], "image_size", file);
    const YAML::Node views = require(root, "views", file);
    if (!views.IsSequence()) {
        schema_fail(file, "views must be a list");
    }
    for (const YAML::Node& v : views) {
        StereoView view;
        view.id = as<int>(v, "id", file);
        view.cam1 = observations_from(require(v, "cam1", file), file);
        view.cam2 = observations_from(require(v, "cam2", file), file);
        dataset.views.push_back(std::move(view));
    }
    try {
        dataset.validate();
    } catch (const CalibrationError& e) {
        throw CalibrationError(Code::kValidationError, file.string() + ": " + e.what());
    }
    return dataset;
}

bool dataset_is_stereo(const fs::path& path) {
    const fs::path file = dataset_manifest(path);
    const YAML::Node root = load_file(file);
    return static_cast<bool>(root["cameras"]);
}

void save_report(const CalibrationReport& report, const fs::path& file) {
    YAML::Node root;
    root["schema"] = kSchemaVersion;
    YAML::Node tool;
    tool["name"] = "aquacal";
    tool["version"] = "0.1.0";
    root["tool"] = tool;

    if (report.camera) {
        const CameraSection& cam = *report.camera;
        YAML::Node n = intrinsics_node(cam.intrinsics);
        n["image_size"] = image_size_node(cam.image_size);
        n["rms_px"] = cam.rms_px;
        n["per_view_rms_px"] = per_view_node(cam.per_view_rms_px);
        n["std_devs"] = std_devs_node(cam.std_devs);
        n["poses"] = pose_entries_node(cam.poses);
        YAML::Node cov;
        cov["grid_size"] = cam.coverage.grid_size;
        YAML::Node counts;
        for (const auto& row : cam.coverage.counts) {
            YAML::Node r;
            r.SetStyle(YAML::EmitterStyle::Flow);
            for (int c : row) r.push_back(c);
            counts.push_back(r);
        }
        cov["counts"] = counts;
        cov["empty_cells"] = cam.coverage.empty_cells;
        cov["min"] = cam.coverage.min_count;
        cov["max"] = cam.coverage.max_count;
        n["coverage"] = cov;
        root["camera"] = n;
    }

    if (report.housing) {
        const HousingSection& housing = *report.housing;
        YAML::Node n = housing_node(housing.port, /*with_constants=*/true);
        n["initial"] = housing_node(housing.initial, /*with_constants=*/false);
        n["rms_px"] = housing.rms_px;
        n["per_view_rms_px"] = per_view_node(housing.per_view_rms_px);
        n["std_devs"] = std_devs_node(housing.std_devs);
        n["metrics"] = std_devs_node(housing.metrics);
        n["poses"] = pose_entries_node(housing.poses);
        root["housing"] = n;
    }

    if (report.stereo) {
        const StereoSection& stereo = *report.stereo;
        YAML::Node n;
        n["rotation_axis_angle"] = vec3_node(stereo.rotation_axis_angle);
        YAML::Node quat;
        quat.SetStyle(YAML::EmitterStyle::Flow);
        for (int i = 0; i < 4; ++i) quat.push_back(stereo.rotation_quaternion(i));
        n["rotation_quaternion"] = quat;
        n["translation"] = vec3_node(stereo.translation);
        n["intrinsics1"] = intrinsics_node(stereo.intrinsics1);
        n["intrinsics2"] = intrinsics_node(stereo.intrinsics2);
        n["intrinsics_refined"] = stereo.intrinsics_refined;
        n["rms_px"] = stereo.rms_px;
        n["rms_cam1_px"] = stereo.rms_cam1_px;
        n["rms_cam2_px"] = stereo.rms_cam2_px;
        n["dropped_pairs"] = stereo.dropped_pairs;
        n["std_devs"] = std_devs_node(stereo.std_devs);
        n["cam1_poses"] = pose_entries_node(stereo.cam1_poses);
        root["stereo"] = n;
    }

    write_text(file, root);
}

CalibrationReport load_report(const fs::path& file) {
    const YAML::Node root = load_file(file);
    check_schema(root, file);

    CalibrationReport report;
    if (const YAML::Node n = root["camera"]) {
        CameraSection cam;
        cam.intrinsics = intrinsics_from(n, file);
        cam.image_size = image_size_from(n, "image_size", file);
        cam.rms_px = as<double>(n, "rms_px", file);
        cam.per_view_rms_px = per_view_from(require(n, "per_view_rms_px", file), file);
        cam.std_devs = std_devs_from(require(n, "std_devs", file), file);
        cam.poses = pose_entries_from(require(n, "poses", file), file);
        const YAML::Node cov = require(n, "coverage", file);
        cam.coverage.grid_size = as<int>(cov, "grid_size", file);
        const YAML::Node counts = require(cov, "counts", file);
        for (const YAML::Node& row : counts) {
            std::vector<int> r;
            for (const YAML::Node& c : row) r.push_back(c.as<int>());
            cam.coverage.counts.push_back(std::move(r));
        }
        cam.coverage.empty_cells = as<int>(cov, "empty_cells", file);
        cam.coverage.min_count = as<int>(cov, "min", file);
        cam.coverage.max_count = as<int>(cov, "max", file);
        report.camera = std::move(cam);
    }

    if (const YAML::Node n = root["housing"]) {
        HousingSection housing;
        housing.port = housing_from(n, file);
        // The initial guess shares the frozen constants with the estimate.
        YAML::Node init = require(n, "initial", file);
        YAML::Node init_full = YAML::Clone(init);
        init_full["constants"] = require(n, "constants", file);
        housing.initial = housing_from(init_full, file);
        housing.rms_px = as<double>(n, "rms_px", file);
        housing.per_view_rms_px = per_view_from(require(n, "per_view_rms_px", file), file);
        housing.std_devs = std_devs_from(require(n, "std_devs", file), file);
        housing.metrics = std_devs_from(require(n, "metrics", file), file);
        housing.poses = pose_entries_from(require(n, "poses", file), file);
        report.housing = std::move(housing);
    }

    if (const YAML::Node n = root["stereo"]) {
        StereoSection stereo;
        stereo.rotation_axis_angle = vec3_from(n, "rotation_axis_angle", file);
        const YAML::Node quat = require(n, "rotation_quaternion", file);
        if (!quat.IsSequence() || quat.size() != 4) {
            schema_fail(file, "rotation_quaternion must be [w, x, y, z]");
        }
        for (int i = 0; i < 4; ++i) stereo.rotation_quaternion(i) = quat[i].as<double>();
        stereo.translation = vec3_from(n, "translation", file);
        stereo.intrinsics1 = intrinsics_from(require(n, "intrinsics1", file), file);
        stereo.intrinsics2 = intrinsics_from(require(n, "intrinsics2", file), file);
        stereo.intrinsics_refined = as<bool>(n, "intrinsics_refined", file);
        stereo.rms_px = as<double>(n, "rms_px", file);
        stereo.rms_cam1_px = as<double>(n, "rms_cam1_px", file);
        stereo.rms_cam2_px = as<double>(n, "rms_cam2_px", file);
        stereo.dropped_pairs = as<int>(n, "dropped_pairs", file);
        stereo.std_devs = std_devs_from(require(n, "std_devs", file), file);
        stereo.cam1_poses = pose_entries_from(require(n, "cam1_poses", file), file);
        report.stereo = std::move(stereo);
    }

    return report;
}

void save_truth(const GroundTruth& truth, const fs::path& file) {
    YAML::Node root;
    root["schema"] = kSchemaVersion;
    root["kind"] = "truth";
    root["camera"] = intrinsics_node(truth.spec.camera);
    root["image_size"] = image_size_node(truth.spec.image_size);
    if (std::holds_alternative<std::monostate>(truth.spec.housing)) {
        YAML::Node h;
        h["port"] = "none";
        root["housing"] = h;
    } else if (const auto* flat = std::get_if<FlatPort>(&truth.spec.housing)) {
        root["housing"] = housing_node(Housing{*flat}, true);
    } else {
        root["housing"] = housing_node(Housing{std::get<DomePort>(truth.spec.housing)}, true);
    }
    root["target"] = target_node(truth.spec.target);
    root["n_views"] = truth.spec.n_views;
    YAML::Node sampler;
    sampler["min_distance"] = truth.spec.sampler.min_distance;
    sampler["max_distance"] = truth.spec.sampler.max_distance;
    sampler["max_tilt_deg"] = truth.spec.sampler.max_tilt_deg;
    root["sampler"] = sampler;
    root["noise_sigma_px"] = truth.spec.noise_sigma_px;
    root["seed"] = truth.spec.seed;
    if (truth.spec.stereo_rig) {
        const PoseEntry entry = PoseEntry::from_pose(0, *truth.spec.stereo_rig);
        YAML::Node rig;
        rig["rotation"] = vec3_node(entry.rotation_axis_angle);
        rig["translation"] = vec3_node(entry.translation);
        root["stereo_rig"] = rig;
    }
    root["poses"] = pose_entries_node(truth.poses);
    if (!truth.note.empty()) {
        root["note"] = truth.note;
    }
    write_text(file, root);
}

namespace {

ScenarioSpec scenario_from(const YAML::Node& root, const fs::path& file) {
    ScenarioSpec spec;
    spec.camera = intrinsics_from(require(root, "camera", file), file);
    spec.image_size = image_size_from(root, "image_size", file);
    if (const YAML::Node h = root["housing"]) {
        const std::string port = as<std::string>(h, "port", file);
        if (port != "none") {
            const Housing housing = housing_from(h, file);
            if (const auto* flat = std::get_if<FlatPort>(&housing)) {
                spec.housing = *flat;
            } else {
                spec.housing = std::get<DomePort>(housing);
            }
        }
    }
    spec.target = target_from(require(root, "target", file), file);
    spec.n_views = as<int>(root, "n_views", file);
    if (const YAML::Node s = root["sampler"]) {
        spec.sampler.min_distance = as<double>(s, "min_distance", file);
        spec.sampler.max_distance = as<double>(s, "max_distance", file);
        spec.sampler.max_tilt_deg = as<double>(s, "max_tilt_deg", file);
    }
    spec.noise_sigma_px = as<double>(root, "noise_sigma_px", file);
    spec.seed = as<uint64_t>(root, "seed", file);
    if (const YAML::Node rig = root["stereo_rig"]) {
        PoseEntry entry;
        entry.rotation_axis_angle = vec3_from(rig, "rotation", file);
        entry.translation = vec3_from(rig, "translation", file);
        spec.stereo_rig = entry.pose();
    }
    try {
        spec.validate();
    } catch (const CalibrationError& e) {
        throw CalibrationError(Code::kValidationError, file.string() + ": " + e.what());
    }
    return spec;
}

}  // namespace

GroundTruth load_truth(const fs::path& file) {
    const YAML::Node root = load_file(file);
    check_schema(root, file);
    GroundTruth truth;
    truth.spec = scenario_from(root, file);
    truth.poses = pose_entries_from(require(root, "poses", file), file);
    if (const YAML::Node note = root["note"]) {
        truth.note = note.as<std::string>();
    }
    return truth;
}

ScenarioSpec load_scenario_spec(const fs::path& file) {
    const YAML::Node root = load_file(file);
    check_schema(root, file);
    return scenario_from(root, file);
}

CameraIntrinsics load_intrinsics(const fs::path& file) {
    const YAML::Node root = load_file(file);
    check_schema(root, file);
    if (const YAML::Node cam = root["camera"]) {
        return intrinsics_from(cam, file);
    }
    schema_fail(file, "no camera section found");
}

}  // namespace aquacal
