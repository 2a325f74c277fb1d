// Command-line front end: dataset generation, camera/housing/stereo
// calibration and report comparison.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "aquacal/camera_calibration.hpp"
#include "aquacal/housing_calibration.hpp"
#include "aquacal/io.hpp"
#include "aquacal/so3.hpp"
#include "aquacal/stereo_calibration.hpp"
#include "aquacal/synthetic.hpp"

namespace {

namespace fs = std::filesystem;
using namespace aquacal;

int exit_code_for(CalibrationError::Code code) {
    switch (code) {
        case CalibrationError::Code::kParseError:
        case CalibrationError::Code::kSchemaError:
        case CalibrationError::Code::kValidationError:
        case CalibrationError::Code::kUnknownPreset:
        case CalibrationError::Code::kInsufficientViews:
        case CalibrationError::Code::kInsufficientPairs:
            return 1;
        case CalibrationError::Code::kDegenerateMotion:
        case CalibrationError::Code::kDegenerateConfiguration:
        case CalibrationError::Code::kDegenerateHomography:
        case CalibrationError::Code::kDegenerateGeometry:
        case CalibrationError::Code::kNonConvergence:
        case CalibrationError::Code::kRankDeficient:
        case CalibrationError::Code::kViewSamplingFailed:
            return 2;
    }
    return 1;
}

struct GenerateArgs {
    std::string preset_name;
    std::string spec_file;
    std::string output_dir;
    std::optional<uint64_t> seed;
    std::optional<double> sigma;
    std::optional<int> views;
};

int run_generate(const GenerateArgs& args) {
    ScenarioSpec spec;
    if (!args.preset_name.empty()) {
        spec = preset(args.preset_name);
    } else {
        spec = load_scenario_spec(args.spec_file);
    }
    if (args.seed) spec.seed = *args.seed;
    if (const char* env_seed = std::getenv("CALIB_SEED")) {
        spec.seed = std::strtoull(env_seed, nullptr, 10);
    }
    if (args.sigma) spec.noise_sigma_px = *args.sigma;
    if (args.views) spec.n_views = *args.views;

    const fs::path dir(args.output_dir);
    if (spec.stereo_rig) {
        const GeneratedStereoDataset generated = generate_stereo_dataset(spec);
        save_stereo_dataset(generated.dataset, dir);
        save_truth(generated.truth, dir / "truth.yaml");
        std::cout << "wrote stereo dataset with " << generated.dataset.views.size()
                  << " pairs to " << dir.string() << "\n";
    } else {
        const GeneratedDataset generated = generate_dataset(spec);
        save_dataset(generated.dataset, dir);
        save_truth(generated.truth, dir / "truth.yaml");
        std::cout << "wrote dataset with " << generated.dataset.views.size() << " views to "
                  << dir.string() << "\n";
    }
    return 0;
}

void print_intrinsics(const CameraIntrinsics& k) {
    std::cout << "  model: " << to_string(k.model) << "\n"
              << "  fx: " << k.fx << "  fy: " << k.fy << "\n"
              << "  cx: " << k.cx << "  cy: " << k.cy << "\n";
    if (!k.distortion.empty()) {
        std::cout << "  distortion:";
        for (double d : k.distortion) std::cout << " " << d;
        std::cout << "\n";
    }
}

int run_calibrate_camera(const std::string& dataset_path, const std::string& model_name,
                         const std::string& output) {
    const ObservationDataset dataset = load_dataset(dataset_path);
    if (dataset.views.size() < 5) {
        std::cerr << "warning: only " << dataset.views.size()
                  << " views; 5 or more are recommended\n";
    }
    const CalibrationReport report =
        calibrate_camera(dataset, camera_model_from_string(model_name));

    std::cout << "camera calibration:\n";
    print_intrinsics(report.camera->intrinsics);
    std::cout << "  rms_px: " << report.camera->rms_px << "\n";
    std::cout << "feature coverage (" << report.camera->coverage.grid_size << "x"
              << report.camera->coverage.grid_size << ", " << report.camera->coverage.empty_cells
              << " empty cells):\n"
              << coverage_text(report.camera->coverage);
    if (!output.empty()) {
        save_report(report, output);
        std::cout << "report written to " << output << "\n";
    }
    return 0;
}

struct HousingArgs {
    std::string dataset_path;
    std::string port;
    std::string intrinsics_file;
    std::string constants_from;
    std::string output;
    double t_glass = 0.0;
    double mu_air = 1.0;
    double mu_glass = 1.473;
    double mu_water = 1.334;
    double r_dome = 0.0;
    double init_distance = 0.05;
    std::vector<double> init_normal = {0.0, 0.0, 1.0};
    std::vector<double> init_decentering = {0.0, 0.0, 0.0};
    bool no_optimize_poses = false;
};

int run_calibrate_housing(HousingArgs args) {
    const ObservationDataset dataset = load_dataset(args.dataset_path);
    const CameraIntrinsics intrinsics = load_intrinsics(args.intrinsics_file);

    if (!args.constants_from.empty()) {
        const GroundTruth truth = load_truth(args.constants_from);
        if (const auto* flat = std::get_if<FlatPort>(&truth.spec.housing)) {
            args.t_glass = flat->thickness;
            args.mu_air = flat->mu_air;
            args.mu_glass = flat->mu_glass;
            args.mu_water = flat->mu_water;
        } else if (const auto* dome = std::get_if<DomePort>(&truth.spec.housing)) {
            args.t_glass = dome->thickness;
            args.r_dome = dome->radius;
            args.mu_air = dome->mu_air;
            args.mu_glass = dome->mu_glass;
            args.mu_water = dome->mu_water;
        } else {
            throw CalibrationError(CalibrationError::Code::kValidationError,
                                   args.constants_from + ": no housing constants found");
        }
    }
    if (!(args.t_glass > 0.0)) {
        throw CalibrationError(CalibrationError::Code::kValidationError,
                               "glass thickness must be given (--t-glass or --constants-from)");
    }

    HousingEstimationConfig config;
    config.optimize_poses = !args.no_optimize_poses;

    CalibrationReport report;
    if (args.port == "flat") {
        FlatPort initial;
        initial.normal =
            Vec3(args.init_normal[0], args.init_normal[1], args.init_normal[2]).normalized();
        initial.distance = args.init_distance;
        initial.thickness = args.t_glass;
        initial.mu_air = args.mu_air;
        initial.mu_glass = args.mu_glass;
        initial.mu_water = args.mu_water;
        report = calibrate_flat_port(dataset, intrinsics, initial, config);
        const FlatPort& estimated = std::get<FlatPort>(report.housing->port);
        std::cout << "flat port calibration:\n"
                  << "  normal: [" << estimated.normal.x() << ", " << estimated.normal.y()
                  << ", " << estimated.normal.z() << "]\n"
                  << "  distance: " << estimated.distance << "\n";
    } else {
        if (!(args.r_dome > 0.0)) {
            throw CalibrationError(CalibrationError::Code::kValidationError,
                                   "dome radius must be given (--r-dome or --constants-from)");
        }
        DomePort initial;
        initial.decentering = Vec3(args.init_decentering[0], args.init_decentering[1],
                                   args.init_decentering[2]);
        initial.radius = args.r_dome;
        initial.thickness = args.t_glass;
        initial.mu_air = args.mu_air;
        initial.mu_glass = args.mu_glass;
        initial.mu_water = args.mu_water;
        report = calibrate_dome_port(dataset, intrinsics, initial, config);
        const DomePort& estimated = std::get<DomePort>(report.housing->port);
        std::cout << "dome port calibration:\n"
                  << "  decentering: [" << estimated.decentering.x() << ", "
                  << estimated.decentering.y() << ", " << estimated.decentering.z() << "]\n";
    }
    std::cout << "  rms_px: " << report.housing->rms_px << "\n";
    if (!args.output.empty()) {
        save_report(report, args.output);
        std::cout << "report written to " << args.output << "\n";
    }
    return 0;
}

int run_calibrate_stereo(const std::string& dataset_path, const std::string& intrinsics1,
                         const std::string& intrinsics2, bool fix_intrinsics,
                         const std::string& model_name, const std::string& output) {
    const StereoDataset dataset = load_stereo_dataset(dataset_path);

    CameraIntrinsics K1, K2;
    if (!intrinsics1.empty() && !intrinsics2.empty()) {
        K1 = load_intrinsics(intrinsics1);
        K2 = load_intrinsics(intrinsics2);
    } else {
        // Pre-calibrate each camera from its own side of the pairs.
        const CameraModel model = camera_model_from_string(model_name);
        ObservationDataset side1, side2;
        side1.target = side2.target = dataset.target;
        side1.image_size = dataset.image_size1;
        side2.image_size = dataset.image_size2;
        for (const StereoView& view : dataset.views) {
            side1.views.push_back(View{view.id, view.cam1});
            side2.views.push_back(View{view.id, view.cam2});
        }
        K1 = calibrate_camera(side1, model).camera->intrinsics;
        K2 = calibrate_camera(side2, model).camera->intrinsics;
    }

    StereoCalibrationOptions options;
    options.refine_intrinsics = !fix_intrinsics;
    const CalibrationReport report = calibrate_stereo(dataset, K1, K2, options);

    const StereoSection& stereo = *report.stereo;
    std::cout << "stereo calibration:\n"
              << "  rotation_axis_angle: [" << stereo.rotation_axis_angle.x() << ", "
              << stereo.rotation_axis_angle.y() << ", " << stereo.rotation_axis_angle.z()
              << "]\n"
              << "  translation: [" << stereo.translation.x() << ", " << stereo.translation.y()
              << ", " << stereo.translation.z() << "]\n"
              << "  rms_px: " << stereo.rms_px << "\n";
    if (stereo.dropped_pairs > 0) {
        std::cout << "  dropped_pairs: " << stereo.dropped_pairs << "\n";
    }
    if (!output.empty()) {
        save_report(report, output);
        std::cout << "report written to " << output << "\n";
    }
    return 0;
}

int run_report_compare(const std::string& truth_file, const std::string& report_file) {
    const GroundTruth truth = load_truth(truth_file);
    const CalibrationReport report = load_report(report_file);
    bool printed = false;

    if (report.camera) {
        const CameraIntrinsics& est = report.camera->intrinsics;
        const CameraIntrinsics& ref = truth.spec.camera;
        std::cout << "camera:\n";
        std::cout << "  E_fx_px = " << est.fx - ref.fx << "\n";
        std::cout << "  E_fy_px = " << est.fy - ref.fy << "\n";
        std::cout << "  E_cx_px = " << est.cx - ref.cx << "\n";
        std::cout << "  E_cy_px = " << est.cy - ref.cy << "\n";
        const size_t nk = std::min(est.distortion.size(), ref.distortion.size());
        for (size_t i = 0; i < nk; ++i) {
            std::cout << "  E_k" << i + 1 << " = " << est.distortion[i] - ref.distortion[i]
                      << "\n";
        }
        printed = true;
    }

    if (report.housing) {
        if (const auto* dome = std::get_if<DomePort>(&report.housing->port)) {
            const auto* dome_truth = std::get_if<DomePort>(&truth.spec.housing);
            if (!dome_truth) {
                throw CalibrationError(CalibrationError::Code::kValidationError,
                                       "truth has no dome port to compare against");
            }
            std::cout << "dome:\n";
            std::cout << "  E_c_m = " << (dome->decentering - dome_truth->decentering).norm()
                      << "\n";
            printed = true;
        } else {
            const FlatPort& flat = std::get<FlatPort>(report.housing->port);
            const auto* flat_truth = std::get_if<FlatPort>(&truth.spec.housing);
            if (!flat_truth) {
                throw CalibrationError(CalibrationError::Code::kValidationError,
                                       "truth has no flat port to compare against");
            }
            const double cos_eps =
                std::clamp(flat.normal.dot(flat_truth->normal), -1.0, 1.0);
            std::cout << "flat:\n";
            std::cout << "  eps_deg = " << std::acos(cos_eps) * 180.0 / M_PI << "\n";
            std::cout << "  E_r_m = " << std::abs(flat.distance - flat_truth->distance) << "\n";
            printed = true;
        }
    }

    if (report.stereo) {
        if (!truth.spec.stereo_rig) {
            throw CalibrationError(CalibrationError::Code::kValidationError,
                                   "truth has no stereo rig to compare against");
        }
        const Pose est = report.stereo->relative_pose();
        const Pose ref = *truth.spec.stereo_rig;
        const double eps = so3_log(est.R * ref.R.transpose()).norm() * 180.0 / M_PI;
        std::cout << "stereo:\n";
        std::cout << "  eps_deg = " << eps << "\n";
        std::cout << "  E_t_m = " << (est.t - ref.t).norm() << "\n";
        printed = true;
    }

    if (!printed) {
        throw CalibrationError(CalibrationError::Code::kValidationError,
                               "report has no sections to compare");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Camera, underwater-housing and stereo calibration from 2D-3D correspondences"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "Generate a synthetic dataset");
    auto* preset_opt = generate->add_option("--preset", gen.preset_name,
                                            "Built-in scenario (air_table1, dome_table1, "
                                            "flat_table1, stereo_table1)");
    auto* spec_opt =
        generate->add_option("--spec", gen.spec_file, "Scenario file (yaml)")->check(CLI::ExistingFile);
    preset_opt->excludes(spec_opt);
    uint64_t seed_value = 0;
    auto* seed_opt = generate->add_option("--seed", seed_value, "RNG seed (CALIB_SEED overrides)");
    double sigma_value = 0.0;
    auto* sigma_opt = generate->add_option("--sigma", sigma_value, "Pixel noise sigma");
    int views_value = 0;
    auto* views_opt = generate->add_option("--views", views_value, "Number of views");
    generate->add_option("-o,--output", gen.output_dir, "Output directory")->required();

    std::string cc_dataset, cc_model = "radial", cc_output;
    CLI::App* cal_camera = app.add_subcommand("calibrate-camera", "Calibrate camera intrinsics");
    cal_camera->add_option("dataset", cc_dataset, "Dataset directory or file")->required();
    cal_camera->add_option("-m,--model", cc_model,
                           "Camera model (pinhole, simple_radial, radial, full_open)");
    cal_camera->add_option("-o,--output", cc_output, "Report file");

    HousingArgs housing;
    CLI::App* cal_housing =
        app.add_subcommand("calibrate-housing", "Calibrate a flat or dome port");
    cal_housing->add_option("dataset", housing.dataset_path, "Dataset directory or file")
        ->required();
    cal_housing->add_option("--port", housing.port, "Port type")
        ->required()
        ->check(CLI::IsMember({"flat", "dome"}));
    cal_housing->add_option("--intrinsics", housing.intrinsics_file,
                            "Report or truth file with the camera intrinsics")
        ->required();
    cal_housing->add_option("--t-glass", housing.t_glass, "Glass thickness (m)");
    cal_housing->add_option("--mu-air", housing.mu_air, "Refractive index of air");
    cal_housing->add_option("--mu-glass", housing.mu_glass, "Refractive index of glass");
    cal_housing->add_option("--mu-water", housing.mu_water, "Refractive index of water");
    cal_housing->add_option("--r-dome", housing.r_dome, "Dome radius (m)");
    cal_housing->add_option("--init-distance", housing.init_distance,
                            "Initial interface distance (m, flat)");
    cal_housing->add_option("--init-normal", housing.init_normal, "Initial normal (flat)")
        ->expected(3)
        ->delimiter(',');
    cal_housing
        ->add_option("--init-decentering", housing.init_decentering,
                     "Initial decentering (m, dome)")
        ->expected(3)
        ->delimiter(',');
    cal_housing->add_option("--constants-from", housing.constants_from,
                            "Truth file to take the frozen constants from");
    cal_housing->add_flag("--no-optimize-poses", housing.no_optimize_poses,
                          "Keep the pinhole-PnP poses fixed");
    cal_housing->add_option("-o,--output", housing.output, "Report file");

    std::string st_dataset, st_k1, st_k2, st_model = "radial", st_output;
    bool st_fix = false;
    CLI::App* cal_stereo = app.add_subcommand("calibrate-stereo", "Calibrate a stereo rig");
    cal_stereo->add_option("dataset", st_dataset, "Stereo dataset directory or file")->required();
    cal_stereo->add_option("--intrinsics1", st_k1, "Camera 1 intrinsics file");
    cal_stereo->add_option("--intrinsics2", st_k2, "Camera 2 intrinsics file");
    cal_stereo->add_flag("--fix-intrinsics", st_fix, "Keep the intrinsics constant");
    cal_stereo->add_option("-m,--model", st_model, "Model for per-camera pre-calibration");
    cal_stereo->add_option("-o,--output", st_output, "Report file");

    std::string rp_truth, rp_report;
    CLI::App* report_cmd = app.add_subcommand("report", "Inspect or compare reports");
    report_cmd->add_option("--compare", rp_truth, "Truth sidecar to compare against")->required();
    report_cmd->add_option("report", rp_report, "Report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (*generate) {
            if (gen.preset_name.empty() && gen.spec_file.empty()) {
                std::cerr << "generate: either --preset or --spec is required\n";
                return 1;
            }
            if (*seed_opt) gen.seed = seed_value;
            if (*sigma_opt) gen.sigma = sigma_value;
            if (*views_opt) gen.views = views_value;
            return run_generate(gen);
        }
        if (*cal_camera) {
            return run_calibrate_camera(cc_dataset, cc_model, cc_output);
        }
        if (*cal_housing) {
            return run_calibrate_housing(housing);
        }
        if (*cal_stereo) {
            return run_calibrate_stereo(st_dataset, st_k1, st_k2, st_fix, st_model, st_output);
        }
        if (*report_cmd) {
            return run_report_compare(rp_truth, rp_report);
        }
    } catch (const CalibrationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
