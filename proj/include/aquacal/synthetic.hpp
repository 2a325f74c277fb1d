#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aquacal/camera.hpp"
#include "aquacal/dataset.hpp"
#include "aquacal/housing.hpp"
#include "aquacal/report.hpp"
#include "aquacal/types.hpp"

namespace aquacal {

using HousingTruth = std::variant<std::monostate, FlatPort, DomePort>;

struct PoseSamplerParams {
    double min_distance = 1.0;  // m, camera to target center
    double max_distance = 2.0;
    double max_tilt_deg = 35.0;
};

struct ScenarioSpec {
    CameraIntrinsics camera;
    std::array<int, 2> image_size = {0, 0};
    HousingTruth housing;  // monostate = in-air
    TargetInfo target;
    int n_views = 25;
    PoseSamplerParams sampler;
    double noise_sigma_px = 0.0;
    uint64_t seed = 1;
    std::optional<Pose> stereo_rig;  // camera 2 from camera 1

    void validate() const;
};

// Everything needed to score a calibration run against the generator.
struct GroundTruth {
    ScenarioSpec spec;
    std::vector<PoseEntry> poses;  // camera 1, world -> camera
    std::string note;
};

struct GeneratedDataset {
    ObservationDataset dataset;
    GroundTruth truth;
};

struct GeneratedStereoDataset {
    StereoDataset dataset;
    GroundTruth truth;
};

// Exact forward-model dataset: rejection-sampled poses with the target fully
// in view, observations through the truth projection model, optional i.i.d.
// Gaussian pixel noise. Deterministic given the spec (per-view RNG
// substreams derived from the seed).
GeneratedDataset generate_dataset(const ScenarioSpec& spec);

// Same, for a two-camera rig (spec.stereo_rig must be set; pinhole only).
GeneratedStereoDataset generate_stereo_dataset(const ScenarioSpec& spec);

// Built-in validation scenarios: air_table1, dome_table1, flat_table1,
// stereo_table1. Throws CalibrationError(kUnknownPreset) otherwise.
ScenarioSpec preset(const std::string& name);

std::vector<std::string> preset_names();

}  // namespace aquacal
