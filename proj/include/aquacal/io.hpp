#pragma once

#include <filesystem>
#include <string>

#include "aquacal/dataset.hpp"
#include "aquacal/report.hpp"
#include "aquacal/synthetic.hpp"

namespace aquacal {

// File layout: one directory per dataset holding `dataset.yaml` (and, for
// generated data, the `truth.yaml` sidecar). All numeric fields are written
// with 17 significant digits so parse(serialize(x)) == x exactly.

void save_dataset(const ObservationDataset& dataset, const std::filesystem::path& directory);
ObservationDataset load_dataset(const std::filesystem::path& path);

void save_stereo_dataset(const StereoDataset& dataset, const std::filesystem::path& directory);
StereoDataset load_stereo_dataset(const std::filesystem::path& path);

// True if the manifest at `path` (file or dataset directory) declares two
// cameras.
bool dataset_is_stereo(const std::filesystem::path& path);

void save_report(const CalibrationReport& report, const std::filesystem::path& file);
CalibrationReport load_report(const std::filesystem::path& file);

void save_truth(const GroundTruth& truth, const std::filesystem::path& file);
GroundTruth load_truth(const std::filesystem::path& file);

// Scenario for `generate --spec`; accepts a truth sidecar as well (the
// generation fields are a subset of it).
ScenarioSpec load_scenario_spec(const std::filesystem::path& file);

// Intrinsics from either a calibration report (camera section) or a truth
// sidecar (camera block).
CameraIntrinsics load_intrinsics(const std::filesystem::path& file);

}  // namespace aquacal
