#pragma once

#include <array>
#include <string>
#include <vector>

#include "aquacal/types.hpp"

namespace aquacal {

struct TargetInfo {
    enum class Type { kCheckerboard, kGeneric3D };
    Type type = Type::kCheckerboard;
    int rows = 0;
    int cols = 0;
    double spacing = 0.0;  // m
};

std::string to_string(TargetInfo::Type type);
TargetInfo::Type target_type_from_string(const std::string& name);

struct Observation {
    Pixel pixel = Pixel::Zero();
    Vec3 point = Vec3::Zero();  // target/world coordinates, m
};

struct View {
    int id = 0;
    std::vector<Observation> observations;
};

struct ObservationDataset {
    TargetInfo target;
    std::array<int, 2> image_size = {0, 0};  // w, h px
    std::vector<View> views;

    // Throws CalibrationError(kValidationError) on breach: at least one
    // view, >= 4 observations per view, checkerboard points on the Z = 0
    // grid lattice.
    void validate() const;
};

struct StereoView {
    int id = 0;
    std::vector<Observation> cam1;
    std::vector<Observation> cam2;
};

struct StereoDataset {
    TargetInfo target;
    std::array<int, 2> image_size1 = {0, 0};
    std::array<int, 2> image_size2 = {0, 0};
    std::vector<StereoView> views;

    void validate() const;
};

// Observation-count histogram over the image plane.
struct CoverageGrid {
    int grid_size = 10;
    std::vector<std::vector<int>> counts;  // [row][col]
    int empty_cells = 0;
    int min_count = 0;
    int max_count = 0;
};

CoverageGrid coverage(const ObservationDataset& dataset, int grid_size = 10);

// Text rendering of the grid (one digit per cell, scaled to the max count).
std::string coverage_text(const CoverageGrid& grid);

}  // namespace aquacal
