#include "aquacal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aquacal {

namespace {

using Code = CalibrationError::Code;

void validate_target(const TargetInfo& target) {
    if (target.type == TargetInfo::Type::kCheckerboard) {
        if (target.rows < 2 || target.cols < 2 || !(target.spacing > 0.0)) {
            throw CalibrationError(Code::kValidationError, "invalid checkerboard target spec");
        }
    }
}

void validate_observations(const TargetInfo& target, const std::vector<Observation>& obs,
                           int view_id) {
    if (obs.size() < 4) {
        throw CalibrationError(Code::kValidationError,
                               "view " + std::to_string(view_id) +
                                   " has fewer than 4 observations");
    }
    for (const Observation& o : obs) {
        if (!o.pixel.allFinite() || !o.point.allFinite()) {
            throw CalibrationError(Code::kValidationError,
                                   "non-finite observation in view " + std::to_string(view_id));
        }
        if (target.type == TargetInfo::Type::kCheckerboard) {
            if (std::abs(o.point.z()) > 1e-12) {
                throw CalibrationError(Code::kValidationError,
                                       "checkerboard point off the Z=0 plane in view " +
                                           std::to_string(view_id));
            }
            // On the grid lattice, relative to the first corner (the grid
            // origin is not pinned to the world origin).
            const double col = (o.point.x() - obs.front().point.x()) / target.spacing;
            const double row = (o.point.y() - obs.front().point.y()) / target.spacing;
            if (std::abs(col - std::round(col)) * target.spacing > 1e-12 ||
                std::abs(row - std::round(row)) * target.spacing > 1e-12) {
                throw CalibrationError(Code::kValidationError,
                                       "checkerboard point off the grid lattice in view " +
                                           std::to_string(view_id));
            }
        }
    }
}

}  // namespace

std::string to_string(TargetInfo::Type type) {
    return type == TargetInfo::Type::kCheckerboard ? "checkerboard" : "generic3d";
}

TargetInfo::Type target_type_from_string(const std::string& name) {
    if (name == "checkerboard") return TargetInfo::Type::kCheckerboard;
    if (name == "generic3d") return TargetInfo::Type::kGeneric3D;
    throw CalibrationError(Code::kSchemaError, "unknown target type '" + name + "'");
}

void ObservationDataset::validate() const {
    validate_target(target);
    if (image_size[0] <= 0 || image_size[1] <= 0) {
        throw CalibrationError(Code::kValidationError, "invalid image size");
    }
    if (views.empty()) {
        throw CalibrationError(Code::kValidationError, "no views found");
    }
    for (const View& view : views) {
        validate_observations(target, view.observations, view.id);
    }
}

void StereoDataset::validate() const {
    validate_target(target);
    if (image_size1[0] <= 0 || image_size1[1] <= 0 || image_size2[0] <= 0 ||
        image_size2[1] <= 0) {
        throw CalibrationError(Code::kValidationError, "invalid image size");
    }
    if (views.size() < 2) {
        throw CalibrationError(Code::kValidationError, "stereo dataset needs at least 2 pairs");
    }
    for (const StereoView& view : views) {
        validate_observations(target, view.cam1, view.id);
        validate_observations(target, view.cam2, view.id);
    }
}

CoverageGrid coverage(const ObservationDataset& dataset, int grid_size) {
    CoverageGrid grid;
    grid.grid_size = grid_size;
    grid.counts.assign(grid_size, std::vector<int>(grid_size, 0));

    const double w = dataset.image_size[0];
    const double h = dataset.image_size[1];
    for (const View& view : dataset.views) {
        for (const Observation& o : view.observations) {
            const double u = o.pixel.x();
            const double v = o.pixel.y();
            if (u < 0.0 || u > w || v < 0.0 || v > h) continue;
            const int col = std::min(static_cast<int>(u * grid_size / w), grid_size - 1);
            const int row = std::min(static_cast<int>(v * grid_size / h), grid_size - 1);
            ++grid.counts[row][col];
        }
    }

    grid.min_count = grid.counts[0][0];
    grid.max_count = grid.counts[0][0];
    grid.empty_cells = 0;
    for (const auto& row : grid.counts) {
        for (int c : row) {
            grid.min_count = std::min(grid.min_count, c);
            grid.max_count = std::max(grid.max_count, c);
            if (c == 0) ++grid.empty_cells;
        }
    }
    return grid;
}

std::string coverage_text(const CoverageGrid& grid) {
    std::ostringstream out;
    for (const auto& row : grid.counts) {
        for (int c : row) {
            if (c == 0) {
                out << '.';
            } else {
                const int level =
                    grid.max_count <= 9 ? c : 1 + c * 8 / std::max(grid.max_count, 1);
                out << std::min(level, 9);
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace aquacal
