#pragma once

// File formats: MNIST-style IDX image/label files and CSV curve tables
// (header `x,y_1,...,y_m`, one abscissa per row).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tensorfda/imaging.hpp"
#include "tensorfda/topology_transform.hpp"

namespace tensorfda {

struct LabeledImages {
    std::vector<ImageGrid> images;
    std::vector<int> labels;
};

/// Big-endian IDX with magic 0x00000803 (unsigned byte images, n x rows x
/// cols); pixels are byte / 255. FormatError with the byte offset on a bad
/// magic number or a truncated payload.
std::vector<ImageGrid> read_idx_images(const std::filesystem::path& path);
/// Magic 0x00000801 (unsigned byte labels, n).
std::vector<int> read_idx_labels(const std::filesystem::path& path);
/// Both files; FormatError when the counts differ.
LabeledImages load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Pixels are stored as round(255 * clamp(v, 0, 1)). All images must share
/// one size.
void write_idx_images(const std::filesystem::path& path, const std::vector<ImageGrid>& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<int>& labels);

struct CurveTable {
    std::vector<std::string> names;  // column names after x
    std::vector<FunctionalSample> samples;
};

/// m samples sharing the x column. FormatError with the line number for a
/// missing header, ragged rows or non-numeric cells.
CurveTable read_csv_table(const std::filesystem::path& path);
std::vector<FunctionalSample> load_csv_curves(const std::filesystem::path& path);

/// Writes 1D samples that share abscissae, 17 significant digits. Column
/// names default to y_1..y_m.
void write_csv_curves(const std::filesystem::path& path, const std::vector<FunctionalSample>& samples,
                      const std::vector<std::string>& names = {});
/// Same from raw columns.
void write_csv_columns(const std::filesystem::path& path, const std::vector<double>& x,
                       const std::vector<std::vector<double>>& columns, const std::vector<std::string>& names);

/// "%.17g".
std::string format_double(double v);

}  // namespace tensorfda
