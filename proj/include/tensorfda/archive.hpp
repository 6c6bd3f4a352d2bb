#pragma once

// Versioned JSON model archive. Output is canonical: object keys sorted,
// floating-point numbers written with 17 significant digits, so equal
// archives serialize to equal bytes and load(save(a)) == a bit for bit.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tensorfda/fpca_classifier.hpp"
#include "tensorfda/knot_selection.hpp"

namespace tensorfda {

inline constexpr int kArchiveFormatVersion = 1;

/// Knot-selection outcome for one class.
struct DdkDiagnostics {
    int label = 0;
    StoppingCurve data_curve;
    StoppingCurve noise_curve;
    std::size_t selected = 0;
    KnotCandidateSet knots;

    friend bool operator==(const DdkDiagnostics&, const DdkDiagnostics&) = default;
};

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ModelArchive {
    int format_version = kArchiveFormatVersion;
    ClassifierModel model;
    std::vector<DdkDiagnostics> ddk;
    Provenance provenance;

    friend bool operator==(const ModelArchive&, const ModelArchive&) = default;
};

/// Canonical text of a JSON value (see the file comment). Throws
/// InputError for non-finite numbers.
std::string canonical_dump(const nlohmann::json& value);

/// 64-bit FNV-1a of `data`, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

nlohmann::json to_json(const OrthonormalBasis& basis);
OrthonormalBasis basis_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DensityModel& g);
DensityModel density_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelArchive& archive);
/// Throws VersionError for a format_version other than 1 and FormatError
/// for missing or mistyped fields.
ModelArchive archive_from_json(const nlohmann::json& j);

void save_model(const ModelArchive& archive, const std::filesystem::path& path);
/// Throws FormatError for unreadable or unparsable files.
ModelArchive load_model(const std::filesystem::path& path);

}  // namespace tensorfda
