#include "tensorfda/archive.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tensorfda/errors.hpp"
#include "tensorfda/io.hpp"

namespace tensorfda {
namespace {

using nlohmann::json;

bool is_scalar_array(const json& j) {
    for (const auto& v : j) {
        if (v.is_structured()) return false;
    }
    return true;
}

void dump_to(const json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            // nlohmann::json objects are std::map backed: keys iterate sorted.
            for (const auto& [key, value] : j.items()) {
                if (!first) out += ",\n";
                first = false;
                out += inner + json(key).dump() + ": ";
                dump_to(value, out, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            if (is_scalar_array(j)) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i > 0) out += ", ";
                    dump_to(j[i], out, indent + 1);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i > 0) out += ",\n";
                out += inner;
                dump_to(j[i], out, indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) throw InputError("canonical_dump: non-finite number");
            std::string s = format_double(v);
            // Keep the value a float on re-parse (this also preserves -0).
            if (s.find_first_of(".eE") == std::string::npos) s += ".0";
            out += s;
            return;
        }
        default: out += j.dump(); return;
    }
}

json matrix_json(const Eigen::MatrixXd& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
        throw FormatError("archive: matrix size does not match its data");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    }
    return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
    const auto data = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
}

json box_json(const Box& b) { return json{{"lo", b.lo}, {"hi", b.hi}}; }
Box box_from(const json& j) { return Box{j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>()}; }

json curve_json(const StoppingCurve& c) {
    return json{{"leaf_counts", c.leaf_counts},
                {"relative_errors", c.relative_errors},
                {"is_noise_reference", c.is_noise_reference}};
}

StoppingCurve curve_from(const json& j) {
    StoppingCurve c;
    c.leaf_counts = j.at("leaf_counts").get<std::vector<std::size_t>>();
    c.relative_errors = j.at("relative_errors").get<std::vector<double>>();
    c.is_noise_reference = j.at("is_noise_reference").get<bool>();
    return c;
}

json class_json(const FpcaClassModel& m) {
    return json{{"label", m.label},
                {"mean", vector_json(m.mean)},
                {"eigenvalues", vector_json(m.eigenvalues)},
                {"eigenvectors", matrix_json(m.eigenvectors)},
                {"retained", m.retained},
                {"density_id", m.density_id},
                {"transform", std::string(to_string(m.transform))}};
}

FpcaClassModel class_from(const json& j) {
    FpcaClassModel m;
    m.label = j.at("label").get<int>();
    m.mean = vector_from(j.at("mean"));
    m.eigenvalues = vector_from(j.at("eigenvalues"));
    m.eigenvectors = matrix_from(j.at("eigenvectors"));
    m.retained = j.at("retained").get<std::size_t>();
    m.density_id = j.at("density_id").get<std::string>();
    m.transform = parse_transform_kind(j.at("transform").get<std::string>());
    return m;
}

template <typename F>
auto as_format_error(const char* where, F&& f) {
    try {
        return f();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatError(std::string(where) + ": " + e.what());
    }
}

}  // namespace

std::string canonical_dump(const json& value) {
    std::string out;
    dump_to(value, out, 0);
    out += "\n";
    return out;
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json to_json(const OrthonormalBasis& basis) {
    const auto knots = basis.spec().knots().values();
    return json{{"knots", std::vector<double>(knots.begin(), knots.end())},
                {"degree", basis.spec().degree()},
                {"boundary", basis.spec().boundary() == Boundary::zero ? "zero" : "free"},
                {"scheme", basis.scheme() == OrthoScheme::dyadic ? "dyadic" : "cholesky"},
                {"change_of_basis", matrix_json(basis.change_of_basis())}};
}

OrthonormalBasis basis_from_json(const json& j) {
    return as_format_error("basis", [&] {
        const std::string boundary = j.at("boundary").get<std::string>();
        const std::string scheme = j.at("scheme").get<std::string>();
        if ((boundary != "zero" && boundary != "free") || (scheme != "dyadic" && scheme != "cholesky")) {
            throw FormatError("archive: unknown boundary or orthonormalization scheme");
        }
        const BasisSpec spec(KnotVector(j.at("knots").get<std::vector<double>>()), j.at("degree").get<int>(),
                             boundary == "zero" ? Boundary::zero : Boundary::free);
        return OrthonormalBasis(spec, matrix_from(j.at("change_of_basis")),
                                scheme == "dyadic" ? OrthoScheme::dyadic : OrthoScheme::cholesky);
    });
}

json to_json(const DensityModel& g) {
    return json{{"domain", box_json(g.domain())},
                {"nodes", g.nodes()},
                {"values", g.values()},
                {"floor", g.floor()},
                {"bandwidth", g.bandwidth()}};
}

DensityModel density_from_json(const json& j) {
    return as_format_error("density", [&] {
        return DensityModel::restore(box_from(j.at("domain")), j.at("nodes").get<std::vector<std::size_t>>(),
                                     j.at("values").get<std::vector<double>>(), j.at("floor").get<double>(),
                                     j.at("bandwidth").get<std::vector<double>>());
    });
}

json to_json(const ClassifierModel& model) {
    json axes = json::array();
    for (const auto& ax : model.basis().axes()) axes.push_back(to_json(ax));
    json classes = json::array();
    for (const auto& c : model.classes()) classes.push_back(class_json(c));
    json densities = json::array();
    for (const auto& g : model.densities()) densities.push_back(to_json(g));
    json warp = nullptr;
    if (model.warp_resolution()) warp = *model.warp_resolution();
    return json{{"basis", json{{"axes", axes}}},
                {"transform", std::string(to_string(model.transform()))},
                {"classes", classes},
                {"densities", densities},
                {"warp_resolution", warp}};
}

ClassifierModel classifier_from_json(const json& j) {
    return as_format_error("classifier", [&] {
        std::vector<OrthonormalBasis> axes;
        for (const auto& a : j.at("basis").at("axes")) axes.push_back(basis_from_json(a));
        std::vector<FpcaClassModel> classes;
        for (const auto& c : j.at("classes")) classes.push_back(class_from(c));
        std::vector<DensityModel> densities;
        for (const auto& g : j.at("densities")) densities.push_back(density_from_json(g));
        std::optional<std::size_t> warp;
        if (!j.at("warp_resolution").is_null()) warp = j.at("warp_resolution").get<std::size_t>();
        return ClassifierModel(TensorBasisSpec(std::move(axes)), parse_transform_kind(j.at("transform").get<std::string>()),
                               std::move(classes), std::move(densities), warp);
    });
}

json to_json(const ModelArchive& archive) {
    json ddk = json::array();
    for (const auto& d : archive.ddk) {
        ddk.push_back(json{{"label", d.label},
                           {"data_curve", curve_json(d.data_curve)},
                           {"noise_curve", curve_json(d.noise_curve)},
                           {"selected", d.selected},
                           {"knots", json{{"dims", d.knots.points.dims},
                                          {"coords", d.knots.points.coords},
                                          {"domain", box_json(d.knots.domain)}}}});
    }
    return json{{"format_version", archive.format_version},
                {"model", to_json(archive.model)},
                {"ddk", ddk},
                {"provenance", json{{"config_hash", archive.provenance.config_hash}, {"seed", archive.provenance.seed}}}};
}

ModelArchive archive_from_json(const json& j) {
    const int version = as_format_error("archive", [&] { return j.at("format_version").get<int>(); });
    if (version != kArchiveFormatVersion) {
        throw VersionError("archive format_version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(kArchiveFormatVersion) + ")");
    }
    return as_format_error("archive", [&] {
        std::vector<DdkDiagnostics> ddk;
        for (const auto& d : j.at("ddk")) {
            DdkDiagnostics x;
            x.label = d.at("label").get<int>();
            x.data_curve = curve_from(d.at("data_curve"));
            x.noise_curve = curve_from(d.at("noise_curve"));
            x.selected = d.at("selected").get<std::size_t>();
            x.knots.points.dims = d.at("knots").at("dims").get<std::size_t>();
            x.knots.points.coords = d.at("knots").at("coords").get<std::vector<double>>();
            x.knots.domain = box_from(d.at("knots").at("domain"));
            ddk.push_back(std::move(x));
        }
        Provenance p{j.at("provenance").at("config_hash").get<std::string>(),
                     j.at("provenance").at("seed").get<std::uint64_t>()};
        return ModelArchive{version, classifier_from_json(j.at("model")), std::move(ddk), std::move(p)};
    });
}

void save_model(const ModelArchive& archive, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << canonical_dump(to_json(archive));
    if (!out) throw FormatError("write failed for " + path.string());
}

ModelArchive load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return archive_from_json(j);
}

}  // namespace tensorfda
