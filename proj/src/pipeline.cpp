#include "tensorfda/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "tensorfda/errors.hpp"
#include "tensorfda/io.hpp"

namespace tensorfda {
namespace {

using nlohmann::json;

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw_error(e.kind(), std::string(name) + ": " + e.what());
    }
}

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(std::string("config: '") + section + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError(std::string("config: unknown key '") + key + "' in '" + section + "'");
        }
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

std::vector<double> linspace01(std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t q = 0; q < n; ++q) t[q] = n == 1 ? 0.0 : static_cast<double>(q) / static_cast<double>(n - 1);
    if (n > 1) t.back() = 1.0;
    return t;
}

std::string linearize_name(Linearization l) {
    switch (l) {
        case Linearization::hilbert: return "hilbert";
        case Linearization::column_major: return "column-major";
        case Linearization::grid: return "grid";
    }
    return "hilbert";
}

std::string format_name(DatasetFormat f) {
    switch (f) {
        case DatasetFormat::synthetic: return "synthetic";
        case DatasetFormat::csv: return "csv";
        case DatasetFormat::idx: return "idx";
    }
    return "synthetic";
}

KlClassSpec parse_kl_class(const json& j) {
    check_keys(j, "synthetic.classes", {"label", "mean_center", "mean_width", "mean_height", "eigenvalues", "mode_offset"});
    KlClassSpec c;
    c.label = get_or(j, "label", c.label);
    c.mean_center = get_or(j, "mean_center", c.mean_center);
    c.mean_width = get_or(j, "mean_width", c.mean_width);
    c.mean_height = get_or(j, "mean_height", c.mean_height);
    c.eigenvalues = get_or(j, "eigenvalues", c.eigenvalues);
    c.mode_offset = get_or(j, "mode_offset", c.mode_offset);
    if (!(c.mean_width > 0.0)) throw ConfigError("config: synthetic mean_width must be positive");
    return c;
}

// Portable Fisher-Yates: std::shuffle's draws are implementation-defined.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

PointSet grid_points(const FunctionalSample& s) {
    PointSet p;
    p.dims = s.dims();
    if (s.dims() == 1) {
        p.coords = s.axes[0];
        return p;
    }
    for (double a : s.axes[0]) {
        for (double b : s.axes[1]) {
            const double q[2] = {a, b};
            p.push(q);
        }
    }
    return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << text;
}

}  // namespace

PipelineConfig parse_config(const json& j) {
    check_keys(j, "config",
               {"dataset", "split", "seed", "ddk", "density", "transform", "basis", "warp_resolution", "fpca", "outputs"});
    PipelineConfig c;
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        check_keys(d, "dataset", {"format", "synthetic", "csv", "idx", "gradient", "linearize"});
        const std::string format = get_or<std::string>(d, "format", "synthetic");
        if (format == "synthetic") {
            c.format = DatasetFormat::synthetic;
        } else if (format == "csv") {
            c.format = DatasetFormat::csv;
        } else if (format == "idx") {
            c.format = DatasetFormat::idx;
        } else {
            throw ConfigError("config: unknown dataset format '" + format + "'");
        }
        if (d.contains("synthetic")) {
            const json& s = d.at("synthetic");
            check_keys(s, "synthetic", {"classes", "samples_per_class", "points", "noise_sd", "seed"});
            if (s.contains("classes")) {
                c.synthetic.classes.clear();
                for (const auto& cls : s.at("classes")) c.synthetic.classes.push_back(parse_kl_class(cls));
            }
            c.synthetic.samples_per_class = get_or(s, "samples_per_class", c.synthetic.samples_per_class);
            c.synthetic.points = get_or(s, "points", c.synthetic.points);
            c.synthetic.noise_sd = get_or(s, "noise_sd", c.synthetic.noise_sd);
            c.synthetic.seed = get_or(s, "seed", c.synthetic.seed);
        }
        if (d.contains("csv")) {
            for (const auto& src : d.at("csv")) {
                check_keys(src, "csv", {"path", "label"});
                c.csv.push_back(CsvSource{get_or<std::string>(src, "path", ""), get_or(src, "label", 0)});
            }
        }
        if (d.contains("idx")) {
            const json& x = d.at("idx");
            check_keys(x, "idx", {"images", "labels", "classes", "limit_per_class"});
            c.idx_images = get_or<std::string>(x, "images", "");
            c.idx_labels = get_or<std::string>(x, "labels", "");
            c.idx_classes = get_or(x, "classes", c.idx_classes);
            c.idx_limit_per_class = get_or(x, "limit_per_class", c.idx_limit_per_class);
        }
        c.gradient = get_or(d, "gradient", c.gradient);
        const std::string lin = get_or<std::string>(d, "linearize", "hilbert");
        if (lin == "hilbert") {
            c.linearize = Linearization::hilbert;
        } else if (lin == "column-major") {
            c.linearize = Linearization::column_major;
        } else if (lin == "grid") {
            c.linearize = Linearization::grid;
        } else {
            throw ConfigError("config: unknown linearization '" + lin + "'");
        }
    }
    if (j.contains("split")) {
        const json& s = j.at("split");
        check_keys(s, "split", {"train", "validation", "test"});
        c.train_fraction = get_or(s, "train", c.train_fraction);
        c.validation_fraction = get_or(s, "validation", c.validation_fraction);
        c.test_fraction = get_or(s, "test", c.test_fraction);
    }
    c.seed = get_or(j, "seed", c.seed);
    if (j.contains("ddk")) {
        const json& s = j.at("ddk");
        check_keys(s, "ddk", {"max_leaves", "min_cell_points", "noise_trials", "knot_count"});
        c.max_leaves = get_or(s, "max_leaves", c.max_leaves);
        c.min_cell_points = get_or(s, "min_cell_points", c.min_cell_points);
        c.noise_trials = get_or(s, "noise_trials", c.noise_trials);
        if (s.contains("knot_count") && !s.at("knot_count").is_null()) c.knot_count = get_or<std::size_t>(s, "knot_count", 0);
    }
    if (j.contains("density")) {
        const json& s = j.at("density");
        check_keys(s, "density", {"bandwidth", "floor_fraction", "resolution", "uniform"});
        c.bandwidth = get_or(s, "bandwidth", c.bandwidth);
        c.floor_fraction = get_or(s, "floor_fraction", c.floor_fraction);
        c.density_resolution = get_or(s, "resolution", c.density_resolution);
        c.uniform_density = get_or(s, "uniform", c.uniform_density);
    }
    c.transform = parse_transform_kind(get_or<std::string>(j, "transform", "state"));
    if (j.contains("basis")) {
        const json& s = j.at("basis");
        check_keys(s, "basis", {"degree", "interior_knots", "boundary"});
        c.degree = get_or(s, "degree", c.degree);
        c.interior_knots = get_or(s, "interior_knots", c.interior_knots);
        const std::string b = get_or<std::string>(s, "boundary", "free");
        if (b != "free" && b != "zero") throw ConfigError("config: boundary must be 'free' or 'zero'");
        c.boundary = b == "free" ? Boundary::free : Boundary::zero;
    }
    if (j.contains("warp_resolution") && !j.at("warp_resolution").is_null()) {
        c.warp_resolution = get_or<std::size_t>(j, "warp_resolution", 0);
    }
    if (j.contains("fpca")) {
        const json& s = j.at("fpca");
        check_keys(s, "fpca", {"candidates"});
        c.candidates = get_or(s, "candidates", c.candidates);
    }
    if (j.contains("outputs")) {
        const json& s = j.at("outputs");
        check_keys(s, "outputs", {"svg", "plot_samples"});
        c.svg = get_or(s, "svg", c.svg);
        c.plot_samples = get_or(s, "plot_samples", c.plot_samples);
    }

    if (c.candidates.empty()) throw ConfigError("config: fpca.candidates must not be empty");
    if (c.degree < 0) throw ConfigError("config: basis.degree must be >= 0");
    if (!(c.floor_fraction >= 0.0 && c.floor_fraction < 1.0)) throw ConfigError("config: floor_fraction must be in [0, 1)");
    if (c.max_leaves < 1) throw ConfigError("config: ddk.max_leaves must be >= 1");
    if (c.noise_trials < 1) throw ConfigError("config: ddk.noise_trials must be >= 1");
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    PipelineConfig c = parse_config(j);
    const auto base = path.parent_path();
    auto resolve = [&](std::filesystem::path& p) {
        if (!p.empty() && p.is_relative()) p = base / p;
    };
    for (auto& s : c.csv) resolve(s.path);
    resolve(c.idx_images);
    resolve(c.idx_labels);
    return c;
}

json config_to_json(const PipelineConfig& c) {
    json classes = json::array();
    for (const auto& k : c.synthetic.classes) {
        classes.push_back(json{{"label", k.label},
                               {"mean_center", k.mean_center},
                               {"mean_width", k.mean_width},
                               {"mean_height", k.mean_height},
                               {"eigenvalues", k.eigenvalues},
                               {"mode_offset", k.mode_offset}});
    }
    json csv = json::array();
    for (const auto& s : c.csv) csv.push_back(json{{"path", s.path.string()}, {"label", s.label}});
    json knot_count = nullptr;
    if (c.knot_count) knot_count = *c.knot_count;
    json warp = nullptr;
    if (c.warp_resolution) warp = *c.warp_resolution;
    return json{
        {"dataset",
         json{{"format", format_name(c.format)},
              {"synthetic", json{{"classes", classes},
                                 {"samples_per_class", c.synthetic.samples_per_class},
                                 {"points", c.synthetic.points},
                                 {"noise_sd", c.synthetic.noise_sd},
                                 {"seed", c.synthetic.seed}}},
              {"csv", csv},
              {"idx", json{{"images", c.idx_images.string()},
                           {"labels", c.idx_labels.string()},
                           {"classes", c.idx_classes},
                           {"limit_per_class", c.idx_limit_per_class}}},
              {"gradient", c.gradient},
              {"linearize", linearize_name(c.linearize)}}},
        {"split", json{{"train", c.train_fraction}, {"validation", c.validation_fraction}, {"test", c.test_fraction}}},
        {"seed", c.seed},
        {"ddk", json{{"max_leaves", c.max_leaves},
                     {"min_cell_points", c.min_cell_points},
                     {"noise_trials", c.noise_trials},
                     {"knot_count", knot_count}}},
        {"density", json{{"bandwidth", c.bandwidth},
                         {"floor_fraction", c.floor_fraction},
                         {"resolution", c.density_resolution},
                         {"uniform", c.uniform_density}}},
        {"transform", std::string(to_string(c.transform))},
        {"basis", json{{"degree", c.degree},
                       {"interior_knots", c.interior_knots},
                       {"boundary", c.boundary == Boundary::free ? "free" : "zero"}}},
        {"warp_resolution", warp},
        {"fpca", json{{"candidates", c.candidates}}},
        {"outputs", json{{"svg", c.svg}, {"plot_samples", c.plot_samples}}},
    };
}

FunctionalSample image_to_sample(const ImageGrid& img, bool gradient, Linearization linearize) {
    const ImageGrid src = gradient ? gradient_image(img) : img;
    switch (linearize) {
        case Linearization::hilbert: return image_to_sequence(src, hilbert_map(hilbert_order_for(src)));
        case Linearization::column_major: return column_major_sequence(src);
        case Linearization::grid: return make_sample_2d(linspace01(src.height), linspace01(src.width), src.pixels);
    }
    throw ConfigError("image_to_sample: unknown linearization");
}

Dataset load_dataset(const PipelineConfig& config) {
    Dataset out;
    switch (config.format) {
        case DatasetFormat::synthetic: {
            auto d = generate_kl_dataset(config.synthetic);
            out.samples = std::move(d.samples);
            out.labels = std::move(d.labels);
            break;
        }
        case DatasetFormat::csv:
            if (config.csv.empty()) throw ConfigError("dataset: csv format needs at least one source");
            for (const auto& src : config.csv) {
                for (auto& s : load_csv_curves(src.path)) {
                    out.samples.push_back(std::move(s));
                    out.labels.push_back(src.label);
                }
            }
            break;
        case DatasetFormat::idx: {
            if (config.idx_images.empty() || config.idx_labels.empty()) {
                throw ConfigError("dataset: idx format needs images and labels paths");
            }
            const LabeledImages raw = load_idx(config.idx_images, config.idx_labels);
            const std::set<int> keep(config.idx_classes.begin(), config.idx_classes.end());
            std::map<int, std::size_t> taken;
            for (std::size_t i = 0; i < raw.images.size(); ++i) {
                const int l = raw.labels[i];
                if (!keep.empty() && !keep.count(l)) continue;
                if (config.idx_limit_per_class > 0 && taken[l] >= config.idx_limit_per_class) continue;
                ++taken[l];
                out.samples.push_back(image_to_sample(raw.images[i], config.gradient, config.linearize));
                out.labels.push_back(l);
            }
            break;
        }
    }
    if (out.samples.empty()) throw InputError("dataset: no samples");
    return out;
}

std::vector<int> distinct_labels(const std::vector<int>& labels) {
    std::vector<int> out = labels;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Split split_dataset(const std::vector<int>& labels, const PipelineConfig& config) {
    const double ft = config.train_fraction;
    const double fv = config.validation_fraction;
    const double fs = config.test_fraction;
    if (!(ft > 0.0) || !(fv > 0.0) || !(fs > 0.0)) throw ConfigError("split: every fraction must be positive");
    if (std::abs(ft + fv + fs - 1.0) > 1e-9) throw ConfigError("split: fractions must sum to 1");
    std::mt19937_64 rng(config.seed);
    Split out;
    for (int label : distinct_labels(labels)) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == label) idx.push_back(i);
        }
        shuffle(idx, rng);
        const std::size_t n = idx.size();
        const auto nt = static_cast<std::size_t>(std::llround(ft * static_cast<double>(n)));
        const auto nv = static_cast<std::size_t>(std::llround(fv * static_cast<double>(n)));
        if (nt < 2 || nv < 1 || nt + nv >= n) {
            throw ConfigError("split: class " + std::to_string(label) + " with " + std::to_string(n) +
                              " samples is too small for the split fractions");
        }
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(nt));
        out.validation.insert(out.validation.end(), idx.begin() + static_cast<std::ptrdiff_t>(nt),
                              idx.begin() + static_cast<std::ptrdiff_t>(nt + nv));
        out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(nt + nv), idx.end());
    }
    return out;
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices) {
    Dataset out;
    for (std::size_t i : indices) {
        out.samples.push_back(data.samples.at(i));
        out.labels.push_back(data.labels.at(i));
    }
    return out;
}

DdkDiagnostics run_ddk(const std::vector<FunctionalSample>& class_samples, int label, const PipelineConfig& config) {
    if (class_samples.empty()) throw InputError("no samples for class " + std::to_string(label));
    const FunctionalSample& first = class_samples.front();
    std::vector<double> mean(first.values.size(), 0.0);
    for (const auto& s : class_samples) {
        if (s.axes != first.axes) throw InputError("class samples must share one grid");
        for (std::size_t q = 0; q < mean.size(); ++q) mean[q] += s.values[q];
    }
    for (double& v : mean) v /= static_cast<double>(class_samples.size());

    const PointSet locations = grid_points(first);
    TreeConfig tc;
    tc.max_leaves = config.max_leaves;
    tc.min_cell_points = config.min_cell_points;
    tc.domain = first.domain;
    DdkDiagnostics out;
    out.label = label;
    const RegressionTree tree = fit_tree(locations, mean, tc);
    out.data_curve = stopping_curve(tree, config.max_leaves);
    // Per-class stream so adding a class does not change the others.
    const std::uint64_t noise_seed = config.seed * 1000003ULL + static_cast<std::uint64_t>(label) + 1;
    out.noise_curve =
        noise_reference_curve(locations, config.max_leaves, config.noise_trials, noise_seed, config.min_cell_points);
    out.selected = config.knot_count ? *config.knot_count : select_knot_count(out.data_curve, out.noise_curve);
    tc.max_leaves = std::max<std::size_t>(out.selected, 1);
    out.knots = extract_knots(fit_tree(locations, mean, tc));
    return out;
}

DensityModel class_density(const DdkDiagnostics& ddk, const Box& domain, const PipelineConfig& config) {
    const double floor = config.floor_fraction / domain.volume();
    if (config.uniform_density || ddk.knots.points.size() < 2) {
        const std::size_t res = config.density_resolution > 0
                                    ? config.density_resolution
                                    : (domain.dims() == 1 ? kDefaultDensityResolution1d : kDefaultDensityResolution2d);
        std::vector<std::size_t> nodes(domain.dims(), res);
        std::size_t total = 1;
        for (std::size_t n : nodes) total *= n;
        return DensityModel(domain, nodes, std::vector<double>(total, 1.0), floor);
    }
    KnotCandidateSet knots = ddk.knots;
    knots.domain = domain;
    DensityOptions opt;
    opt.bandwidth = config.bandwidth;
    opt.floor = floor;
    opt.resolution = config.density_resolution;
    return estimate_density(knots, opt);
}

Box embedded_domain(const PipelineConfig& config, const Box& sample_domain) {
    return config.transform == TransformKind::domain ? Box::unit(sample_domain.dims()) : sample_domain;
}

TensorBasisSpec lattice_basis(const PipelineConfig& config, const Box& domain) {
    std::vector<OrthonormalBasis> axes;
    for (std::size_t j = 0; j < domain.dims(); ++j) {
        const BasisSpec spec(KnotVector::uniform(domain.lo[j], domain.hi[j], config.interior_knots), config.degree,
                             config.boundary);
        axes.push_back(orthonormalize(spec));
    }
    return TensorBasisSpec(std::move(axes));
}

TrainingResult train_classifier(const PipelineConfig& config, const Dataset& data, const Split& split) {
    const Dataset train = subset(data, split.train);
    const Dataset validation = subset(data, split.validation);
    const std::vector<int> labels = distinct_labels(train.labels);
    const Box sample_domain = train.samples.front().domain;

    std::vector<DdkDiagnostics> ddk;
    std::vector<DensityModel> densities;
    std::vector<std::vector<FunctionalSample>> by_class(labels.size());
    for (std::size_t i = 0; i < train.samples.size(); ++i) {
        const auto k = static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), train.labels[i]) -
                                                labels.begin());
        by_class[k].push_back(train.samples[i]);
    }
    stage("ddk", [&] {
        for (std::size_t k = 0; k < labels.size(); ++k) ddk.push_back(run_ddk(by_class[k], labels[k], config));
        return 0;
    });
    stage("density", [&] {
        for (const auto& d : ddk) densities.push_back(class_density(d, sample_domain, config));
        return 0;
    });
    const TensorBasisSpec basis = stage("basis", [&] { return lattice_basis(config, embedded_domain(config, sample_domain)); });

    std::vector<FpcaClassModel> classes;
    stage("fpca", [&] {
        for (std::size_t k = 0; k < labels.size(); ++k) {
            const DensityModel* g = config.transform == TransformKind::none ? nullptr : &densities[k];
            const auto coeffs = embedded_coefficients(by_class[k], basis, config.transform, g, config.warp_resolution);
            FpcaClassModel m = fit_class_fpca(coeffs, labels[k]);
            m.transform = config.transform;
            m.density_id = "g_" + std::to_string(labels[k]);
            const std::size_t top = *std::max_element(config.candidates.begin(), config.candidates.end());
            m.retained = std::min(top, m.stored());
            classes.push_back(std::move(m));
        }
        return 0;
    });

    ClassifierModel model(basis, config.transform, std::move(classes), densities, config.warp_resolution);
    double validation_accuracy = 0.0;
    stage("selection", [&] {
        const auto coeffs = class_coefficients(validation.samples, model);
        // Coordinate ascent over classes, two sweeps.
        for (int sweep = 0; sweep < 2; ++sweep) {
            for (std::size_t k = 0; k < model.class_count(); ++k) {
                std::vector<std::size_t> counts;
                for (const auto& c : model.classes()) counts.push_back(c.retained);
                counts[k] = select_components(model, k, coeffs, validation.labels, config.candidates);
                model = model.with_retained(counts);
            }
        }
        validation_accuracy = evaluate(classify_coefficients(coeffs, model), validation.labels).accuracy;
        return 0;
    });

    const Provenance prov{fnv1a_hex(canonical_dump(config_to_json(config))), config.seed};
    return TrainingResult{ModelArchive{kArchiveFormatVersion, std::move(model), std::move(ddk), prov},
                          validation_accuracy};
}

void write_svg_lines(const std::filesystem::path& path, const std::string& title, const std::vector<double>& x,
                     const std::vector<std::vector<double>>& columns, const std::vector<std::string>& names) {
    const double w = 640;
    const double h = 400;
    const double m = 48;
    double ylo = 0.0;
    double yhi = 0.0;
    bool first = true;
    for (const auto& c : columns) {
        for (double v : c) {
            ylo = first ? v : std::min(ylo, v);
            yhi = first ? v : std::max(yhi, v);
            first = false;
        }
    }
    if (yhi <= ylo) yhi = ylo + 1.0;
    const double xlo = x.empty() ? 0.0 : x.front();
    const double xhi = x.empty() || x.back() <= xlo ? xlo + 1.0 : x.back();
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << m << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    s << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
    for (std::size_t c = 0; c < columns.size(); ++c) {
        s << "<polyline fill=\"none\" stroke=\"" << colors[c % 6] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t r = 0; r < x.size(); ++r) {
            const double px = m + (x[r] - xlo) / (xhi - xlo) * (w - 2 * m);
            const double py = h - m - (columns[c][r] - ylo) / (yhi - ylo) * (h - 2 * m);
            s << px << ',' << py << ' ';
        }
        s << "\"/>\n";
        s << "<text x=\"" << w - m - 120 << "\" y=\"" << m + 16 + 16 * static_cast<double>(c)
          << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << colors[c % 6] << "\">" << names[c]
          << "</text>\n";
    }
    s << "</svg>\n";
    write_text(path, s.str());
}

std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& dir, const ModelArchive& archive,
                                                   const Dataset& test, const PipelineConfig& config) {
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& stem, const std::string& title, const std::vector<double>& x,
                    const std::vector<std::vector<double>>& cols, const std::vector<std::string>& names) {
        const auto csv = dir / (stem + ".csv");
        write_csv_columns(csv, x, cols, names);
        written.push_back(csv);
        if (config.svg) {
            const auto svg = dir / (stem + ".svg");
            write_svg_lines(svg, title, x, cols, names);
            written.push_back(svg);
        }
    };
    const ClassifierModel& model = archive.model;

    // Stopping curves share the leaf-count grid.
    if (!archive.ddk.empty()) {
        std::vector<double> x;
        for (std::size_t m : archive.ddk.front().data_curve.leaf_counts) x.push_back(static_cast<double>(m));
        std::vector<std::vector<double>> cols;
        std::vector<std::string> names;
        for (const auto& d : archive.ddk) {
            cols.push_back(d.data_curve.relative_errors);
            cols.push_back(d.noise_curve.relative_errors);
            names.push_back("data_" + std::to_string(d.label));
            names.push_back("noise_" + std::to_string(d.label));
        }
        emit("stopping_curves", "relative SSE vs leaves", x, cols, names);
    }

    for (std::size_t k = 0; k < model.densities().size(); ++k) {
        const DensityModel& g = model.densities()[k];
        const int label = model.classes()[k].label;
        const std::vector<double> x = g.axis_nodes(0);
        std::vector<std::vector<double>> cols;
        std::vector<std::string> names;
        if (g.dims() == 1) {
            cols.push_back(g.values());
            names.push_back("g");
        } else {
            const std::size_t ny = g.nodes()[1];
            for (std::size_t c = 0; c < ny; ++c) {
                std::vector<double> col;
                for (std::size_t r = 0; r < x.size(); ++r) col.push_back(g.values()[r * ny + c]);
                cols.push_back(std::move(col));
                names.push_back("y_" + std::to_string(c));
            }
        }
        emit("density_" + std::to_string(label), "knot density class " + std::to_string(label), x, cols, names);
    }

    if (model.basis().dims() != 1) return written;
    const OrthonormalBasis& ob = model.basis().axis(0);
    std::vector<double> grid;
    for (std::size_t q = 0; q <= 200; ++q) grid.push_back(ob.spec().a() + (ob.spec().b() - ob.spec().a()) * q / 200.0);
    grid.back() = ob.spec().b();
    auto eval = [&](const Eigen::VectorXd& c, const std::vector<double>& at) {
        const Spline s(ob, c);
        std::vector<double> v;
        for (double t : at) v.push_back(s(t));
        return v;
    };
    for (std::size_t k = 0; k < model.class_count(); ++k) {
        const FpcaClassModel& c = model.classes()[k];
        std::vector<std::vector<double>> cols{eval(c.mean, grid)};
        std::vector<std::string> names{"mean"};
        const std::size_t n = std::min(c.retained, c.stored());
        for (std::size_t i = 0; i < n; ++i) {
            cols.push_back(eval(c.eigenvectors.col(static_cast<Eigen::Index>(i)), grid));
            names.push_back("e_" + std::to_string(i + 1));
        }
        emit("eigenfunctions_" + std::to_string(c.label), "mean and eigenfunctions class " + std::to_string(c.label),
             grid, cols, names);

        // Test samples of this class in its own topology with their
        // eigenspace approximations.
        std::vector<std::vector<double>> scols;
        std::vector<std::string> snames;
        std::vector<double> sx;
        for (std::size_t l = 0; l < test.samples.size() && snames.size() < 2 * config.plot_samples; ++l) {
            if (test.labels[l] != c.label) continue;
            const FunctionalSample e = model.embed(test.samples[l], k);
            if (!sx.empty() && e.axes[0] != sx) continue;
            sx = e.axes[0];
            const Eigen::VectorXd fh = project_eigenspace(model.coefficients(test.samples[l], k), c);
            scols.push_back(e.values);
            scols.push_back(eval(fh, sx));
            snames.push_back("sample_" + std::to_string(l));
            snames.push_back("approx_" + std::to_string(l));
        }
        if (!scols.empty()) {
            emit("approximations_" + std::to_string(c.label), "eigenspace approximations class " + std::to_string(c.label),
                 sx, scols, snames);
        }
    }
    return written;
}

PipelineReport run_pipeline(const PipelineConfig& config, const std::optional<std::filesystem::path>& out_dir) {
    const Dataset data = stage("load", [&] { return load_dataset(config); });
    const Split split = stage("split", [&] { return split_dataset(data.labels, config); });
    PipelineReport report{train_classifier(config, data, split), {}, {}, {}};
    const Dataset test = subset(data, split.test);
    report.test = stage("evaluate", [&] { return evaluate(classify_batch(test.samples, report.training.archive.model), test.labels); });

    const ClassifierModel& model = report.training.archive.model;
    json retained = json::array();
    json knots = json::array();
    for (const auto& c : model.classes()) retained.push_back(c.retained);
    for (const auto& d : report.training.archive.ddk) knots.push_back(d.selected);
    report.metrics = json{{"test_accuracy", report.test.accuracy},
                          {"validation_accuracy", report.training.validation_accuracy},
                          {"labels", report.test.labels},
                          {"confusion", report.test.confusion},
                          {"retained", retained},
                          {"selected_knots", knots},
                          {"transform", std::string(to_string(config.transform))},
                          {"n_train", split.train.size()},
                          {"n_validation", split.validation.size()},
                          {"n_test", split.test.size()},
                          {"config_hash", report.training.archive.provenance.config_hash},
                          {"seed", config.seed}};

    if (out_dir) {
        stage("outputs", [&] {
            std::filesystem::create_directories(*out_dir);
            const auto model_path = *out_dir / "model.json";
            save_model(report.training.archive, model_path);
            report.written.push_back(model_path);
            const auto metrics_path = *out_dir / "metrics.json";
            write_text(metrics_path, canonical_dump(report.metrics));
            report.written.push_back(metrics_path);
            for (auto& p : write_plot_data(*out_dir, report.training.archive, test, config)) report.written.push_back(p);
            return 0;
        });
    }
    return report;
}

}  // namespace tensorfda
