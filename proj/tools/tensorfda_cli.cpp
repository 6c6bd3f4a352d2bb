// tensorfda command line: one verb per pipeline stage.
//
//   tensorfda <verb> [--config file.json] [--seed N] [--out-dir DIR]
//
// Exit codes: 0 success, 2 configuration error, 3 data-format error,
// 4 numerical-conditioning error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tensorfda/archive.hpp"
#include "tensorfda/errors.hpp"
#include "tensorfda/io.hpp"
#include "tensorfda/pipeline.hpp"

using namespace tensorfda;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string model;
};

PipelineConfig load(const Options& o) {
    PipelineConfig c = o.config.empty() ? PipelineConfig{} : load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    return c;
}

fs::path out(const Options& o, const std::string& name) {
    fs::create_directories(o.out_dir);
    return fs::path(o.out_dir) / name;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw FormatError("cannot write " + p.string());
    f << canonical_dump(j);
}

struct Prepared {
    PipelineConfig config;
    Dataset data;
    Split split;
    Dataset train;
};

Prepared prepare(const Options& o) {
    Prepared p;
    p.config = load(o);
    p.data = load_dataset(p.config);
    p.split = split_dataset(p.data.labels, p.config);
    p.train = subset(p.data, p.split.train);
    return p;
}

std::vector<FunctionalSample> of_class(const Dataset& d, int label) {
    std::vector<FunctionalSample> out;
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        if (d.labels[i] == label) out.push_back(d.samples[i]);
    }
    return out;
}

std::vector<DdkDiagnostics> ddk_all(const Prepared& p) {
    std::vector<DdkDiagnostics> out;
    for (int l : distinct_labels(p.train.labels)) out.push_back(run_ddk(of_class(p.train, l), l, p.config));
    return out;
}

void write_knots(const Options& o, const DdkDiagnostics& d) {
    const PointSet& pts = d.knots.points;
    std::ofstream f(out(o, "knots_" + std::to_string(d.label) + ".csv"));
    f << (pts.dims == 1 ? "x\n" : "x,y\n");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = 0; j < pts.dims; ++j) f << (j ? "," : "") << format_double(pts.coords[i * pts.dims + j]);
        f << '\n';
    }
}

int cmd_synth(const Options& o) {
    PipelineConfig c = load(o);
    if (o.seed) c.synthetic.seed = *o.seed;
    const LabeledSamples d = generate_kl_dataset(c.synthetic);
    for (int l : distinct_labels(d.labels)) {
        std::vector<FunctionalSample> s;
        for (std::size_t i = 0; i < d.samples.size(); ++i) {
            if (d.labels[i] == l) s.push_back(d.samples[i]);
        }
        const fs::path p = out(o, "class_" + std::to_string(l) + ".csv");
        write_csv_curves(p, s);
        std::cout << p.string() << ": " << s.size() << " curves\n";
    }
    return 0;
}

int cmd_ddk(const Options& o) {
    const Prepared p = prepare(o);
    for (const auto& d : ddk_all(p)) {
        write_knots(o, d);
        std::cout << "class " << d.label << ": " << d.selected << " knots\n";
    }
    return 0;
}

int cmd_density(const Options& o) {
    const Prepared p = prepare(o);
    const Box domain = p.train.samples.front().domain;
    for (const auto& d : ddk_all(p)) {
        const DensityModel g = class_density(d, domain, p.config);
        write_json(out(o, "density_" + std::to_string(d.label) + ".json"), to_json(g));
        std::cout << "class " << d.label << ": " << d.knots.points.size() << " candidates, bandwidth";
        for (double h : g.bandwidth()) std::cout << ' ' << h;
        std::cout << '\n';
    }
    return 0;
}

int cmd_transform(const Options& o) {
    const Prepared p = prepare(o);
    const Box domain = p.train.samples.front().domain;
    for (const auto& d : ddk_all(p)) {
        const DensityModel g = class_density(d, domain, p.config);
        const CdfModel cdf(g);
        std::vector<FunctionalSample> embedded;
        for (const auto& s : of_class(p.train, d.label)) {
            switch (p.config.transform) {
                case TransformKind::none: embedded.push_back(s); break;
                case TransformKind::state: embedded.push_back(state_transform(s, g)); break;
                case TransformKind::domain:
                    embedded.push_back(domain_transform(s, cdf, p.config.warp_resolution));
                    break;
            }
        }
        if (embedded.front().dims() != 1) {
            std::cout << "class " << d.label << ": 2D samples, nothing written\n";
            continue;
        }
        const fs::path path = out(o, "transformed_" + std::to_string(d.label) + ".csv");
        write_csv_curves(path, embedded);
        std::cout << path.string() << ": " << embedded.size() << " curves (" << to_string(p.config.transform) << ")\n";
    }
    return 0;
}

int cmd_basis(const Options& o) {
    const PipelineConfig c = load(o);
    const Dataset d = load_dataset(c);
    const TensorBasisSpec basis = lattice_basis(c, embedded_domain(c, d.samples.front().domain));
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& ax : basis.axes()) axes.push_back(to_json(ax));
    write_json(out(o, "basis.json"), nlohmann::json{{"axes", axes}});
    std::cout << "basis dimension " << basis.dimension() << '\n';
    return 0;
}

int cmd_train(const Options& o) {
    const Prepared p = prepare(o);
    const TrainingResult r = train_classifier(p.config, p.data, p.split);
    const fs::path path = out(o, "model.json");
    save_model(r.archive, path);
    std::cout << path.string() << ": validation accuracy " << r.validation_accuracy << '\n';
    return 0;
}

ModelArchive model_for(const Options& o) {
    if (o.model.empty()) throw ConfigError("--model is required");
    return load_model(o.model);
}

int cmd_classify(const Options& o) {
    const ModelArchive a = model_for(o);
    const Prepared p = prepare(o);
    const Dataset test = subset(p.data, p.split.test);
    const auto results = classify_batch(test.samples, a.model);
    std::ofstream f(out(o, "predictions.csv"));
    f << "index,label,predicted";
    for (int l : a.model.labels()) f << ",residual_" << l;
    f << '\n';
    for (std::size_t i = 0; i < results.size(); ++i) {
        f << p.split.test[i] << ',' << test.labels[i] << ',' << results[i].label;
        for (double r : results[i].residuals) f << ',' << format_double(r);
        f << '\n';
    }
    std::cout << results.size() << " test samples classified\n";
    return 0;
}

int cmd_eval(const Options& o) {
    const ModelArchive a = model_for(o);
    const Prepared p = prepare(o);
    const Dataset test = subset(p.data, p.split.test);
    const Evaluation e = evaluate(classify_batch(test.samples, a.model), test.labels);
    write_json(out(o, "metrics.json"),
               nlohmann::json{{"test_accuracy", e.accuracy}, {"labels", e.labels}, {"confusion", e.confusion}});
    std::cout << "test accuracy " << e.accuracy << '\n';
    return 0;
}

int cmd_report(const Options& o) {
    const PipelineConfig c = load(o);
    const PipelineReport r = run_pipeline(c, fs::path(o.out_dir));
    for (const auto& p : r.written) std::cout << p.string() << '\n';
    std::cout << "test accuracy " << r.test.accuracy << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional classification with data-driven knots and topology transforms"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;

    struct Verb {
        const char* name;
        const char* help;
        int (*run)(const Options&);
        bool needs_model;
    };
    const Verb verbs[] = {
        {"synth", "write the configured synthetic dataset as CSV", cmd_synth, false},
        {"ddk", "knot selection per class", cmd_ddk, false},
        {"density", "knot densities per class", cmd_density, false},
        {"transform", "embed the training curves with their class density", cmd_transform, false},
        {"basis", "orthonormal lattice basis", cmd_basis, false},
        {"train", "fit and save a model archive", cmd_train, false},
        {"classify", "classify the test split with a saved model", cmd_classify, true},
        {"eval", "test accuracy of a saved model", cmd_eval, true},
        {"report", "run every stage and write all outputs", cmd_report, false},
    };
    for (const auto& v : verbs) {
        CLI::App* sub = app.add_subcommand(v.name, v.help);
        sub->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the split/noise seed");
        sub->add_option("--out-dir", o.out_dir, "output directory");
        if (v.needs_model) sub->add_option("--model", o.model, "model archive")->required()->check(CLI::ExistingFile);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    for (const auto& v : verbs) {
        CLI::App* sub = app.get_subcommand(v.name);
        if (!sub->parsed()) continue;
        if (sub->count("--seed") > 0) o.seed = seed;
        try {
            return v.run(o);
        } catch (const Error& e) {
            std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
            return exit_code(e.kind());
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
    }
    return 0;
}
