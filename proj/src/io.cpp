#include "tensorfda/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tensorfda/errors.hpp"

namespace tensorfda {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t offset, const std::filesystem::path& path) {
    if (offset + 4 > b.size()) {
        throw FormatError(path.string() + ": truncated header at byte offset " + std::to_string(offset));
    }
    return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
           (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

void check_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
    if (got != want) {
        char buf[96];
        std::snprintf(buf, sizeof buf, ": bad magic 0x%08x at byte offset 0 (expected 0x%08x)", got, want);
        throw FormatError(path.string() + buf);
    }
}

void put_be32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                       static_cast<char>(v)};
    out.write(b, 4);
}

std::string trim(const std::string& s) {
    const auto lo = s.find_first_not_of(" \t\r");
    if (lo == std::string::npos) return "";
    const auto hi = s.find_last_not_of(" \t\r");
    return s.substr(lo, hi - lo + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_number(const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(v);
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<ImageGrid> read_idx_images(const std::filesystem::path& path) {
    const auto b = read_bytes(path);
    check_magic(read_be32(b, 0, path), kImageMagic, path);
    const std::size_t n = read_be32(b, 4, path);
    const std::size_t rows = read_be32(b, 8, path);
    const std::size_t cols = read_be32(b, 12, path);
    const std::size_t need = 16 + n * rows * cols;
    if (b.size() < need) {
        throw FormatError(path.string() + ": truncated payload at byte offset " + std::to_string(b.size()) +
                          " (expected " + std::to_string(need) + " bytes)");
    }
    std::vector<ImageGrid> out;
    out.reserve(n);
    std::size_t at = 16;
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> p(rows * cols);
        for (double& v : p) v = static_cast<double>(b[at++]) / 255.0;
        out.emplace_back(cols, rows, std::move(p));
    }
    return out;
}

std::vector<int> read_idx_labels(const std::filesystem::path& path) {
    const auto b = read_bytes(path);
    check_magic(read_be32(b, 0, path), kLabelMagic, path);
    const std::size_t n = read_be32(b, 4, path);
    if (b.size() < 8 + n) {
        throw FormatError(path.string() + ": truncated payload at byte offset " + std::to_string(b.size()) +
                          " (expected " + std::to_string(8 + n) + " bytes)");
    }
    std::vector<int> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = b[8 + k];
    return out;
}

LabeledImages load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
    LabeledImages out{read_idx_images(images), read_idx_labels(labels)};
    if (out.images.size() != out.labels.size()) {
        throw FormatError("load_idx: " + std::to_string(out.images.size()) + " images but " +
                          std::to_string(out.labels.size()) + " labels (count at byte offset 4)");
    }
    return out;
}

void write_idx_images(const std::filesystem::path& path, const std::vector<ImageGrid>& images) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    const std::size_t rows = images.empty() ? 0 : images.front().height;
    const std::size_t cols = images.empty() ? 0 : images.front().width;
    put_be32(out, kImageMagic);
    put_be32(out, static_cast<std::uint32_t>(images.size()));
    put_be32(out, static_cast<std::uint32_t>(rows));
    put_be32(out, static_cast<std::uint32_t>(cols));
    for (const auto& img : images) {
        if (img.height != rows || img.width != cols) throw InputError("write_idx_images: images differ in size");
        for (double v : img.pixels) out.put(static_cast<char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
    }
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    put_be32(out, kLabelMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) {
        if (l < 0 || l > 255) throw InputError("write_idx_labels: label out of byte range");
        out.put(static_cast<char>(l));
    }
}

CurveTable read_csv_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    const std::string where = path.string() + ": line ";
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) header = split_cells(line);
    }
    if (header.empty()) throw FormatError(path.string() + ": empty file");
    double probe = 0.0;
    if (parse_number(header.front(), probe) || header.size() < 2) {
        throw FormatError(where + std::to_string(line_no) + ": missing header x,y_1,...,y_m");
    }
    const std::size_t m = header.size() - 1;
    std::vector<double> xs;
    std::vector<std::vector<double>> ys(m);
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_cells(line);
        if (cells.size() != header.size()) {
            throw FormatError(where + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                              " cells, got " + std::to_string(cells.size()));
        }
        double x = 0.0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            if (!parse_number(cells[c], v)) {
                throw FormatError(where + std::to_string(line_no) + ": non-numeric cell '" + cells[c] + "'");
            }
            if (c == 0) {
                x = v;
            } else {
                ys[c - 1].push_back(v);
            }
        }
        if (!xs.empty() && !(x > xs.back())) {
            throw FormatError(where + std::to_string(line_no) + ": x must be strictly increasing");
        }
        xs.push_back(x);
    }
    if (xs.empty()) throw FormatError(path.string() + ": no data rows");
    CurveTable out;
    out.names.assign(header.begin() + 1, header.end());
    for (auto& y : ys) out.samples.push_back(make_sample(xs, std::move(y)));
    return out;
}

std::vector<FunctionalSample> load_csv_curves(const std::filesystem::path& path) {
    return read_csv_table(path).samples;
}

void write_csv_columns(const std::filesystem::path& path, const std::vector<double>& x,
                       const std::vector<std::vector<double>>& columns, const std::vector<std::string>& names) {
    if (names.size() != columns.size()) throw InputError("write_csv_columns: one name per column required");
    for (const auto& c : columns) {
        if (c.size() != x.size()) throw InputError("write_csv_columns: column length differs from x");
    }
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "x";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t r = 0; r < x.size(); ++r) {
        out << format_double(x[r]);
        for (const auto& c : columns) out << ',' << format_double(c[r]);
        out << '\n';
    }
}

void write_csv_curves(const std::filesystem::path& path, const std::vector<FunctionalSample>& samples,
                      const std::vector<std::string>& names) {
    if (samples.empty()) throw InputError("write_csv_curves: no samples");
    std::vector<std::vector<double>> columns;
    for (const auto& s : samples) {
        if (s.dims() != 1 || s.axes[0] != samples.front().axes[0]) {
            throw InputError("write_csv_curves: samples must be 1D and share abscissae");
        }
        columns.push_back(s.values);
    }
    std::vector<std::string> n = names;
    if (n.empty()) {
        for (std::size_t i = 0; i < samples.size(); ++i) n.push_back("y_" + std::to_string(i + 1));
    }
    write_csv_columns(path, samples.front().axes[0], columns, n);
}

}  // namespace tensorfda
