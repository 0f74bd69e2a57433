#include "hmimvc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hmimvc {

namespace {

constexpr char kMatrixMagic[4] = {'M', 'V', 'C', '1'};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open matrix file: " + path.string());
    std::vector<double> values;
    index_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        index_t row_cols = 0;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell = trim(cell);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                throw ConfigError("bad number '" + cell + "' at row " + std::to_string(rows) +
                                  " of " + path.string());
            values.push_back(v);
            ++row_cols;
        }
        if (rows == 0) {
            cols = row_cols;
        } else if (row_cols != cols) {
            throw ConfigError("ragged row " + std::to_string(rows) + " in " + path.string() +
                              ": expected " + std::to_string(cols) + " values, got " +
                              std::to_string(row_cols));
        }
        ++rows;
    }
    Matrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

void save_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write matrix file: " + path.string());
    char buf[64];
    for (index_t i = 0; i < m.rows(); ++i) {
        for (index_t j = 0; j < m.cols(); ++j) {
            const int n = std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            if (j) out.put(',');
            out.write(buf, n);
        }
        out.put('\n');
    }
}

Matrix load_matrix_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open matrix file: " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMatrixMagic, 4) != 0)
        throw ConfigError("not a matrix file (bad magic): " + path.string());
    std::uint32_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    if (!in) throw ConfigError("truncated matrix header: " + path.string());
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * 8));
    if (!in) throw ConfigError("truncated matrix data: " + path.string());
    return m;
}

void save_matrix_binary(const Matrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write matrix file: " + path.string());
    out.write(kMatrixMagic, 4);
    const std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
    const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * 8));
}

}  // namespace

Matrix load_matrix(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? load_matrix_csv(path) : load_matrix_binary(path);
}

void save_matrix(const Matrix& m, const std::filesystem::path& path) {
    if (path.extension() == ".csv")
        save_matrix_csv(m, path);
    else
        save_matrix_binary(m, path);
}

std::vector<int> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open labels file: " + path.string());
    std::vector<int> labels;
    std::string line;
    index_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        int v = 0;
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc() || ptr != line.data() + line.size())
            throw ConfigError("bad label '" + line + "' at line " + std::to_string(line_no) +
                              " of " + path.string());
        labels.push_back(v);
    }
    return labels;
}

void save_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write labels file: " + path.string());
    for (int v : labels) out << v << '\n';
}

MultiViewDataset load_dataset(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("cannot open manifest: " + manifest_path.string());
    const auto base = manifest_path.parent_path();

    std::vector<std::string> view_files;
    std::vector<index_t> declared_dims;
    std::string labels_file;
    int declared_classes = -1;

    std::string line;
    index_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("manifest line " + std::to_string(line_no) + " is not key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.rfind("view", 0) == 0 && key.find("_dim") != std::string::npos) {
            const index_t k = std::stoul(key.substr(4, key.find('_') - 4));
            if (declared_dims.size() < k) declared_dims.resize(k, 0);
            declared_dims[k - 1] = std::stoul(value);
        } else if (key.rfind("view", 0) == 0) {
            const index_t k = std::stoul(key.substr(4));
            if (view_files.size() < k) view_files.resize(k);
            view_files[k - 1] = value;
        } else if (key == "labels") {
            labels_file = value;
        } else if (key == "classes") {
            declared_classes = std::stoi(value);
        } else {
            throw ConfigError("unknown manifest key '" + key + "' at line " +
                              std::to_string(line_no));
        }
    }
    if (view_files.empty()) throw ConfigError("manifest has no views: " + manifest_path.string());
    if (labels_file.empty())
        throw ConfigError("manifest has no labels entry: " + manifest_path.string());

    MultiViewDataset ds;
    for (index_t v = 0; v < view_files.size(); ++v) {
        if (view_files[v].empty())
            throw ConfigError("manifest is missing view" + std::to_string(v + 1));
        ds.views.push_back(load_matrix(base / view_files[v]));
        if (v < declared_dims.size() && declared_dims[v] != 0 &&
            declared_dims[v] != ds.views.back().cols())
            throw ConfigError("view" + std::to_string(v + 1) + " (" + view_files[v] +
                              ") has " + std::to_string(ds.views.back().cols()) +
                              " features, manifest declares " + std::to_string(declared_dims[v]));
    }
    ds.labels = load_labels(base / labels_file);

    const index_t n = ds.labels.size();
    for (index_t v = 0; v < ds.views.size(); ++v)
        if (ds.views[v].rows() != n)
            throw ConfigError("view" + std::to_string(v + 1) + " (" + view_files[v] + ") has " +
                              std::to_string(ds.views[v].rows()) + " rows, labels file has " +
                              std::to_string(n));

    int max_label = -1;
    for (index_t i = 0; i < n; ++i) {
        if (ds.labels[i] < 0)
            throw ConfigError("negative label at row " + std::to_string(i));
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.n_classes = declared_classes >= 0 ? declared_classes : max_label + 1;
    if (max_label >= ds.n_classes)
        throw ConfigError("label " + std::to_string(max_label) + " out of range [0, " +
                          std::to_string(ds.n_classes) + ")");
    std::vector<bool> present(ds.n_classes, false);
    for (int l : ds.labels) present[l] = true;
    for (int c = 0; c < ds.n_classes; ++c)
        if (!present[c]) throw ConfigError("class " + std::to_string(c) + " has no samples");
    return ds;
}

void save_manifest(const std::filesystem::path& manifest_path,
                   const std::vector<std::string>& view_files,
                   const std::vector<index_t>& view_dims, const std::string& labels_file,
                   int n_classes) {
    std::ofstream out(manifest_path);
    if (!out) throw ConfigError("cannot write manifest: " + manifest_path.string());
    out << "# hmimvc dataset manifest\n";
    for (index_t v = 0; v < view_files.size(); ++v) {
        out << "view" << (v + 1) << " = " << view_files[v] << '\n';
        out << "view" << (v + 1) << "_dim = " << view_dims[v] << '\n';
    }
    out << "labels = " << labels_file << '\n';
    out << "classes = " << n_classes << '\n';
}

Normalization normalize(MultiViewDataset& ds) {
    Normalization norm;
    for (auto& view : ds.views) {
        Vector mins(view.cols(), 0.0), ranges(view.cols(), 0.0);
        for (index_t j = 0; j < view.cols(); ++j) {
            double lo = view(0, j), hi = view(0, j);
            for (index_t i = 1; i < view.rows(); ++i) {
                lo = std::min(lo, view(i, j));
                hi = std::max(hi, view(i, j));
            }
            mins[j] = lo;
            ranges[j] = hi - lo;
        }
        norm.mins.push_back(std::move(mins));
        norm.ranges.push_back(std::move(ranges));
    }
    apply_normalization(ds, norm);
    return norm;
}

void apply_normalization(MultiViewDataset& ds, const Normalization& norm) {
    if (norm.mins.size() != ds.views.size())
        throw ConfigError("normalization parameters cover " + std::to_string(norm.mins.size()) +
                          " views, dataset has " + std::to_string(ds.views.size()));
    for (index_t v = 0; v < ds.views.size(); ++v) {
        auto& view = ds.views[v];
        const auto& mins = norm.mins[v];
        const auto& ranges = norm.ranges[v];
        if (mins.size() != view.cols())
            throw ConfigError("normalization width mismatch on view " + std::to_string(v + 1));
        for (index_t j = 0; j < view.cols(); ++j) {
            const double inv = ranges[j] > 0.0 ? 1.0 / ranges[j] : 0.0;
            for (index_t i = 0; i < view.rows(); ++i)
                view(i, j) = (view(i, j) - mins[j]) * inv;
        }
    }
}

}  // namespace hmimvc
