#include "blendmp/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdlib>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace blendmp {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, mode);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return in;
}

[[noreturn]] void parse_error(const fs::path& path, std::size_t line, const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep))
        out.push_back(field);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

double parse_double(const std::string& text, const fs::path& path, std::size_t line) {
    // strtod keeps subnormals that std::stod rejects as out of range.
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (text.empty() || end != begin + text.size() || std::isspace(static_cast<unsigned char>(text.front())))
        parse_error(path, line, "bad number '" + text + "'");
    return v;
}

template <class T>
T to_little_endian(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &v, sizeof(T));
        std::reverse(bytes, bytes + sizeof(T));
        std::memcpy(&v, bytes, sizeof(T));
    }
    return v;
}

}  // namespace

std::string format_trace_row(const TraceRow& row) {
    std::string out = std::to_string(row.iter);
    out += ',' + fmt_double(row.wall_seconds);
    out += ',' + fmt_double(row.f_value);
    out += ',' + fmt_double(row.dual_gap);
    out += ',' + std::to_string(row.n_atoms);
    out += ',';
    out += to_string(row.step_kind);
    out += ',';
    if (row.nmse)
        out += fmt_double(*row.nmse);
    return out;
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& rows) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out << kTraceHeader << '\n';
    for (const TraceRow& row : rows)
        out << format_trace_row(row) << '\n';
}

std::vector<TraceRow> read_trace_csv(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        parse_error(path, 1, "unexpected trace header");
    std::vector<TraceRow> rows;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty())
            continue;
        const auto fields = split(line, ',');
        if (fields.size() != 7)
            parse_error(path, lineno, "expected 7 fields");
        TraceRow row;
        row.iter = static_cast<std::size_t>(parse_double(fields[0], path, lineno));
        row.wall_seconds = parse_double(fields[1], path, lineno);
        row.f_value = parse_double(fields[2], path, lineno);
        row.dual_gap = parse_double(fields[3], path, lineno);
        row.n_atoms = static_cast<std::size_t>(parse_double(fields[4], path, lineno));
        row.step_kind = step_kind_from_string(fields[5]);
        if (!fields[6].empty())
            row.nmse = parse_double(fields[6], path, lineno);
        rows.push_back(row);
    }
    return rows;
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out << "# " << m.rows() << ',' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0)
                out << ',';
            out << fmt_double(m(i, j));
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
        parse_error(path, 1, "missing '# rows,cols' header");
    const auto dims = split(line.substr(2), ',');
    if (dims.size() != 2)
        parse_error(path, 1, "malformed dimensions");
    const auto rows = static_cast<Eigen::Index>(parse_double(dims[0], path, 1));
    const auto cols = static_cast<Eigen::Index>(parse_double(dims[1], path, 1));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const std::size_t lineno = static_cast<std::size_t>(i) + 2;
        if (!std::getline(in, line))
            parse_error(path, lineno, "missing row");
        const auto fields = split(line, ',');
        if (static_cast<Eigen::Index>(fields.size()) != cols)
            parse_error(path, lineno, "expected " + std::to_string(cols) + " fields");
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = parse_double(fields[static_cast<std::size_t>(j)], path, lineno);
    }
    return m;
}

void write_matrix_bin(const fs::path& path, const Matrix& m) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    const std::uint64_t dims[2] = {to_little_endian(static_cast<std::uint64_t>(m.rows())),
                                   to_little_endian(static_cast<std::uint64_t>(m.cols()))};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double v = to_little_endian(m(i, j));
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
}

Matrix read_matrix_bin(const fs::path& path) {
    auto in = open_in(path, std::ios::in | std::ios::binary);
    std::uint64_t dims[2];
    if (!in.read(reinterpret_cast<char*>(dims), sizeof dims))
        throw std::runtime_error(path.string() + ": truncated header");
    const auto rows = static_cast<Eigen::Index>(to_little_endian(dims[0]));
    const auto cols = static_cast<Eigen::Index>(to_little_endian(dims[1]));
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) {
            double v;
            if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
                throw std::runtime_error(path.string() + ": truncated data");
            m(i, j) = to_little_endian(v);
        }
    return m;
}

void write_matrix(const fs::path& path, const Matrix& m) {
    if (path.extension() == ".bin")
        write_matrix_bin(path, m);
    else
        write_matrix_csv(path, m);
}

Matrix read_matrix(const fs::path& path) {
    return path.extension() == ".bin" ? read_matrix_bin(path) : read_matrix_csv(path);
}

void save_split(const fs::path& dir, const SplitData& split, const std::string& format) {
    if (format != "csv" && format != "bin")
        throw std::invalid_argument("matrix format must be csv or bin");
    const std::string ext = "." + format;
    write_matrix(dir / ("A_train" + ext), split.a_train);
    write_matrix(dir / ("y_train" + ext), split.y_train);
    write_matrix(dir / ("A_val" + ext), split.a_val);
    write_matrix(dir / ("y_val" + ext), split.y_val);
    write_matrix(dir / ("A_test" + ext), split.a_test);
    write_matrix(dir / ("y_test" + ext), split.y_test);
    if (split.x_star)
        write_matrix(dir / ("x_star" + ext), *split.x_star);
}

SplitData load_split(const fs::path& dir) {
    const std::string ext = fs::exists(dir / "A_train.bin") ? ".bin" : ".csv";
    auto vec = [&](const std::string& name) -> Vector {
        Matrix m = read_matrix(dir / (name + ext));
        if (m.cols() != 1)
            throw std::runtime_error(name + ": expected a single column");
        return m.col(0);
    };
    SplitData out;
    out.a_train = read_matrix(dir / ("A_train" + ext));
    out.y_train = vec("y_train");
    out.a_val = read_matrix(dir / ("A_val" + ext));
    out.y_val = vec("y_val");
    out.a_test = read_matrix(dir / ("A_test" + ext));
    out.y_test = vec("y_test");
    if (fs::exists(dir / ("x_star" + ext)))
        out.x_star = vec("x_star");
    return out;
}

void write_snapshots_json(const fs::path& path, const std::vector<Snapshot>& snapshots) {
    nlohmann::json doc = nlohmann::json::array();
    for (const Snapshot& s : snapshots) {
        nlohmann::json atoms = nlohmann::json::array();
        for (std::size_t i = 0; i < s.atoms.size(); ++i)
            atoms.push_back({s.atoms[i].index, s.atoms[i].sign, s.coeffs[i]});
        doc.push_back({{"iter", s.iter}, {"atoms", std::move(atoms)}});
    }
    auto out = open_out(path);
    out << doc.dump() << '\n';
}

std::vector<Snapshot> read_snapshots_json(const fs::path& path) {
    auto in = open_in(path);
    const nlohmann::json doc = nlohmann::json::parse(in);
    std::vector<Snapshot> out;
    for (const auto& entry : doc) {
        Snapshot s;
        s.iter = entry.at("iter").get<std::size_t>();
        for (const auto& atom : entry.at("atoms")) {
            s.atoms.push_back({atom.at(0).get<std::size_t>(), atom.at(1).get<int>()});
            s.coeffs.push_back(atom.at(2).get<double>());
        }
        out.push_back(std::move(s));
    }
    return out;
}

DatasetFormat dataset_format_from_string(const std::string& text) {
    if (text == "whitespace")
        return DatasetFormat::whitespace;
    if (text == "libsvm")
        return DatasetFormat::libsvm;
    throw std::invalid_argument("unknown dataset format: " + text);
}

LabeledData load_labeled_dataset(const fs::path& path, DatasetFormat format, std::optional<std::size_t> subsample_m,
                                 std::uint64_t seed) {
    auto in = open_in(path);
    std::vector<double> labels;
    std::vector<std::map<std::size_t, double>> rows;
    std::size_t width = 0;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        std::istringstream ss(line);
        std::string token;
        if (!(ss >> token))
            continue;
        labels.push_back(parse_double(token, path, lineno));
        std::map<std::size_t, double> row;
        std::size_t column = 0;
        while (ss >> token) {
            if (format == DatasetFormat::libsvm) {
                const auto colon = token.find(':');
                if (colon == std::string::npos)
                    parse_error(path, lineno, "expected index:value, got '" + token + "'");
                const double idx = parse_double(token.substr(0, colon), path, lineno);
                if (idx < 1 || idx != static_cast<double>(static_cast<std::size_t>(idx)))
                    parse_error(path, lineno, "feature index must be a positive integer");
                column = static_cast<std::size_t>(idx) - 1;
                row[column] = parse_double(token.substr(colon + 1), path, lineno);
                width = std::max(width, column + 1);
            } else {
                row[column++] = parse_double(token, path, lineno);
            }
        }
        if (format == DatasetFormat::whitespace) {
            if (!rows.empty() && column != width)
                parse_error(path, lineno, "expected " + std::to_string(width) + " features");
            width = column;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || width == 0)
        throw std::runtime_error(path.string() + ": no data");

    const bool zero_one = std::all_of(labels.begin(), labels.end(), [](double y) { return y == 0.0 || y == 1.0; });
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (zero_one)
            labels[i] = labels[i] == 0.0 ? -1.0 : 1.0;
        else if (labels[i] != 1.0 && labels[i] != -1.0)
            throw std::runtime_error(path.string() + ": label on data row " + std::to_string(i + 1) +
                                     " is not in {-1, +1} or {0, 1}");
    }

    std::vector<std::size_t> keep(rows.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
        keep[i] = i;
    if (subsample_m && *subsample_m < rows.size()) {
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < *subsample_m; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, keep.size() - 1);
            std::swap(keep[i], keep[pick(rng)]);
        }
        keep.resize(*subsample_m);
        std::sort(keep.begin(), keep.end());
    }

    LabeledData out;
    out.a = Matrix::Zero(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(width));
    out.labels.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.labels[static_cast<Eigen::Index>(r)] = labels[keep[r]];
        for (const auto& [col, v] : rows[keep[r]])
            out.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = v;
    }
    for (Eigen::Index j = 0; j < out.a.cols(); ++j) {
        const double scale = out.a.col(j).cwiseAbs().maxCoeff();
        if (scale > 0.0)
            out.a.col(j) /= scale;
    }
    return out;
}

}  // namespace blendmp
