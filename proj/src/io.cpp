#include "spd/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "spd/format.hpp"

namespace spd {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw Error(Errc::ParseError, "not a number: '" + std::string(s) + "'");
    }
    return v;
}

long parse_int(std::string_view s) {
    s = trim(s);
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw Error(Errc::ParseError, "not an integer: '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> nonblank_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    for (auto line : split(text, '\n')) {
        line = trim(line);
        if (!line.empty() && line.front() != '#') {
            lines.push_back(line);
        }
    }
    return lines;
}

// Reads one matrix block starting at lines[pos]; advances pos.
SpdMatrix read_block(const std::vector<std::string_view>& lines, std::size_t& pos) {
    const long d = parse_int(lines.at(pos));
    if (d < 1) {
        throw Error(Errc::ParseError, "matrix dimension must be positive");
    }
    if (pos + 1 + static_cast<std::size_t>(d) > lines.size()) {
        throw Error(Errc::ParseError, "truncated matrix block");
    }
    std::vector<std::vector<double>> rows;
    for (long i = 0; i < d; ++i) {
        std::vector<double> row;
        for (auto cell : split(lines[pos + 1 + static_cast<std::size_t>(i)], ',')) {
            row.push_back(parse_double(cell));
        }
        rows.push_back(std::move(row));
    }
    pos += 1 + static_cast<std::size_t>(d);
    return make_spd(rows);
}

}  // namespace

json matrix_to_json(const SpdMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.dim(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.dim(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return {{"dim", m.dim()}, {"rows", std::move(rows)}};
}

SpdMatrix matrix_from_json(const json& j) {
    try {
        const auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
        if (j.contains("dim") && j.at("dim").get<std::size_t>() != rows.size()) {
            throw Error(Errc::ParseError, "\"dim\" does not match the number of rows");
        }
        return make_spd(rows);
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, e.what());
    }
}

std::string matrix_to_csv(const SpdMatrix& m) {
    std::ostringstream out;
    out << m.dim() << '\n';
    for (int i = 0; i < m.dim(); ++i) {
        for (int j = 0; j < m.dim(); ++j) {
            out << (j ? "," : "") << format_double(m(i, j));
        }
        out << '\n';
    }
    return out.str();
}

SpdMatrix matrix_from_csv(std::string_view text) {
    const auto lines = nonblank_lines(text);
    if (lines.empty()) {
        throw Error(Errc::ParseError, "empty matrix CSV");
    }
    std::size_t pos = 0;
    SpdMatrix m = read_block(lines, pos);
    if (pos != lines.size()) {
        throw Error(Errc::ParseError, "trailing lines after matrix");
    }
    return m;
}

json dataset_to_json(const Dataset& d) {
    json points = json::array();
    for (const auto& p : d.points) {
        points.push_back(matrix_to_json(p));
    }
    json out = {{"points", std::move(points)}};
    if (d.labels) {
        out["labels"] = *d.labels;
    }
    return out;
}

Dataset dataset_from_json(const json& j) {
    Dataset d;
    try {
        for (const auto& p : j.at("points")) {
            d.points.push_back(matrix_from_json(p));
        }
        if (j.contains("labels") && !j.at("labels").is_null()) {
            d.labels = j.at("labels").get<std::vector<std::size_t>>();
        }
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, e.what());
    }
    d.validate();
    return d;
}

std::string dataset_to_csv(const Dataset& d) {
    std::string out;
    for (const auto& p : d.points) {
        out += matrix_to_csv(p);
    }
    return out;
}

Dataset dataset_from_csv(std::string_view text) {
    const auto lines = nonblank_lines(text);
    Dataset d;
    std::size_t pos = 0;
    while (pos < lines.size()) {
        d.points.push_back(read_block(lines, pos));
    }
    d.validate();
    return d;
}

json cluster_model_to_json(const ClusterModel& model) {
    json centroids = json::array();
    for (const auto& c : model.centroids) {
        centroids.push_back(matrix_to_json(c));
    }
    json out = {{"k", model.k}, {"assignment", model.assignment}, {"centroids", std::move(centroids)}};
    out["bic"] = model.bic ? json(*model.bic) : json(nullptr);
    return out;
}

std::string accuracy_csv_header() {
    return "points_identified,clusters_identified,clusters_lost";
}

std::string accuracy_csv_row(const AccuracyReport& r) {
    return std::to_string(r.points_identified) + "," + std::to_string(r.clusters_identified) + "," +
           std::to_string(r.clusters_lost);
}

std::string cone_csv_row(const SpdMatrix& m) {
    const ConePoint p = cone_projection(m);
    return format_double(p.x) + "," + format_double(p.y) + "," + format_double(p.z);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::InvalidArgument, "cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(Errc::InvalidArgument, "cannot write " + path);
    }
    out << text;
}

Dataset load_dataset(const std::string& path) {
    const std::string text = read_text_file(path);
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
        return dataset_from_csv(text);
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, e.what());
    }
    return dataset_from_json(j);
}

}  // namespace spd
