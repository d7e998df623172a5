#include "rkhs_dagma/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rkhs_dagma::io {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    if (line.find(',') != std::string::npos) {
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (!line.empty() && line.back() == ',') {
            fields.emplace_back();
        }
    } else {
        std::istringstream ss(line);
        std::string field;
        while (ss >> field) {
            fields.push_back(field);
        }
    }
    for (auto& f : fields) {
        const auto first = f.find_first_not_of(" \t\r\"");
        const auto last = f.find_last_not_of(" \t\r\"");
        f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
    }
    return fields;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) {
        return false;
    }
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (*begin == '+') {
        ++begin;
    }
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    Table table;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) {
            continue;
        }
        const auto fields = split_fields(line);
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (!parse_number(fields[c], row[c])) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (rows.empty() && table.header.empty()) {
                table.header = fields;
                width = fields.size();
                continue;
            }
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": non-numeric field in data row");
        }
        if (width == 0) {
            width = row.size();
        }
        if (row.size() != width) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(width) + " fields, found " +
                            std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < width; ++c) {
            table.values(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
        }
    }
    return table;
}

std::string format_double(double v) {
    char buf[64];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::vector<std::string> default_header(Index d) {
    std::vector<std::string> h;
    for (Index j = 0; j < d; ++j) {
        h.push_back("X" + std::to_string(j + 1));
    }
    return h;
}

void write_matrix(const std::filesystem::path& path, const Matrix& M,
                  const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    const auto names = header.empty() ? default_header(M.cols()) : header;
    for (std::size_t c = 0; c < names.size(); ++c) {
        out << (c ? "," : "") << names[c];
    }
    out << '\n';
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            out << (j ? "," : "") << format_double(M(i, j));
        }
        out << '\n';
    }
    if (!out) {
        throw DataError("failed writing " + path.string());
    }
}

void write_edge_list(const std::filesystem::path& path, const DirectedGraph& g) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "src,dst\n";
    for (Index k = 0; k < g.size(); ++k) {
        for (Index j = 0; j < g.size(); ++j) {
            if (g.has_edge(k, j)) {
                out << (k + 1) << ',' << (j + 1) << '\n';
            }
        }
    }
    if (!out) {
        throw DataError("failed writing " + path.string());
    }
}

DirectedGraph read_edge_list(const std::filesystem::path& path, Index d) {
    const Table t = read_table(path);
    if (t.values.rows() > 0 && t.values.cols() != 2) {
        throw DataError(path.string() + ": edge list needs exactly two columns");
    }
    Index max_node = 0;
    for (Index r = 0; r < t.values.rows(); ++r) {
        for (Index c = 0; c < 2; ++c) {
            const double v = t.values(r, c);
            if (v < 1.0 || v != std::floor(v)) {
                throw DataError(path.string() + ": edge row " + std::to_string(r + 1) +
                                " has an invalid node index");
            }
            max_node = std::max(max_node, static_cast<Index>(v));
        }
    }
    if (d == 0) {
        d = max_node;
    } else if (max_node > d) {
        throw DataError(path.string() + ": node index " + std::to_string(max_node) +
                        " exceeds d = " + std::to_string(d));
    }
    DirectedGraph g(d);
    for (Index r = 0; r < t.values.rows(); ++r) {
        g.add_edge(static_cast<Index>(t.values(r, 0)) - 1, static_cast<Index>(t.values(r, 1)) - 1);
    }
    return g;
}

}  // namespace rkhs_dagma::io
