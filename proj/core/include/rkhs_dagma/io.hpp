#pragma once

#include "rkhs_dagma/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rkhs_dagma::io {

struct Table {
    std::vector<std::string> header;  ///< empty when the file had none
    Matrix values;
};

/// Numeric table. Fields are separated by commas, or by whitespace when a
/// line has no comma. A first line that does not parse as numbers is the
/// header. Malformed rows raise DataError naming the line.
Table read_table(const std::filesystem::path& path);

/// Header X1..Xd, then rows with 17 significant digits.
void write_matrix(const std::filesystem::path& path, const Matrix& M,
                  const std::vector<std::string>& header = {});

/// Default column names X1..Xd.
std::vector<std::string> default_header(Index d);

/// "src,dst" edge list, 1-indexed.
void write_edge_list(const std::filesystem::path& path, const DirectedGraph& g);

/// Reads a 1-indexed edge list; d defaults to the largest node index seen.
DirectedGraph read_edge_list(const std::filesystem::path& path, Index d = 0);

/// Shortest round-trip decimal form (17 significant digits).
std::string format_double(double v);

}  // namespace rkhs_dagma::io
