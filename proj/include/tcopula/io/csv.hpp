#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace tcopula::io {

/// Numeric table with a header row. An optional leading label column (dates) is kept as text.
/// Lines starting with '#' and blank lines are skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::string> labels;
    Eigen::MatrixXd values;
    /// Header of the label column, empty when there is none.
    std::string label_header;
};

/// Parses comma-separated text. With `label_column` the first column is read as text.
/// Throws DomainError naming the line on ragged rows or unparsable numbers.
CsvTable parse_csv(std::istream& in, bool label_column);
CsvTable read_csv(const std::string& path, bool label_column);

/// Writes header and rows with 17 significant digits; `comments` become leading "# " lines.
void write_csv(std::ostream& out, const CsvTable& table, const std::vector<std::string>& comments = {});

/// Price file: a `date` column (ISO-8601) followed by one column per instrument.
CsvTable read_price_csv(const std::string& path);
CsvTable parse_price_csv(std::istream& in);

/// Log-differences of strictly positive prices; the first date is dropped.
CsvTable log_returns(const CsvTable& prices);

}  // namespace tcopula::io
