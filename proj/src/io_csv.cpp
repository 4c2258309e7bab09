#include "tcopula/io/csv.hpp"

#include "tcopula/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <regex>
#include <sstream>

namespace tcopula::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& text, std::size_t line_no) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc() || ptr != last)
        throw DomainError("csv line " + std::to_string(line_no) + ": cannot parse number '" + text + "'");
    return v;
}

}  // namespace

CsvTable parse_csv(std::istream& in, bool label_column) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::vector<double>> rows;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto fields = split(t);
        if (!have_header) {
            if (label_column) {
                if (fields.size() < 2) throw DomainError("csv header needs a label column and at least one value column");
                table.label_header = fields.front();
                fields.erase(fields.begin());
            }
            table.header = fields;
            have_header = true;
            continue;
        }
        const std::size_t expected = table.header.size() + (label_column ? 1 : 0);
        if (fields.size() != expected)
            throw DomainError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                              " fields, found " + std::to_string(fields.size()));
        std::vector<double> row;
        for (std::size_t i = label_column ? 1 : 0; i < fields.size(); ++i) row.push_back(parse_number(fields[i], line_no));
        if (label_column) table.labels.push_back(fields.front());
        rows.push_back(std::move(row));
    }
    if (!have_header) throw DomainError("csv input is empty");
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return table;
}

CsvTable read_csv(const std::string& path, bool label_column) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open input file '" + path + "'");
    return parse_csv(in, label_column);
}

void write_csv(std::ostream& out, const CsvTable& table, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    const bool labels = !table.labels.empty();
    if (labels) out << (table.label_header.empty() ? "label" : table.label_header) << ',';
    for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
    out << '\n';
    const auto old_precision = out.precision(17);
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        if (labels) out << table.labels[static_cast<std::size_t>(r)] << ',';
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) out << (c ? "," : "") << table.values(r, c);
        out << '\n';
    }
    out.precision(old_precision);
}

CsvTable parse_price_csv(std::istream& in) {
    CsvTable t = parse_csv(in, true);
    if (t.label_header != "date") throw DomainError("price csv: first column must be named 'date'");
    static const std::regex iso(R"(\d{4}-\d{2}-\d{2}([T ][0-9:.]+(Z|[+-]\d{2}:?\d{2})?)?)");
    for (std::size_t i = 0; i < t.labels.size(); ++i)
        if (!std::regex_match(t.labels[i], iso))
            throw DomainError("price csv: row " + std::to_string(i + 1) + " date '" + t.labels[i] +
                              "' is not ISO-8601");
    if (!t.values.allFinite()) throw DomainError("price csv: non-finite value");
    return t;
}

CsvTable read_price_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open input file '" + path + "'");
    return parse_price_csv(in);
}

CsvTable log_returns(const CsvTable& prices) {
    if (prices.values.rows() < 2) throw DomainError("log_returns: need at least two price rows");
    if ((prices.values.array() <= 0.0).any()) throw DomainError("log_returns: prices must be strictly positive");
    CsvTable out;
    out.header = prices.header;
    out.label_header = prices.label_header;
    out.labels.assign(prices.labels.begin() + 1, prices.labels.end());
    const Eigen::Index n = prices.values.rows() - 1;
    out.values = (prices.values.bottomRows(n).array().log() - prices.values.topRows(n).array().log()).matrix();
    return out;
}

}  // namespace tcopula::io
