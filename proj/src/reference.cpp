#include "tcopula/reference.hpp"

#include "tcopula/errors.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace tcopula::reference {

double Record::number(std::size_t i) const {
    if (i >= fields.size()) throw DomainError(table + ": record has no field " + std::to_string(i));
    const std::string& f = fields[i];
    if (f == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || end != f.data() + f.size())
        throw DomainError(table + ": field '" + f + "' is not a number");
    return v;
}

std::vector<Record> parse(std::string_view text) {
    std::vector<Record> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        Record r;
        fields >> r.table;
        for (std::string f; fields >> f;) r.fields.push_back(f);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Record> table(std::string_view id) {
    static const std::vector<Record> all = parse(embedded_text());
    std::vector<Record> out;
    for (const auto& r : all)
        if (r.table == id) out.push_back(r);
    if (out.empty()) throw DomainError("unknown reference table '" + std::string(id) + "'");
    return out;
}

}  // namespace tcopula::reference
