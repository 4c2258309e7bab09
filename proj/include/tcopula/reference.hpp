#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tcopula {

/// Library version, "major.minor.patch".
std::string_view version();

}  // namespace tcopula

namespace tcopula::reference {

/// One whitespace-separated record of the embedded published tables.
struct Record {
    std::string table;
    std::vector<std::string> fields;

    /// Field i as a number ("nan" allowed). Throws DomainError if absent or not numeric.
    double number(std::size_t i) const;
};

/// Raw text of the embedded table file.
std::string_view embedded_text();

/// Parses records, skipping '#' comments and blank lines.
std::vector<Record> parse(std::string_view text);

/// Records of one table id (T1, T1-regions, T2, T3, T4a, T4b, T5a, T5b, T5c, T6a, T6b).
/// Throws DomainError for an unknown id.
std::vector<Record> table(std::string_view id);

}  // namespace tcopula::reference
