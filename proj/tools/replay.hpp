#pragma once

#include "tcopula/io/json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tcopula::cli {

using io::Json;

enum class Budget { desk, full };

struct ReplayBlock {
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct ReplayCheck {
    std::string description;
    bool passed = false;
};

struct ReplayReport {
    std::string table;
    Budget budget = Budget::desk;
    std::vector<std::string> notes;
    std::vector<ReplayBlock> blocks;
    std::vector<ReplayCheck> checks;
    int cells_done = 0;
    int cells_total = 0;
    bool complete() const { return cells_done == cells_total; }
};

struct ReplayOptions {
    std::string table;
    Budget budget = Budget::desk;
    /// Seconds; 0 disables the limit. Checked between cells.
    double time_limit = 0.0;
    std::uint64_t seed = 42;
    unsigned threads = 0;
};

/// Table ids T1, T2, T4a, T4b, T5a, T5b, T5c, T6a, T6b.
const std::vector<std::string>& replay_tables();
Budget parse_budget(const std::string& text);
const char* to_string(Budget budget);

ReplayReport replay(const ReplayOptions& options);

/// Aligned text: "# " notes, blocks, check lines and a final "# status:" completion marker.
std::string format_text(const ReplayReport& report);
Json to_json(const ReplayReport& report);

}  // namespace tcopula::cli
