#pragma once

#include "tcopula/copula/spec.hpp"
#include "tcopula/io/json.hpp"
#include "tcopula/risk/risk.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace tcopula::cli {

using io::Json;

struct GlobalOptions {
    unsigned threads = 0;
    std::uint64_t seed = 42;
    std::string output;
    std::string format = "json";
};

/// Copula given either as a JSON file or as --dim/--rho/--dofs (equicorrelation for dim > 2).
struct SpecOptions {
    std::string spec_file;
    int dim = 2;
    double rho = 0.0;
    std::string dofs = "gaussian";

    void add_to(CLI::App& app);
    copula::CopulaSpec resolve() const;
};

/// "normal" or "t:<nu>".
risk::MarginModel parse_margin(const std::string& text);
std::vector<double> parse_list(const std::string& text);

/// Options of `app` and its parents by long name: given value, else default, else null.
/// The output path is left out so artifacts do not depend on where they are written.
Json resolved_config(const CLI::App& app);

/// {"tool", "version", "command", "config", "result"} wrapper.
Json envelope(const CLI::App& app, Json result);

/// Writes to `path`, or standard output when empty.
void write_text(const std::string& path, const std::string& text);

}  // namespace tcopula::cli
