#include "options.hpp"

#include "tcopula/errors.hpp"
#include "tcopula/reference.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace tcopula::cli {

void SpecOptions::add_to(CLI::App& app) {
    app.add_option("--spec", spec_file, "copula spec JSON file")->check(CLI::ExistingFile);
    app.add_option("--dim", dim, "dimension")->check(CLI::Range(2, 1000));
    app.add_option("--rho", rho, "correlation (all pairs)");
    app.add_option("--dofs", dofs, "comma-separated dofs, one value for all, or 'gaussian'");
}

copula::CopulaSpec SpecOptions::resolve() const {
    if (!spec_file.empty()) {
        std::ifstream in(spec_file);
        Json j;
        try {
            j = Json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw DomainError(spec_file + ": " + e.what());
        }
        return io::spec_from_json(j.contains("spec") ? j.at("spec") : j);
    }
    Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(dim, dim, rho);
    corr.diagonal().setOnes();
    if (dofs == "gaussian") return copula::CopulaSpec::gaussian(corr);
    const std::vector<double> values = parse_list(dofs);
    std::vector<copula::Dof> nus;
    if (values.size() == 1) {
        nus.assign(static_cast<std::size_t>(dim), copula::Dof(values[0]));
    } else if (values.size() == static_cast<std::size_t>(dim)) {
        for (double v : values) nus.emplace_back(v);
    } else {
        throw ShapeError("--dofs needs 1 or " + std::to_string(dim) + " values, got " +
                         std::to_string(values.size()));
    }
    return copula::CopulaSpec::multidof(corr, std::move(nus));
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
            throw DomainError("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw DomainError("empty list");
    return out;
}

risk::MarginModel parse_margin(const std::string& text) {
    if (text == "normal") return risk::MarginModel::standard_normal();
    if (text.rfind("t:", 0) == 0) return risk::MarginModel::student_t(copula::Dof(parse_list(text.substr(2)).at(0)));
    throw DomainError("margin must be 'normal' or 't:<dof>', got '" + text + "'");
}

Json resolved_config(const CLI::App& app) {
    Json config = Json::object();
    std::vector<const CLI::App*> chain;
    for (const CLI::App* a = &app; a != nullptr; a = a->get_parent()) chain.insert(chain.begin(), a);
    for (const CLI::App* a : chain) {
        for (const CLI::Option* opt : a->get_options()) {
            const std::string name = opt->get_single_name();
            if (name.empty() || name == "help" || name == "version" || name == "output" || opt->get_lnames().empty()) continue;
            const bool flag = opt->get_expected_max() == 0;
            if (opt->count() > 0) {
                const auto& r = opt->results();
                if (flag) {
                    config[name] = true;
                } else if (r.size() == 1) {
                    config[name] = r.front();
                } else {
                    config[name] = r;
                }
            } else if (flag) {
                config[name] = false;
            } else if (!opt->get_default_str().empty()) {
                config[name] = opt->get_default_str();
            } else {
                config[name] = nullptr;
            }
        }
    }
    return config;
}

Json envelope(const CLI::App& app, Json result) {
    Json j;
    j["tool"] = "tcopula";
    j["version"] = std::string(version());
    j["command"] = app.get_name();
    j["config"] = resolved_config(app);
    j["result"] = std::move(result);
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace tcopula::cli
