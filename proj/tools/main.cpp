#include "options.hpp"
#include "replay.hpp"

#include "tcopula/calibrate/fit.hpp"
#include "tcopula/copula/simulate.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/garch/garch.hpp"
#include "tcopula/io/csv.hpp"
#include "tcopula/io/json.hpp"
#include "tcopula/reference.hpp"
#include "tcopula/risk/risk.hpp"
#include "tcopula/taildep/taildep.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tc = tcopula;
using tcopula::io::Json;

namespace {

long long as_count(double v, const char* what) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 9e15)
        throw tc::DomainError(std::string(what) + " must be a positive integer");
    return static_cast<long long>(v);
}

std::vector<int> parse_groups(const std::string& text) {
    std::vector<int> out;
    if (text.empty()) return out;
    for (double v : tc::cli::parse_list(text)) out.push_back(static_cast<int>(v));
    return out;
}

std::vector<std::string> config_comments(const CLI::App& app) {
    return {"tcopula " + std::string(tc::version()) + " " + app.get_name(),
            "config " + tc::cli::resolved_config(app).dump()};
}

/// Flattened "key  value" listing with numbers at 3 decimals.
void flatten(const Json& j, const std::string& prefix, std::ostringstream& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_array() && !j.empty() && (j.front().is_structured())) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    } else if (j.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f", j.get<double>());
        out << prefix << "  " << buf << "\n";
    } else {
        out << prefix << "  " << j.dump() << "\n";
    }
}

void emit(const CLI::App& app, const tc::cli::GlobalOptions& g, Json result) {
    const Json env = tc::cli::envelope(app, std::move(result));
    if (g.format == "table") {
        std::ostringstream out;
        for (const auto& c : config_comments(app)) out << "# " << c << "\n";
        flatten(env.at("result"), "", out);
        tc::cli::write_text(g.output, out.str());
    } else {
        tc::cli::write_text(g.output, env.dump(2) + "\n");
    }
}

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tc::Error("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw tc::DomainError(path + ": " + e.what());
    }
}

/// Log-likelihood and free parameter count from a fit JSON (bare or inside a report).
std::pair<double, int> fit_summary(const std::string& path) {
    Json j = load_json(path);
    if (j.contains("result")) j = j.at("result");
    if (!j.contains("loglik") || !j.contains("param_order"))
        throw tc::DomainError(path + ": not a fit result (needs 'loglik' and 'param_order')");
    return {j.at("loglik").get<double>(), static_cast<int>(j.at("param_order").size())};
}

int report_numerical(const tc::NumericalError& e) {
    Json d{{"error", "numerical"}, {"message", e.what()}};
    if (const auto* q = dynamic_cast<const tc::QuadratureError*>(&e)) {
        d["best_estimate"] = q->best_estimate();
        d["abs_error_estimate"] = q->abs_error_estimate();
        d["evaluations"] = q->evaluations();
    }
    std::cerr << d.dump() << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"t copula with per-coordinate degrees of freedom", "tcopula"};
    app.set_version_flag("--version", std::string(tc::version()));
    app.set_config("--config", "", "TOML/INI file; command-line flags take precedence");
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();

    tc::cli::GlobalOptions g;
    app.add_option("--threads", g.threads, "worker threads, 0 = available parallelism");
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("-o,--output", g.output, "output path (standard output when empty)");
    app.add_option("--format", g.format, "json or table")->check(CLI::IsMember({"json", "table"}));

    // simulate
    auto* sim = app.add_subcommand("simulate", "draw pseudo-observations to CSV");
    tc::cli::SpecOptions sim_spec;
    sim_spec.add_to(*sim);
    double sim_n = 1000;
    sim->add_option("--n", sim_n, "number of draws");

    // fit
    auto* fit = app.add_subcommand("fit", "maximum-likelihood fit to a CSV of pseudo-observations");
    std::string fit_input, fit_family = "multidof-t", fit_method = "joint", fit_groups, fit_scale = "log";
    bool fit_labels = false, fit_no_se = false, fit_lrt = false;
    double fit_tol = 1e-8;
    fit->add_option("--input", fit_input, "CSV with a header row, one column per coordinate")
        ->required()
        ->check(CLI::ExistingFile);
    fit->add_flag("--label-column", fit_labels, "first column is a text label (for example a date)");
    fit->add_option("--family", fit_family)->check(CLI::IsMember({"gaussian", "standard-t", "grouped-t", "multidof-t"}));
    fit->add_option("--method", fit_method)->check(CLI::IsMember({"joint", "tau-then-dof"}));
    fit->add_option("--groups", fit_groups, "comma-separated group per coordinate (grouped-t)");
    fit->add_option("--dof-scale", fit_scale)->check(CLI::IsMember({"log", "identity"}));
    fit->add_option("--density-tol", fit_tol, "relative tolerance of the density quadrature");
    fit->add_flag("--no-stderr", fit_no_se, "skip the observed information");
    fit->add_flag("--lrt", fit_lrt, "also fit the standard t copula and test it against the fitted family");

    // taildep
    auto* td = app.add_subcommand("taildep", "closed-form tail dependence coefficients");
    tc::cli::SpecOptions td_spec;
    td_spec.add_to(*td);
    bool td_limit = false;
    td->add_flag("--limit", td_limit, "add the numerical limit of C(q, q) / q");

    // asymmetry
    auto* asy = app.add_subcommand("asymmetry", "Monte Carlo tail asymmetry ratios");
    tc::cli::SpecOptions asy_spec;
    asy_spec.add_to(*asy);
    double asy_q = 0.99, asy_n = 1e6;
    asy->add_option("--q", asy_q)->check(CLI::Range(0.5, 1.0));
    asy->add_option("--mc-n", asy_n);

    // risk
    auto* rk = app.add_subcommand("risk", "Monte Carlo VaR and ES, optionally against fitted competitors");
    tc::cli::SpecOptions rk_spec;
    rk_spec.add_to(*rk);
    std::string rk_margin = "normal", rk_weights = "1,-1";
    double rk_q = 0.99, rk_n = 1e6, rk_kfit = 50000;
    bool rk_compare = false, rk_no_md = false;
    rk->add_option("--margin", rk_margin, "normal or t:<dof>");
    rk->add_option("--weights", rk_weights);
    rk->add_option("--q", rk_q)->check(CLI::Range(0.5, 1.0));
    rk->add_option("--mc-n", rk_n);
    rk->add_flag("--compare", rk_compare, "fit gaussian and standard-t copulas to draws from the spec and compare");
    rk->add_option("--k-fit", rk_kfit, "draws used for the competitor fits");
    rk->add_flag("--no-multidof", rk_no_md, "skip refitting the per-coordinate dof copula in --compare");

    // garch-filter
    auto* gf = app.add_subcommand("garch-filter", "GARCH(1,1) filter a price CSV and write PIT pseudo-observations");
    std::string gf_input, gf_residuals, gf_fits;
    bool gf_returns = false;
    double gf_gain = 3.0;
    gf->add_option("--input", gf_input, "CSV with a date column and one column per instrument")
        ->required()
        ->check(CLI::ExistingFile);
    gf->add_flag("--returns", gf_returns, "columns are already returns (no log-differencing)");
    gf->add_option("--residuals", gf_residuals, "also write residuals to this CSV");
    gf->add_option("--fits", gf_fits, "also write the GARCH fits as JSON to this path");
    gf->add_option("--min-loglik-gain", gf_gain, "gain required to keep GARCH dynamics over constant volatility");

    // study
    auto* st = app.add_subcommand("study", "finite-sample or paired small-sample simulation study");
    tc::cli::SpecOptions st_spec;
    st_spec.add_to(*st);
    std::string st_kind = "finite-sample", st_method = "joint", st_margin = "normal", st_reps;
    double st_k = 200, st_n = 50, st_q = 0.99, st_mc = 1e5;
    st->add_option("--kind", st_kind)->check(CLI::IsMember({"finite-sample", "paired"}));
    st->add_option("--k", st_k, "sample size per replicate");
    st->add_option("--n-rep", st_n, "replicates");
    st->add_option("--method", st_method)->check(CLI::IsMember({"joint", "tau-then-dof"}));
    st->add_option("--margin", st_margin, "paired study margin: normal or t:<dof>");
    st->add_option("--q", st_q)->check(CLI::Range(0.5, 1.0));
    st->add_option("--mc-n", st_mc, "paired study draws per VaR/ES evaluation");
    st->add_option("--replicates", st_reps, "also write one CSV row per replicate to this path");

    // lrt
    auto* lr = app.add_subcommand("lrt", "likelihood ratio test of nested fits");
    std::string lr_restricted, lr_full;
    double lr_rll = std::nan(""), lr_fll = std::nan("");
    int lr_df = 0;
    lr->add_option("--restricted", lr_restricted, "fit JSON of the restricted model")->check(CLI::ExistingFile);
    lr->add_option("--full", lr_full, "fit JSON of the full model")->check(CLI::ExistingFile);
    lr->add_option("--restricted-loglik", lr_rll);
    lr->add_option("--full-loglik", lr_fll);
    lr->add_option("--df", lr_df, "degrees of freedom; from the parameter counts when 0");

    // replay
    auto* rp = app.add_subcommand("replay", "recompute a published table with a diff column");
    std::string rp_table, rp_budget = "desk";
    double rp_limit = 0.0;
    rp->add_option("--table", rp_table)->required()->check(CLI::IsMember(tc::cli::replay_tables()));
    rp->add_option("--budget", rp_budget)->check(CLI::IsMember({"desk", "full"}));
    rp->add_option("--time-limit", rp_limit, "seconds, 0 = none; a partial table is marked as such");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (sim->parsed()) {
            const auto spec = sim_spec.resolve();
            const auto sample = tc::copula::simulate(spec, as_count(sim_n, "--n"), g.seed, g.threads);
            tc::io::CsvTable t;
            for (int i = 0; i < spec.dim(); ++i) t.header.push_back("u" + std::to_string(i + 1));
            t.values = sample.data();
            std::ostringstream out;
            tc::io::write_csv(out, t, config_comments(*sim));
            tc::cli::write_text(g.output, out.str());
        } else if (fit->parsed()) {
            const auto table = tc::io::read_csv(fit_input, fit_labels);
            const tc::copula::UniformSample sample(table.values);
            tc::calibrate::FitOptions fo;
            fo.family = tc::calibrate::parse_family(fit_family);
            fo.method = tc::calibrate::parse_method(fit_method);
            fo.groups = parse_groups(fit_groups);
            fo.dof_scale = fit_scale == "identity" ? tc::calibrate::DofScale::identity : tc::calibrate::DofScale::log;
            fo.likelihood.density.rel_tol = fit_tol;
            fo.likelihood.threads = g.threads;
            fo.standard_errors = !fit_no_se;
            const auto result = tc::calibrate::fit_mle(sample, fo);
            Json out = tc::io::to_json(result);
            if (fit_lrt) {
                auto ro = fo;
                ro.family = tc::calibrate::Family::standard_t;
                ro.standard_errors = false;
                const auto restricted = tc::calibrate::fit_mle(sample, ro);
                const int df = static_cast<int>(result.param_order.size() - restricted.param_order.size());
                if (df < 1) throw tc::DomainError("--lrt needs a family with more parameters than standard-t");
                out = Json{{"fit", out},
                           {"restricted", tc::io::to_json(restricted)},
                           {"lrt", tc::io::to_json(tc::calibrate::likelihood_ratio_test(restricted, result, df))}};
            }
            emit(*fit, g, out);
        } else if (td->parsed()) {
            const auto spec = td_spec.resolve();
            Json out = tc::io::to_json(tc::taildep::tail_dependence(spec));
            if (td_limit) out["limit"] = tc::io::to_json(tc::taildep::numerical_tdc_limit(spec));
            emit(*td, g, out);
        } else if (asy->parsed()) {
            const auto spec = asy_spec.resolve();
            emit(*asy, g,
                 tc::io::to_json(tc::taildep::asymmetry(spec, asy_q, as_count(asy_n, "--mc-n"), g.seed, g.threads)));
        } else if (rk->parsed()) {
            const auto spec = rk_spec.resolve();
            const auto w = tc::cli::parse_list(rk_weights);
            if (static_cast<int>(w.size()) != spec.dim())
                throw tc::ShapeError("--weights needs " + std::to_string(spec.dim()) + " values");
            tc::risk::Portfolio p;
            p.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
            p.margins.assign(w.size(), tc::cli::parse_margin(rk_margin));
            const long long n = as_count(rk_n, "--mc-n");
            if (rk_compare) {
                emit(*rk, g,
                     tc::io::to_json(tc::risk::model_risk_study(spec, p, as_count(rk_kfit, "--k-fit"), rk_q, n, g.seed,
                                                                g.threads, !rk_no_md)));
            } else {
                emit(*rk, g, tc::io::to_json(tc::risk::var_es(spec, p, rk_q, n, g.seed, g.threads)));
            }
        } else if (gf->parsed()) {
            const auto prices = tc::io::read_price_csv(gf_input);
            const auto rets = gf_returns ? prices : tc::io::log_returns(prices);
            tc::garch::GarchOptions go;
            go.min_loglik_gain = gf_gain;
            const auto panel = tc::garch::filter_panel(rets.values, static_cast<int>(g.threads), go);
            auto comments = config_comments(*gf);
            Json fits = Json::array();
            for (std::size_t i = 0; i < panel.fits.size(); ++i) {
                const auto& f = panel.fits[i];
                std::ostringstream c;
                c.precision(6);
                c << "garch " << rets.header[i] << ": mu=" << f.mu << " omega=" << f.omega << " alpha=" << f.alpha
                  << " beta=" << f.beta << " loglik=" << f.loglik;
                comments.push_back(c.str());
                Json fj = tc::io::to_json(f);
                fj["series"] = rets.header[i];
                fits.push_back(fj);
            }
            tc::io::CsvTable pit{rets.header, rets.labels, panel.pit, "date"};
            std::ostringstream out;
            tc::io::write_csv(out, pit, comments);
            tc::cli::write_text(g.output, out.str());
            if (!gf_residuals.empty()) {
                std::ostringstream res;
                tc::io::write_csv(res, tc::io::CsvTable{rets.header, rets.labels, panel.residuals, "date"}, comments);
                tc::cli::write_text(gf_residuals, res.str());
            }
            if (!gf_fits.empty()) tc::cli::write_text(gf_fits, tc::cli::envelope(*gf, fits).dump(2) + "\n");
        } else if (st->parsed()) {
            const auto spec = st_spec.resolve();
            const auto k = as_count(st_k, "--k");
            const auto n = as_count(st_n, "--n-rep");
            tc::io::CsvTable reps;
            Json out;
            if (st_kind == "paired") {
                const auto s = tc::risk::paired_small_sample_study(
                    spec, tc::risk::Portfolio::long_short(tc::cli::parse_margin(st_margin)), k, n, st_q,
                    as_count(st_mc, "--mc-n"), g.seed, g.threads);
                out = tc::io::to_json(s);
                reps.header = {"var_t", "var_multidof", "delta_var", "es_t", "es_multidof", "delta_es"};
                reps.values = s.replicates;
            } else {
                const auto s = tc::risk::finite_sample_study(spec, k, n, tc::calibrate::parse_method(st_method), g.seed,
                                                             g.threads);
                out = tc::io::to_json(s);
                for (const auto& p : s.params) reps.header.push_back(p.name);
                reps.values = s.estimates;
            }
            if (!st_reps.empty()) {
                std::ostringstream csv;
                tc::io::write_csv(csv, reps, config_comments(*st));
                tc::cli::write_text(st_reps, csv.str());
            }
            emit(*st, g, out);
        } else if (lr->parsed()) {
            double rll = lr_rll, fll = lr_fll;
            int df = lr_df;
            if (!lr_restricted.empty() || !lr_full.empty()) {
                if (lr_restricted.empty() || lr_full.empty())
                    throw tc::DomainError("--restricted and --full must be given together");
                const auto [r, rp_count] = fit_summary(lr_restricted);
                const auto [f, fp_count] = fit_summary(lr_full);
                rll = r;
                fll = f;
                if (df == 0) df = fp_count - rp_count;
            }
            if (std::isnan(rll) || std::isnan(fll))
                throw tc::DomainError("give --restricted/--full fit files or --restricted-loglik/--full-loglik");
            if (df == 0) df = 1;
            emit(*lr, g, tc::io::to_json(tc::calibrate::likelihood_ratio_test(rll, fll, df)));
        } else if (rp->parsed()) {
            tc::cli::ReplayOptions ro{rp_table, tc::cli::parse_budget(rp_budget), rp_limit, g.seed, g.threads};
            const auto report = tc::cli::replay(ro);
            if (g.format == "json") {
                tc::cli::write_text(g.output, tc::cli::envelope(*rp, tc::cli::to_json(report)).dump(2) + "\n");
            } else {
                std::ostringstream out;
                for (const auto& c : config_comments(*rp)) out << "# " << c << "\n";
                out << tc::cli::format_text(report);
                tc::cli::write_text(g.output, out.str());
            }
        }
    } catch (const tc::NumericalError& e) {
        return report_numerical(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
