#include "replay.hpp"

#include "tcopula/detail/parallel.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/numerics/special.hpp"
#include "tcopula/reference.hpp"
#include "tcopula/risk/risk.hpp"
#include "tcopula/taildep/taildep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

namespace tcopula::cli {

namespace {

using copula::CopulaSpec;
using copula::Dof;

std::string fixed(double v, int decimals) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string percent(double v) { return fixed(100.0 * v, 1) + "%"; }

std::string signed_fixed(double v, int decimals) {
    std::string s = fixed(v, decimals);
    if (s == "nan") return s;
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s.front() == '-' ? s : "+" + s;
}

class Clock {
public:
    explicit Clock(double limit) : limit_(limit), start_(std::chrono::steady_clock::now()) {}
    bool expired() const {
        if (limit_ <= 0.0) return false;
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
        return elapsed.count() >= limit_;
    }

private:
    double limit_;
    std::chrono::steady_clock::time_point start_;
};

const CopulaSpec kTruth = CopulaSpec::bivariate(0.9, Dof(2.0), Dof(10.0));
const std::vector<Eigen::Index> kStudySizes{50, 200, 800};

ReplayReport replay_t1(const ReplayOptions& o, const Clock& clock) {
    ReplayReport r;
    const bool full = o.budget == Budget::full;
    const long long mc_n = full ? 10'000'000 : 1'000'000;
    const double tol = full ? 0.02 : 0.06;
    r.notes = {"xi_0.99 for nu1 = 2; mc_n = " + std::to_string(mc_n) + " per cell",
               "tolerance |diff| <= " + fixed(tol, 2)};
    const auto ref = reference::table("T1");
    std::map<std::pair<double, double>, double> published;
    for (const auto& rec : ref) published[{rec.number(0), rec.number(1)}] = rec.number(2);
    const std::vector<double> rhos{0.5, 0.7, 0.9};
    const std::vector<double> nus{3, 4, 5, 6, 8, 10, 15, 20, 50};

    ReplayBlock block{"xi_0.99", {"nu2"}, {}};
    for (double rho : rhos)
        for (const char* c : {"rho=", "se", "ref", "diff"})
            block.columns.push_back(std::string(c) + (c[0] == 'r' ? fixed(rho, 1) : ""));
    r.cells_total = static_cast<int>(rhos.size() * nus.size());
    int within = 0;
    std::optional<taildep::AsymmetryReport> spot;
    for (double nu2 : nus) block.rows.push_back({fixed(nu2, 0)});
    for (std::size_t a = 0; a < rhos.size(); ++a) {
        for (std::size_t b = 0; b < nus.size(); ++b) {
            auto& row = block.rows[b];
            if (clock.expired()) {
                row.insert(row.end(), {"-", "-", fixed(published[{rhos[a], nus[b]}], 3), "-"});
                continue;
            }
            const auto cell = static_cast<std::uint64_t>(a * nus.size() + b);
            const auto rep = taildep::asymmetry(CopulaSpec::bivariate(rhos[a], Dof(2.0), Dof(nus[b])), 0.99, mc_n,
                                                detail::derive_seed(o.seed, cell), o.threads);
            const double p = published[{rhos[a], nus[b]}];
            const double d = rep.xi.value - p;
            if (std::abs(d) <= tol) ++within;
            row.insert(row.end(), {fixed(rep.xi.value, 3), fixed(rep.xi.mc_stderr, 3), fixed(p, 3), signed_fixed(d, 3)});
            if (rhos[a] == 0.7 && nus[b] == 8) spot = rep;
            ++r.cells_done;
        }
    }
    r.blocks.push_back(block);
    r.checks.push_back({"cells within tolerance: " + std::to_string(within) + "/" + std::to_string(r.cells_total),
                        within == r.cells_total});
    if (spot) {
        ReplayBlock regions{"whole-square region ratios at (rho, nu1, nu2) = (0.7, 2, 8)",
                            {"ratio", "estimate", "mc_stderr", "ref", "diff"},
                            {}};
        const auto rr = reference::table("T1-regions");
        for (const auto& rec : rr) {
            const auto& est = rec.fields.at(0) == "pr1_over_pr2" ? spot->pr1_over_pr2 : spot->pr3_over_pr4;
            regions.rows.push_back({rec.fields.at(0), fixed(est.value, 4), fixed(est.mc_stderr, 4),
                                    fixed(rec.number(1), 3), signed_fixed(est.value - rec.number(1), 4)});
            if (full)
                r.checks.push_back({rec.fields.at(0) + " within 0.01", std::abs(est.value - rec.number(1)) <= 0.01});
        }
        r.blocks.push_back(regions);
    }
    return r;
}

ReplayReport replay_t2(const ReplayOptions&, const Clock& clock) {
    ReplayReport r;
    r.notes = {"lambda_L at rho = 0.7 by quadrature", "tolerance |diff| <= 0.001"};
    const std::vector<double> g{2, 3, 4, 5, 6, 8, 10, 15, 20};
    std::map<std::pair<double, double>, double> published;
    for (const auto& rec : reference::table("T2")) published[{rec.number(0), rec.number(1)}] = rec.number(2);
    ReplayBlock est{"lambda_L", {"nu1\\nu2"}, {}};
    ReplayBlock diff{"diff vs published", {"nu1\\nu2"}, {}};
    for (double v : g) {
        est.columns.push_back(fixed(v, 0));
        diff.columns.push_back(fixed(v, 0));
    }
    r.cells_total = static_cast<int>(g.size() * g.size());
    int within = 0;
    double worst = 0.0;
    for (double a : g) {
        std::vector<std::string> er{fixed(a, 0)}, dr{fixed(a, 0)};
        for (double b : g) {
            if (clock.expired()) {
                er.push_back("-");
                dr.push_back("-");
                continue;
            }
            const double v = taildep::lambda_multidof(0.7, Dof(a), Dof(b));
            const double d = v - published[{a, b}];
            worst = std::max(worst, std::abs(d));
            if (std::abs(d) <= 0.001) ++within;
            er.push_back(fixed(v, 3));
            dr.push_back(signed_fixed(d, 4));
            ++r.cells_done;
        }
        est.rows.push_back(er);
        diff.rows.push_back(dr);
    }
    r.blocks = {est, diff};
    r.checks.push_back({"cells within 0.001: " + std::to_string(within) + "/" + std::to_string(r.cells_total) +
                            " (max |diff| " + fixed(worst, 5) + ")",
                        within == r.cells_total});
    return r;
}

double gaussian_var(double rho, double q) { return std::sqrt(2.0 * (1.0 - rho)) * numerics::normal_quantile(q); }
double gaussian_es(double rho, double q) {
    return std::sqrt(2.0 * (1.0 - rho)) * numerics::normal_pdf(numerics::normal_quantile(q)) / (1.0 - q);
}

ReplayReport replay_t4a(const ReplayOptions& o, const Clock& clock) {
    ReplayReport r;
    const long long mc_n = o.budget == Budget::full ? 10'000'000 : 1'000'000;
    const Eigen::Index k_fit = 50'000;
    r.notes = {"true copula (rho, nu1, nu2) = (0.9, 2, 10); standard normal margins; weights (1, -1); q = 0.99",
               "competitors fitted to K = " + std::to_string(k_fit) + " draws; mc_n = " + std::to_string(mc_n),
               "gaussian row referenced to the closed form at the fitted rho; the published 1.285 / 1.475 are "
               "inconsistent with rho = 0.868",
               "standard-t row checked qualitatively (both measures at least 5% below the true model)"};
    r.cells_total = 1;
    if (clock.expired()) return r;
    const auto table = risk::model_risk_study(kTruth, risk::Portfolio::long_short(risk::MarginModel::standard_normal()),
                                              k_fit, 0.99, mc_n, o.seed, o.threads, false);
    std::map<std::string, reference::Record> published;
    for (const auto& rec : reference::table("T4a")) published.emplace(rec.fields.at(0), rec);
    ReplayBlock b{"portfolio 0.99 VaR and ES",
                  {"model", "rho", "nu", "Q", "(Q-Q*)/Q*", "Psi", "(Psi-Psi*)/Psi*", "ref Q", "ref Psi", "source",
                   "diff Q", "diff Psi"},
                  {}};
    const auto& truth = table.rows.front();
    for (const auto& row : table.rows) {
        const std::string key = row.model == "true" ? "multidof-t" : row.model;
        double ref_q = published.at(key).number(1), ref_es = published.at(key).number(3);
        std::string source = "published";
        if (row.spec.is_gaussian()) {
            ref_q = gaussian_var(row.spec.rho(), table.q);
            ref_es = gaussian_es(row.spec.rho(), table.q);
            source = "closed form";
        }
        std::string nu = "-";
        if (!row.spec.is_gaussian()) {
            nu.clear();
            for (const auto& d : row.spec.dofs()) nu += (nu.empty() ? "" : ",") + fixed(d.value(), 2);
        }
        b.rows.push_back({key, fixed(row.spec.rho(), 3), nu, fixed(row.risk.var, 3), percent(row.var_rel_diff),
                          fixed(row.risk.es, 3), percent(row.es_rel_diff), fixed(ref_q, 3), fixed(ref_es, 3), source,
                          signed_fixed(row.risk.var - ref_q, 3), signed_fixed(row.risk.es - ref_es, 3)});
        if (row.model == "true" || row.spec.is_gaussian()) {
            const bool ok = std::abs(row.risk.var / ref_q - 1.0) <= 0.01 && std::abs(row.risk.es / ref_es - 1.0) <= 0.01;
            r.checks.push_back({key + " VaR and ES within 1% of " + source, ok});
        } else {
            const bool ok = row.risk.var <= 0.95 * truth.risk.var && row.risk.es <= 0.95 * truth.risk.es;
            r.checks.push_back({key + " VaR and ES at least 5% below the true model", ok});
        }
    }
    r.blocks.push_back(b);
    r.cells_done = 1;
    return r;
}

ReplayReport replay_t4b(const ReplayOptions& o, const Clock& clock) {
    ReplayReport r;
    const long long mc_n = o.budget == Budget::full ? 10'000'000 : 1'000'000;
    const Eigen::Index k_fit = 50'000;
    r.notes = {"true copula (0.9, 2, 10); t margins with dof nu_m; weights (1, -1); q = 0.99",
               "standard-t copula fitted once to K = " + std::to_string(k_fit) + " draws; mc_n = " +
                   std::to_string(mc_n),
               "checked qualitatively: ES gap negative, shrinking in magnitude as nu_m grows"};
    const std::vector<double> margins{2, 5, 50};
    r.cells_total = static_cast<int>(margins.size());
    if (clock.expired()) return r;
    const auto models = risk::fit_competing_models(kTruth, k_fit, o.seed, o.threads, false);
    std::vector<reference::Record> published = reference::table("T4b");
    ReplayBlock b{"portfolio 0.99 VaR and ES, t margins",
                  {"nu_m", "model", "Q", "(Q-Q*)/Q*", "Psi", "(Psi-Psi*)/Psi*", "ref Q", "ref Psi", "ref ES gap",
                   "diff Q", "diff Psi"},
                  {}};
    std::vector<double> gaps;
    for (double nm : margins) {
        if (clock.expired()) break;
        const auto table = risk::compare_models(models, risk::Portfolio::long_short(risk::MarginModel::student_t(Dof(nm))),
                                                0.99, mc_n, detail::derive_seed(o.seed, 1), o.threads);
        for (const auto& row : table.rows) {
            if (row.model == "gaussian") continue;
            const std::string key = row.model == "true" ? "multidof-t" : row.model;
            const auto it = std::find_if(published.begin(), published.end(), [&](const reference::Record& rec) {
                return rec.number(0) == nm && rec.fields.at(1) == key;
            });
            b.rows.push_back({fixed(nm, 0), key, fixed(row.risk.var, 3), percent(row.var_rel_diff), fixed(row.risk.es, 3),
                              percent(row.es_rel_diff), fixed(it->number(2), 3), fixed(it->number(4), 3),
                              percent(it->number(5)), signed_fixed(row.risk.var - it->number(2), 3),
                              signed_fixed(row.risk.es - it->number(4), 3)});
            if (key == "standard-t") gaps.push_back(row.es_rel_diff);
        }
        ++r.cells_done;
    }
    r.blocks.push_back(b);
    if (gaps.size() == margins.size()) {
        const bool neg = std::all_of(gaps.begin(), gaps.end(), [](double g) { return g < 0.0; });
        const bool ordered = std::abs(gaps[0]) > std::abs(gaps[1]) && std::abs(gaps[1]) > std::abs(gaps[2]);
        r.checks.push_back({"standard-t ES gaps " + percent(gaps[0]) + ", " + percent(gaps[1]) + ", " +
                                percent(gaps[2]) + " negative and shrinking",
                            neg && ordered});
    }
    return r;
}

ReplayReport replay_t5(const ReplayOptions& o, const Clock& clock, const std::string& id) {
    ReplayReport r;
    const bool full = o.budget == Budget::full;
    const long long n = full ? 400 : 50;
    const auto method = id == "T5a" ? calibrate::FitMethod::tau_then_dof : calibrate::FitMethod::joint;
    r.notes = {"true copula (rho, nu1, nu2) = (0.9, 2, 10); N = " + std::to_string(n) + " replicates per K; method " +
               calibrate::to_string(method)};
    if (!full) r.notes.push_back("desk budget: checked for bias decay and sd decay in K only");
    const auto ref = reference::table(id);
    const bool info = id == "T5c";
    ReplayBlock est{info ? "sqrt(ave(Var_mle))" : "finite-sample moments", {"K"}, {}};
    if (info) {
        est.columns.insert(est.columns.end(), {"rho", "nu1", "nu2"});
    } else {
        for (const char* p : {"rho", "nu1", "nu2"})
            for (const char* s : {"E", "sd", "rmse"}) est.columns.push_back(std::string(s) + "[" + p + "]");
    }
    ReplayBlock diff{"diff vs published", est.columns, {}};
    r.cells_total = static_cast<int>(kStudySizes.size());
    std::vector<risk::StudySummary> done;
    for (std::size_t i = 0; i < kStudySizes.size(); ++i) {
        if (clock.expired()) break;
        const auto k = kStudySizes[i];
        const auto s = risk::finite_sample_study(kTruth, k, n, method, detail::derive_seed(o.seed, i), o.threads);
        std::vector<std::string> er{std::to_string(k)}, dr{std::to_string(k)};
        const auto& pub = ref.at(i);
        for (std::size_t p = 0; p < 3; ++p) {
            const auto& ps = s.params.at(p);
            const int dec = p == 0 ? 3 : 2;
            if (info) {
                const double v = ps.sqrt_ave_var_mle.value_or(std::nan(""));
                er.push_back(fixed(v, dec + 1));
                dr.push_back(signed_fixed(v - pub.number(1 + p), dec + 1));
                continue;
            }
            const double vals[3] = {ps.mean, ps.sd, ps.rmse};
            for (std::size_t c = 0; c < 3; ++c) {
                er.push_back(fixed(vals[c], dec + (c > 0 ? 1 : 0)));
                dr.push_back(signed_fixed(vals[c] - pub.number(1 + 3 * p + c), dec + (c > 0 ? 1 : 0)));
            }
        }
        if (s.failures > 0) r.notes.push_back("K = " + std::to_string(k) + ": " + std::to_string(s.failures) +
                                              " replicates excluded (fit failure)");
        est.rows.push_back(er);
        diff.rows.push_back(dr);
        done.push_back(s);
        ++r.cells_done;
    }
    r.blocks = {est, diff};
    if (!info && done.size() == kStudySizes.size()) {
        auto mono = [&](auto get) {
            return get(done[0]) > get(done[1]) && get(done[1]) > get(done[2]);
        };
        r.checks.push_back({"|bias(nu1)| decreasing in K", mono([](const auto& s) { return std::abs(s.params[1].bias); })});
        r.checks.push_back({"|bias(nu2)| decreasing in K", mono([](const auto& s) { return std::abs(s.params[2].bias); })});
        r.checks.push_back({"sd(rho) decreasing in K", mono([](const auto& s) { return s.params[0].sd; })});
        if (method == calibrate::FitMethod::joint) {
            const double rel = std::abs(done[1].params[0].bias) / 0.9;
            r.checks.push_back({"relative bias of rho at K = 200 below 1% (" + percent(rel) + ")", rel < 0.01});
            if (full) {
                const auto& pub = ref.at(2);
                r.checks.push_back({"K = 800 E[nu1] within 0.1 of published",
                                    std::abs(done[2].params[1].mean - pub.number(4)) <= 0.1});
                r.checks.push_back({"K = 800 E[nu2] within 1.5 of published",
                                    std::abs(done[2].params[2].mean - pub.number(7)) <= 1.5});
            }
        }
    }
    return r;
}

ReplayReport replay_t6(const ReplayOptions& o, const Clock& clock, const std::string& id) {
    ReplayReport r;
    const bool full = o.budget == Budget::full;
    const long long n = full ? 400 : 50;
    const long long mc_n = full ? 1'000'000 : 100'000;
    const auto margin = id == "T6a" ? risk::MarginModel::standard_normal() : risk::MarginModel::student_t(Dof(5.0));
    r.notes = {"true copula (0.9, 2, 10); " + margin.describe() + " margins; weights (1, -1); q = 0.99",
               "N = " + std::to_string(n) + " replicates per K, mc_n = " + std::to_string(mc_n) +
                   " per VaR/ES evaluation (common random numbers within a replicate)"};
    const auto ref = reference::table(id);
    ReplayBlock est{"paired study", {"K", "stat", "Q_t", "Q_multidof", "dQ", "Psi_t", "Psi_multidof", "dPsi"}, {}};
    ReplayBlock diff{"diff vs published", est.columns, {}};
    r.cells_total = static_cast<int>(kStudySizes.size());
    for (std::size_t i = 0; i < kStudySizes.size(); ++i) {
        if (clock.expired()) break;
        const auto k = kStudySizes[i];
        const auto s = risk::paired_small_sample_study(kTruth, risk::Portfolio::long_short(margin), k, n, 0.99, mc_n,
                                                       detail::derive_seed(o.seed, i), o.threads);
        const risk::Moment* cols[6] = {&s.var_t, &s.var_multidof, &s.delta_var, &s.es_t, &s.es_multidof, &s.delta_es};
        for (const char* stat : {"mean", "stdev"}) {
            const auto pub = std::find_if(ref.begin(), ref.end(), [&](const reference::Record& rec) {
                return rec.number(0) == static_cast<double>(k) && rec.fields.at(1) == stat;
            });
            std::vector<std::string> er{std::to_string(k), stat}, dr{std::to_string(k), stat};
            for (std::size_t c = 0; c < 6; ++c) {
                const double v = stat[0] == 'm' ? cols[c]->mean : cols[c]->sd.value_or(std::nan(""));
                er.push_back(fixed(v, 3));
                dr.push_back(signed_fixed(v - pub->number(2 + c), 3));
            }
            est.rows.push_back(er);
            diff.rows.push_back(dr);
        }
        if (s.failures > 0) r.notes.push_back("K = " + std::to_string(k) + ": " + std::to_string(s.failures) +
                                              " replicates excluded (fit failure)");
        if (k == 800 && s.delta_var.sd && s.delta_es.sd) {
            const double se_q = *s.delta_var.sd / std::sqrt(static_cast<double>(s.n_used));
            const double se_es = *s.delta_es.sd / std::sqrt(static_cast<double>(s.n_used));
            r.checks.push_back({"K = 800 mean dQ negative and beyond 2 stderr (" + fixed(s.delta_var.mean, 3) + " vs " +
                                    fixed(se_q, 3) + ")",
                                s.delta_var.mean < 0.0 && std::abs(s.delta_var.mean) > 2.0 * se_q});
            r.checks.push_back({"K = 800 mean dPsi negative and beyond 2 stderr (" + fixed(s.delta_es.mean, 3) +
                                    " vs " + fixed(se_es, 3) + ")",
                                s.delta_es.mean < 0.0 && std::abs(s.delta_es.mean) > 2.0 * se_es});
        }
        ++r.cells_done;
    }
    r.blocks = {est, diff};
    return r;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; }

}  // namespace

const std::vector<std::string>& replay_tables() {
    static const std::vector<std::string> ids{"T1", "T2", "T4a", "T4b", "T5a", "T5b", "T5c", "T6a", "T6b"};
    return ids;
}

Budget parse_budget(const std::string& text) {
    if (text == "desk") return Budget::desk;
    if (text == "full") return Budget::full;
    throw DomainError("budget must be 'desk' or 'full', got '" + text + "'");
}

const char* to_string(Budget budget) { return budget == Budget::full ? "full" : "desk"; }

ReplayReport replay(const ReplayOptions& o) {
    const Clock clock(o.time_limit);
    ReplayReport r;
    const std::string& id = o.table;
    if (id == "T1") {
        r = replay_t1(o, clock);
    } else if (id == "T2") {
        r = replay_t2(o, clock);
    } else if (id == "T4a") {
        r = replay_t4a(o, clock);
    } else if (id == "T4b") {
        r = replay_t4b(o, clock);
    } else if (id == "T5a" || id == "T5b" || id == "T5c") {
        r = replay_t5(o, clock, id);
    } else if (id == "T6a" || id == "T6b") {
        r = replay_t6(o, clock, id);
    } else {
        throw DomainError("unknown table '" + id + "'; expected one of T1 T2 T4a T4b T5a T5b T5c T6a T6b");
    }
    r.table = id;
    r.budget = o.budget;
    if (!r.complete()) r.notes.push_back("time limit of " + fixed(o.time_limit, 0) + " s reached");
    return r;
}

std::string format_text(const ReplayReport& r) {
    std::ostringstream out;
    out << "# table " << r.table << ", budget " << to_string(r.budget) << "\n";
    for (const auto& n : r.notes) out << "# " << n << "\n";
    for (const auto& b : r.blocks) {
        out << "\n# " << b.title << "\n";
        std::vector<std::size_t> w(b.columns.size(), 0);
        for (std::size_t c = 0; c < b.columns.size(); ++c) w[c] = b.columns[c].size();
        for (const auto& row : b.rows)
            for (std::size_t c = 0; c < row.size() && c < w.size(); ++c) w[c] = std::max(w[c], row[c].size());
        for (std::size_t c = 0; c < b.columns.size(); ++c) out << (c ? "  " : "") << pad(b.columns[c], w[c]);
        out << "\n";
        for (const auto& row : b.rows) {
            for (std::size_t c = 0; c < row.size() && c < w.size(); ++c) out << (c ? "  " : "") << pad(row[c], w[c]);
            out << "\n";
        }
    }
    out << "\n";
    for (const auto& c : r.checks) out << "# check " << (c.passed ? "PASS" : "FAIL") << ": " << c.description << "\n";
    out << "# status: " << (r.complete() ? "complete" : "partial") << ", " << r.cells_done << "/" << r.cells_total
        << " cells\n";
    return out.str();
}

Json to_json(const ReplayReport& r) {
    Json blocks = Json::array();
    for (const auto& b : r.blocks) blocks.push_back(Json{{"title", b.title}, {"columns", b.columns}, {"rows", b.rows}});
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(Json{{"description", c.description}, {"passed", c.passed}});
    return Json{{"table", r.table},
                {"budget", to_string(r.budget)},
                {"notes", r.notes},
                {"blocks", blocks},
                {"checks", checks},
                {"cells_done", r.cells_done},
                {"cells_total", r.cells_total},
                {"status", r.complete() ? "complete" : "partial"}};
}

}  // namespace tcopula::cli
