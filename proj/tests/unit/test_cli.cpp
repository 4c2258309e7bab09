#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(TCOPULA_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("tcopula_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("version and usage errors") {
    const Run v = run("--version");
    CHECK(v.status == 0);
    CHECK(v.out.find(TCOPULA_VERSION_STRING) != std::string::npos);
    CHECK(run("simulate --n notanumber").status == 1);
    CHECK(run("nosuchcommand").status == 1);
    CHECK(run("fit --input /nonexistent/file.csv").status == 1);
}

TEST_CASE("simulate is deterministic") {
    TempDir d;
    const std::string a = (d.path / "a.csv").string(), b = (d.path / "b.csv").string();
    const std::string args = "simulate --dim 2 --rho 0.9 --dofs 2,10 --n 1000 --seed 42 -o ";
    REQUIRE(run(args + a).status == 0);
    REQUIRE(run(args + b).status == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).find("u1,u2") != std::string::npos);
    const Run other = run("simulate --dim 2 --rho 0.9 --dofs 2,10 --n 1000 --seed 43");
    CHECK(other.out != slurp(a));
}

TEST_CASE("taildep json") {
    const Run r = run("taildep --rho 0.7 --dofs 2,8");
    REQUIRE(r.status == 0);
    const json j = json::parse(r.out);
    CHECK(j["command"] == "taildep");
    CHECK(j["config"]["seed"] == "42");
    CHECK(std::abs(j["result"]["lambda_L"].get<double>() - 0.208) < 0.001);
}

TEST_CASE("simulate then fit") {
    TempDir d;
    const std::string data = (d.path / "k800.csv").string();
    REQUIRE(run("simulate --rho 0.9 --dofs 2,10 --n 800 --seed 7 -o " + data).status == 0);
    const Run r = run("fit --family multidof-t --method joint --input " + data);
    REQUIRE(r.status == 0);
    const json j = json::parse(r.out);
    CHECK(j["result"]["converged"] == true);
    CHECK(j["result"]["param_order"].size() == 3);
    CHECK(j["config"]["input"] == data);
}

TEST_CASE("config file with flag override") {
    TempDir d;
    const fs::path cfg = d.path / "run.toml";
    std::ofstream(cfg) << "seed = 5\n[simulate]\nrho = 0.3\nn = 20\n";
    const Run a = run("--config " + cfg.string() + " simulate");
    const Run b = run("simulate --rho 0.3 --n 20 --seed 5");
    REQUIRE(a.status == 0);
    auto body = [](const std::string& s) { return s.substr(s.find("u1,u2")); };
    CHECK(body(a.out) == body(b.out));
    const Run c = run("--config " + cfg.string() + " simulate --n 10");
    CHECK(std::count(c.out.begin(), c.out.end(), '\n') < std::count(a.out.begin(), a.out.end(), '\n'));
}

TEST_CASE("lrt and table output") {
    const Run r = run("lrt --restricted-loglik 163.95 --full-loglik 169.94 --df 1");
    REQUIRE(r.status == 0);
    const double p = json::parse(r.out)["result"]["p_value"].get<double>();
    CHECK(p >= 0.0005);
    CHECK(p <= 0.002);
    CHECK(run("lrt --restricted-loglik 10 --full-loglik 9 --df 1").status == 1);
    const Run t = run("--format table taildep --rho 0.5 --dofs 3,3");
    CHECK(t.status == 0);
    CHECK(t.out.find("lambda_L") != std::string::npos);
}

TEST_CASE("garch-filter end to end") {
    TempDir d;
    const fs::path prices = d.path / "prices.csv";
    {
        std::ofstream out(prices);
        out << "date,a,b\n";
        double pa = 1.0, pb = 100.0;
        unsigned s = 1;
        for (int t = 0; t < 400; ++t) {
            s = s * 1103515245u + 12345u;
            const double e1 = ((s >> 8) % 2001) / 1000.0 - 1.0;
            s = s * 1103515245u + 12345u;
            const double e2 = ((s >> 8) % 2001) / 1000.0 - 1.0;
            pa *= std::exp(0.01 * e1);
            pb *= std::exp(0.01 * (0.5 * e1 + e2));
            char date[16];
            std::snprintf(date, sizeof date, "2020-%02d-%02d", 1 + t / 28 % 12, 1 + t % 28);
            out << date << ',' << pa << ',' << pb << '\n';
        }
    }
    const fs::path pit = d.path / "pit.csv";
    const Run r = run("garch-filter --input " + prices.string() + " -o " + pit.string());
    REQUIRE(r.status == 0);
    std::ifstream in(pit);
    std::string line;
    int rows = 0;
    bool interior = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("date", 0) == 0) continue;
        ++rows;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        while (std::getline(ss, cell, ',')) {
            const double u = std::stod(cell);
            interior = interior && u > 0.0 && u < 1.0;
        }
    }
    CHECK(rows == 399);
    CHECK(interior);
    CHECK(run("fit --label-column --input " + pit.string()).status == 0);
}
