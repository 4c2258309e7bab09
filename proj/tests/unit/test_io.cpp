#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcopula/calibrate/fit.hpp"
#include "tcopula/copula/simulate.hpp"
#include "tcopula/errors.hpp"
#include "tcopula/io/csv.hpp"
#include "tcopula/io/json.hpp"
#include "tcopula/reference.hpp"

#include <cmath>
#include <sstream>

using namespace tcopula;
using namespace tcopula::io;
using copula::CopulaSpec;
using numerics::Dof;

TEST_CASE("csv round trip") {
    std::istringstream in("# comment\n\na,b\n1.5,2\n-3e-4,0.1\n");
    const CsvTable t = parse_csv(in, false);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.values.rows() == 2);
    CHECK(t.values(1, 0) == -3e-4);
    CHECK(t.label_header.empty());

    CsvTable w;
    w.header = {"x", "y"};
    w.values.resize(2, 2);
    w.values << 0.1, 1.0 / 3.0, std::nextafter(1.0, 2.0), -2.5e-300;
    std::ostringstream out;
    write_csv(out, w, {"first", "second"});
    CHECK(out.str().rfind("# first\n# second\n", 0) == 0);
    std::istringstream back(out.str());
    CHECK(parse_csv(back, false).values == w.values);

    std::istringstream labelled("date,p\n2020-01-01,1\n2020-01-02,2\n");
    const CsvTable l = parse_csv(labelled, true);
    CHECK(l.label_header == "date");
    CHECK(l.labels == std::vector<std::string>{"2020-01-01", "2020-01-02"});
    CHECK(l.header == std::vector<std::string>{"p"});

    std::istringstream ragged("a,b\n1,2\n3\n");
    CHECK_THROWS_WITH_AS(parse_csv(ragged, false), doctest::Contains("line 3"), DomainError);
    std::istringstream junk("a\nfoo\n");
    CHECK_THROWS_AS(parse_csv(junk, false), DomainError);
}

TEST_CASE("prices and log returns") {
    std::istringstream in("date,eur,gbp\n2020-01-01,1,2\n2020-01-02,2,2\n2020-01-03,1,4\n");
    const CsvTable p = parse_price_csv(in);
    const CsvTable r = log_returns(p);
    REQUIRE(r.values.rows() == 2);
    CHECK(r.labels == std::vector<std::string>{"2020-01-02", "2020-01-03"});
    CHECK(r.values(0, 0) == doctest::Approx(std::log(2.0)));
    CHECK(r.values(1, 0) == doctest::Approx(-std::log(2.0)));
    CHECK(r.values(0, 1) == 0.0);
    CHECK(r.values(1, 1) == doctest::Approx(std::log(2.0)));
    std::istringstream neg("date,a\n2020-01-01,1\n2020-01-02,-1\n");
    CHECK_THROWS_AS(log_returns(parse_price_csv(neg)), DomainError);
    std::istringstream nodate("day,a\n1,1\n2,2\n");
    CHECK_THROWS_AS(parse_price_csv(nodate), DomainError);
}

TEST_CASE("spec json") {
    const auto s = CopulaSpec::bivariate(0.7, Dof(2), Dof(8));
    const Json j = to_json(s);
    CHECK(j["dim"] == 2);
    CHECK(j["dofs"][1] == 8.0);
    const auto back = spec_from_json(j);
    CHECK(back.rho() == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(back.dofs()[0].value() == 2.0);

    const auto g = spec_from_json(to_json(CopulaSpec::bivariate_gaussian(-0.3)));
    CHECK(g.is_gaussian());
    CHECK(g.rho() == doctest::Approx(-0.3));

    Eigen::Matrix3d c;
    c << 1, 0.2, 0.1, 0.2, 1, 0.4, 0.1, 0.4, 1;
    const auto grouped = CopulaSpec::grouped(c, {0, 0, 1}, {Dof(3), Dof(9)});
    const auto gb = spec_from_json(to_json(grouped));
    CHECK(gb.dofs()[1].value() == 3.0);
    CHECK(gb.dofs()[2].value() == 9.0);

    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"corr": [[1, 0.5], [0.5]]})")), ShapeError);
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"corr": "x"})")), DomainError);
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"corr": [[1, 0.5], [0.5, 1]], "dofs": [2]})")), Error);
}

TEST_CASE("report json") {
    const auto sample = copula::simulate(CopulaSpec::bivariate(0.5, Dof(4), Dof(6)), 300, 1);
    calibrate::FitOptions o;
    o.family = calibrate::Family::standard_t;
    const auto fit = calibrate::fit_mle(sample, o);
    const Json j = to_json(fit);
    for (const char* k : {"spec", "loglik", "stderr", "param_order", "converged", "iterations", "method"})
        CHECK(j.contains(k));
    CHECK(j["param_order"][1] == "nu");
    CHECK(j["loglik"].get<double>() == fit.loglik);

    calibrate::LrtResult lrt{};
    lrt.statistic = NAN;
    const Json lj = to_json(lrt);
    CHECK(lj["statistic"].is_null());

    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    CHECK(matrix_from_json(matrix_to_json(m)) == m);
}

TEST_CASE("embedded reference data") {
    CHECK(tcopula::version() == TCOPULA_VERSION_STRING);
    CHECK(reference::table("T2").size() == 81);
    CHECK(reference::table("T1").size() == 27);
    const auto t4a = reference::table("T4a");
    REQUIRE(t4a.size() == 3);
    CHECK(t4a[2].fields[0] == "multidof-t");
    CHECK(t4a[2].number(1) == 1.337);
    CHECK_THROWS_AS(reference::table("T9"), DomainError);
    const auto recs = reference::parse("# c\n\nX 1 nan\n");
    REQUIRE(recs.size() == 1);
    CHECK(std::isnan(recs[0].number(1)));
}
