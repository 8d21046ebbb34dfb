#include <doctest.h>

#include <sstream>
#include <string>

#include <json.hpp>

#include "aoi/experiment.hpp"

using namespace aoi::cli;

namespace {

struct Outcome {
    int status;
    std::string out;
    std::string err;
};

Outcome run_spec(const ExperimentSpec& spec)
{
    std::ostringstream out, err;
    const int status = run(spec, out, err);
    return {status, out.str(), err.str()};
}

ExperimentSpec spec_of(Command c, const std::string& hops)
{
    ExperimentSpec s;
    s.command = c;
    s.hops = parse_hops({hops});
    return s;
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

} // namespace

TEST_CASE("hop tuples")
{
    const auto h = parse_hops({"10,6,1,1;10,9,2,0.5", "3,0.5,0"});
    REQUIRE(h.size() == 3);
    CHECK(*h[0].n == 10);
    CHECK(*h[1].k == 9);
    CHECK(h[1].rate == 2.0);
    CHECK(h[1].shift == 0.5);
    CHECK(*h[2].n == 3);
    CHECK(!h[2].k);
    const auto p = parse_hops({"1.5,0.25"});
    CHECK(!p[0].n);
    CHECK(p[0].rate == 1.5);
    CHECK_THROWS_AS(parse_hops({"1,2,3,4,5"}), SpecError);
    CHECK_THROWS_AS(parse_hops({"a,1"}), SpecError);
    CHECK_THROWS_AS(parse_hops({"-3,1,1,1"}), SpecError);
}

TEST_CASE("sweep axis parsing and expansion")
{
    const auto s = parse_sweep("k2=1:500:1");
    CHECK(s.variable == "k2");
    CHECK(sweep_values(s).size() == 500);
    const auto a = sweep_values(parse_sweep("alpha1=0.1:0.9:0.1"));
    CHECK(a.size() == 9);
    CHECK(a.back() == doctest::Approx(0.9));
    CHECK_THROWS_AS(parse_sweep("k2"), SpecError);
    CHECK_THROWS_AS(parse_sweep("k2=1:5"), SpecError);
    CHECK_THROWS_AS(parse_sweep("k2=5:1:1"), SpecError);
    CHECK_THROWS_AS(parse_sweep("k2=1:5:0"), SpecError);
}

TEST_CASE("sweep variables must name existing parameters")
{
    auto s = spec_of(Command::age, "10,6,1,1;10,9,1,1");
    CHECK(*with_variable(s, "k2", 4).hops[1].k == 4);
    CHECK(with_variable(s, "lambda1", 3.0).hops[0].rate == 3.0);
    CHECK(with_variable(s, "c2", 0.0).hops[1].shift == 0.0);
    CHECK(*with_variable(s, "n", 20).hops[1].n == 20);
    CHECK(*with_variable(s, "mu", 2.0).mu == 2.0);
    CHECK_THROWS_AS(with_variable(s, "k3", 1), SpecError);
    CHECK_THROWS_AS(with_variable(s, "k0", 1), SpecError);
    CHECK_THROWS_AS(with_variable(s, "q1", 1), SpecError);
    CHECK_THROWS_AS(with_variable(s, "k1", 2.5), SpecError);
    CHECK_THROWS_AS(with_variable(s, "alpha1", 0.5), SpecError);
}

TEST_CASE("input errors exit 1 and name the field")
{
    auto s = spec_of(Command::age, "10,11,1,1");
    auto r = run_spec(s);
    CHECK(r.status == 1);
    CHECK(r.err.find("--hops") != std::string::npos);
    CHECK(r.out.empty());

    s = spec_of(Command::approx, "1,1;1,1");
    s.alpha = {0.5};
    r = run_spec(s);
    CHECK(r.status == 1);
    CHECK(r.err.find("--alpha") != std::string::npos);

    s = spec_of(Command::simulate, "5,2,1,1");
    s.arrival = aoi::ArrivalModel::Kind::poisson;
    r = run_spec(s);
    CHECK(r.status == 1);
    CHECK(r.err.find("--mu") != std::string::npos);

    s = spec_of(Command::simulate, "5,2,1,1");
    s.cycles = 100;
    s.warmup = 100;
    CHECK(run_spec(s).err.find("--warmup") != std::string::npos);

    s = spec_of(Command::sweep, "5,2,1,1");
    CHECK(run_spec(s).err.find("--sweep") != std::string::npos);

    CHECK_THROWS_AS(parse_command("plot"), SpecError);
    CHECK_THROWS_AS(parse_output("xml"), SpecError);
    CHECK_THROWS_AS(parse_mode("partial"), SpecError);
    CHECK_THROWS_AS(parse_arrival("bursty"), SpecError);
}

TEST_CASE("age rows carry the additive breakdown")
{
    const auto rows = evaluate(spec_of(Command::age, "1,1,1,1"));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].quantity == "age_single_hop");
    CHECK(rows[0].value == 3.25);
    auto s = spec_of(Command::age, "1,1,1,1");
    s.mu = 1.0;
    CHECK(evaluate(s)[0].value == doctest::Approx(23.0 / 6.0));
    CHECK(evaluate(spec_of(Command::age, "10,6,1,1;10,9,1,1"))[0].quantity == "age_two_hop_upper");
}

TEST_CASE("CSV layout")
{
    const auto r = run_spec(spec_of(Command::age, "10,6,1,1;10,9,1,1"));
    CHECK(r.status == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 3);
    CHECK(ls[0] == "#schema=1");
    CHECK(ls[1] == "index,command,quantity,hops,alpha,mu,arrival,sweep_var,sweep_value,value,ci_halfwidth,status,argmin,"
                   "detail");
    CHECK(ls[2].rfind("0,age,age_two_hop_upper,10:6:1:1|10:9:1:1,", 0) == 0);
}

TEST_CASE("k2 sweep marks the minimizing row")
{
    auto s = spec_of(Command::sweep, "500,308,1,1;500,1,1,1");
    s.sweep = parse_sweep("k2=1:500:1");
    const auto rows = evaluate(s);
    REQUIRE(rows.size() == 500);
    std::size_t marked = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].sweep_value == doctest::Approx(static_cast<double>(i + 1)));
        if (rows[i].status == "min") {
            marked = i + 1;
        }
    }
    CHECK(marked == 461);
}

TEST_CASE("JSON output parses and mirrors the rows")
{
    auto s = spec_of(Command::optimize, "1,1;1,1");
    s.output = OutputFormat::json;
    const auto r = run_spec(s);
    REQUIRE(r.status == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["schema"] == 1);
    CHECK(doc["command"] == "optimize");
    const auto& row = doc["rows"][0];
    CHECK(row["quantity"] == "optimize_alpha");
    CHECK(row["argmin"].size() == 2);
    CHECK(row["argmin"][0].get<double>() == doctest::Approx(0.6147).epsilon(1e-3));
    CHECK(row["argmin"][1].get<double>() == doctest::Approx(0.9212).epsilon(1e-3));
}

TEST_CASE("output is byte-identical across runs")
{
    auto s = spec_of(Command::sweep, "6,3,1,1;5,4,1,1");
    s.sweep = parse_sweep("k1=1:6:1");
    s.sweep_of = Command::simulate;
    s.cycles = 5000;
    const auto a = run_spec(s);
    const auto b = run_spec(s);
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    s.output = OutputFormat::json;
    CHECK(run_spec(s).out == run_spec(s).out);
}

TEST_CASE("validate reports pass/fail and exits accordingly")
{
    auto s = spec_of(Command::validate, "10,5,1,1");
    s.mu = 1.0;
    s.cycles = 200000;
    const auto ok = run_spec(s);
    CHECK(ok.status == 0);
    CHECK(ok.out.find("check_poisson_building_block") != std::string::npos);
    CHECK(ok.out.find(",fail,") == std::string::npos);

    const auto rows = evaluate(spec_of(Command::validate, "3,2,1,1;3,2,1,1"));
    CHECK(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK((row.status == "pass" || row.status == "fail"));
    }
}
