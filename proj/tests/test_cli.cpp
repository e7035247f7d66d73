#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "cdrflow/cli.hpp"
#include "cdrflow/timeutil.hpp"
#include "support.hpp"

using namespace cdrflow;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("ingest counts a malformed row and keeps going") {
    testing::TempDir dir("cli_ingest");
    const auto in = dir.file("raw.csv");
    testing::spit(in,
                  "u1,555,Incoming,Voice,30,2010-09-16T10:00:00Z\n"
                  "u1,555,Sideways,Voice,30,2010-09-16T10:01:00Z\n"
                  "u2,,Outgoing,Sms,0,2010-09-16T10:02:00Z\n");
    const auto r = call({"ingest", "--input", in, "--out", dir.file("clean.csv")});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("dropped=1") != std::string::npos);
    CHECK(r.out.find("kept=2") != std::string::npos);
    CHECK(testing::slurp(dir.file("clean.csv")).find("u2") != std::string::npos);
}

TEST_CASE("missing input is a data error on stderr") {
    const auto r = call({"ingest", "--input", "/nonexistent/cdrflow/none.csv"});
    CHECK(r.code == cli::kExitData);
    CHECK_FALSE(r.err.empty());
    CHECK(r.out.empty());
}

TEST_CASE("usage errors") {
    CHECK(call({"frobnicate"}).code == cli::kExitUsage);
    CHECK(call({"synth", "--no-such-flag"}).code == cli::kExitUsage);
    CHECK(call({}).code == cli::kExitUsage);
    CHECK(call({"fit", "--series", "x.csv", "--spec", "0,0,0"}).code != cli::kExitOk);
    CHECK(call({"--help"}).code == cli::kExitOk);
}

TEST_CASE("config file values apply and flags override them") {
    testing::TempDir dir("cli_config");
    const auto cfg = dir.file("run.conf");
    testing::spit(cfg, "# defaults\nprofile = clean\n");
    const auto truth = dir.file("truth.csv");
    REQUIRE(call({"synth", "--config", cfg, "--out", dir.file("a.csv"), "--truth", truth}).code == 0);
    CHECK(testing::slurp(truth) == "bucket_index,bucket_start_iso8601,reason\n");

    REQUIRE(call({"synth", "--config", cfg, "--profile", "weekly", "--out", dir.file("b.csv"), "--truth",
                  truth})
                .code == 0);
    CHECK(count_of(testing::slurp(truth), "\n") == 6);

    testing::spit(cfg, "colour=blue\n");
    CHECK(call({"synth", "--config", cfg}).code == cli::kExitUsage);
}

TEST_CASE("random-walk forecast on a ramp is flat") {
    testing::TempDir dir("cli_forecast");
    std::vector<double> v;
    for (int i = 0; i < 30; ++i) v.push_back(10.0 + i);
    testing::spit(dir.file("s.csv"), series::to_csv(testing::make_series(v)));
    const auto r = call({"forecast", "--spec", "0,1,0", "--series", dir.file("s.csv"), "--horizon", "5"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("bucket_start_iso8601,actual,forecast\n", 0) == 0);
    CHECK(count_of(r.out, ",,39\n") == 5);
}

TEST_CASE("adf flags a random walk") {
    testing::TempDir dir("cli_adf");
    // Activity series are non-negative; a level shift leaves the test statistic unchanged.
    auto walk = testing::random_walk(500, 1);
    for (auto& v : walk) v += 1000.0;
    testing::spit(dir.file("rw.csv"), series::to_csv(testing::make_series(walk)));
    const auto r = call({"adf", "--series", dir.file("rw.csv")});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("conclusion: NonStationary") != std::string::npos);
}

TEST_CASE("detect finds the injected bursts") {
    testing::TempDir dir("cli_detect");
    const auto events = dir.file("events.csv");
    REQUIRE(call({"synth", "--seed", "1", "--out", events, "--truth", dir.file("truth.csv")}).code == 0);
    const auto r = call({"detect", "--events", events, "--seed", "1", "--out", dir.file("report.csv")});
    REQUIRE(r.code == 0);
    const auto report = testing::slurp(dir.file("report.csv"));
    CHECK(count_of(report, "HighActivityCluster") == 4);
    for (const char* hour : {"2010-09-17T17:00:00Z", "2010-09-19T17:00:00Z", "2010-09-22T12:00:00Z",
                             "2010-09-24T21:00:00Z"}) {
        CHECK(report.find(std::string(hour)) != std::string::npos);
    }
    CHECK(report.find("2010-09-24T17:00:00Z") != std::string::npos);
}

TEST_CASE("identical runs are byte identical") {
    testing::TempDir dir("cli_determinism");
    std::string first;
    for (int run = 0; run < 2; ++run) {
        const auto ev = dir.file("e" + std::to_string(run) + ".csv");
        REQUIRE(call({"synth", "--seed", "9", "--out", ev}).code == 0);
        const auto r = call({"detect", "--events", ev, "--seed", "9"});
        REQUIRE(r.code == 0);
        const auto all = testing::slurp(ev) + r.out;
        if (run == 0) {
            first = all;
        } else {
            CHECK(all == first);
        }
    }
}

}  // TEST_SUITE
