#include <zonemem/cli.hpp>
#include <zonemem/replay.hpp>

#include "../support/fixtures.hpp"

#include <doctest.h>

#include <sstream>

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "zonemem");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = zonemem::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("cli exit codes") {
    const auto dir = fixtures::temp_dir("cli");
    const std::string world = (dir / "world").string();
    const std::string small = (dir / "small").string();

    CHECK(cli({}).code == 2);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"frobnicate"}).code == 2);

    SUBCASE("gen-world") {
        CHECK(cli({"gen-world", "--rooms", "0", "--out", world}).code == 2);
        CHECK(cli({"gen-world", "--room-size", "8by6", "--out", world}).code == 2);
        CHECK(cli({"gen-world", "--kf-spacing", "-1", "--out", world}).code == 2);
        const auto r = cli({"gen-world", "--out", world});
        CHECK(r.code == 0);
        CHECK(r.out.find("857 keyframes") != std::string::npos);
        const auto again = cli({"gen-world", "--out", small});
        CHECK(again.code == 0);
        CHECK(zonemem::read_text(dir / "world" / "keyframes.jsonl") ==
              zonemem::read_text(dir / "small" / "keyframes.jsonl"));
    }

    SUBCASE("replay and compare") {
        REQUIRE(cli({"gen-world", "--rooms", "2", "--out", small}).code == 0);
        REQUIRE(cli({"gen-world", "--out", world}).code == 0);
        const std::string sem = (dir / "sem.json").string();
        const std::string geo = (dir / "geo.json").string();

        const auto ok = cli({"replay", "--map", world, "--budget", "200", "--report", sem, "--timeseries",
                             (dir / "sem.csv").string()});
        CHECK(ok.code == 0);
        CHECK(std::filesystem::exists(sem));
        CHECK(std::filesystem::exists(dir / "sem.csv"));

        CHECK(cli({"replay", "--map", world, "--strategy", "geometric", "--prefetch", "on"}).code == 2);
        CHECK(cli({"replay", "--map", world, "--strategy", "bogus"}).code == 2);
        CHECK(cli({"replay", "--map", world, "--budget", "5", "--budget-schedule", "x.csv"}).code == 2);

        const std::string missing = (dir / "nope.csv").string();
        const auto bad = cli({"replay", "--map", world, "--trajectory", missing});
        CHECK(bad.code == 1);
        CHECK(bad.err.find(missing) != std::string::npos);
        CHECK(cli({"replay", "--map", (dir / "nowhere").string()}).code == 1);

        CHECK(cli({"replay", "--map", world, "--strategy", "geometric", "--report", geo, "--timeseries",
                   (dir / "geo.csv").string()})
                  .code == 0);
        const std::string sem_default = (dir / "sem_default.json").string();
        CHECK(cli({"replay", "--map", world, "--report", sem_default, "--timeseries",
                   (dir / "sem_default.csv").string()})
                  .code == 0);

        const std::string table = (dir / "table.csv").string();
        const auto cmp = cli({"compare", "--a", geo, "--b", sem_default, "--out", table});
        CHECK(cmp.code == 0);
        CHECK(cmp.out.rfind("metric,a,b,change_pct\n", 0) == 0);
        CHECK(zonemem::read_text(table) == cmp.out);

        const std::string other = (dir / "other.json").string();
        REQUIRE(cli({"replay", "--map", small, "--report", other, "--timeseries", (dir / "other.csv").string()})
                    .code == 0);
        const auto mismatch = cli({"compare", "--a", sem_default, "--b", other});
        CHECK(mismatch.code == 1);
        CHECK(mismatch.err.find("hash mismatch") != std::string::npos);
    }

    SUBCASE("gen-route feeds replay") {
        REQUIRE(cli({"gen-world", "--out", world}).code == 0);
        const std::string traj = (dir / "traj.csv").string();
        const std::string route = (dir / "route.csv").string();
        CHECK(cli({"gen-route", "--map", world, "--visit", "1,3,1", "--trajectory", traj, "--route", route})
                  .code == 0);
        CHECK(cli({"gen-route", "--map", world, "--visit", "1,99", "--trajectory", traj, "--route", route})
                  .code == 1);
        CHECK(cli({"replay", "--map", world, "--trajectory", traj, "--prefetch", "on", "--report",
                   (dir / "a.json").string(), "--timeseries", (dir / "a.csv").string()})
                  .code == 2);
        CHECK(cli({"replay", "--map", world, "--trajectory", traj, "--route", route, "--prefetch", "on",
                   "--report", (dir / "a.json").string(), "--timeseries", (dir / "a.csv").string()})
                  .code == 0);
        const std::string schedule = (dir / "schedule.csv").string();
        zonemem::write_text(schedule, "t_start,k_max\n0,430\n20,150\n");
        CHECK(cli({"replay", "--map", world, "--trajectory", traj, "--budget-schedule", schedule, "--report",
                   (dir / "b.json").string(), "--timeseries", (dir / "b.csv").string()})
                  .code == 0);
    }
}
