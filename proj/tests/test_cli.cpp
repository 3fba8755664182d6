// Copyright 2026 The rppqubo Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

// End-to-end checks of the rppqubo command-line tool.

#include <sys/wait.h>

#include <catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <string>

#include "json.hpp"

namespace {

struct Run {
    int exit_code = -1;
    std::string out;
};

// Runs the tool with `args`; stdout is captured, stderr is folded in when asked.
Run run(const std::string& args, bool with_stderr = false) {
    const std::string cmd = std::string(RPPQUBO_CLI) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

nlohmann::json run_json(const std::string& args, int expected_exit = 0) {
    const auto r = run(args);
    REQUIRE(r.exit_code == expected_exit);
    return nlohmann::json::parse(r.out);
}

const std::string tiny = std::string(RPPQUBO_DATA_DIR) + "/tiny1.json";

nlohmann::json without_timing(nlohmann::json j) {
    j.erase("timing");
    return j;
}

}  // namespace

TEST_CASE("build reports the TINY variable counts", "[cli]") {
    const auto node = run_json("build --instance " + tiny);
    CHECK(node["counts"]["registered"] == 8);
    CHECK(node["counts"]["free"] == 3);
    CHECK(node["counts"]["fixed"] == 5);
    const auto raw = run_json("build --no-presolve --instance " + tiny);
    CHECK(raw["counts"]["free"] == 8);
    const auto edge = run_json("build --formulation edge --instance " + tiny);
    CHECK(edge["counts"]["registered"] == 12);
    CHECK(edge["counts"]["closed_form"] == 12);
}

TEST_CASE("build --out writes the QUBO text and sidecar", "[cli]") {
    const auto dir = std::filesystem::temp_directory_path() / "rppqubo_cli_test";
    std::filesystem::create_directories(dir);
    const auto out = (dir / "tiny.qubo").string();
    REQUIRE(run("build --instance " + tiny + " --out " + out).exit_code == 0);
    REQUIRE(std::filesystem::exists(out));
    REQUIRE(std::filesystem::exists(out + ".json"));
    std::FILE* f = std::fopen(out.c_str(), "r");
    REQUIRE(f != nullptr);
    char line[128] = {};
    REQUIRE(std::fgets(line, sizeof line, f) != nullptr);
    std::fclose(f);
    CHECK(std::string(line).rfind("# offset", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("missing instance file is an input error naming the path", "[cli]") {
    const auto r = run("solve --instance /nonexistent/x.json", true);
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("/nonexistent/x.json") != std::string::npos);
}

TEST_CASE("unknown option is an input error", "[cli]") {
    CHECK(run("solve --instance " + tiny + " --bogus").exit_code == 2);
}

TEST_CASE("exhaustive, annealing and oracle solve TINY", "[cli]") {
    for (const char* solver : {"exhaustive", "sa", "oracle"}) {
        const auto j = run_json(std::string("solve --solver ") + solver + " --instance " + tiny);
        CHECK(j["solution"]["feasible"] == true);
        CHECK(j["solution"]["total_distance"].get<double>() == Catch::Approx(2.0));
        CHECK(j["solution"]["routes"]["v1"] == nlohmann::json::array({"d", "s", "f"}));
    }
}

TEST_CASE("seeded annealing is deterministic apart from timing", "[cli]") {
    const std::string args = "solve --solver sa --seed 7 --sweeps 300 --restarts 4 --instance " + std::string(RPPQUBO_DATA_DIR) +
                             "/pool2.json --capacity";
    CHECK(without_timing(run_json(args)) == without_timing(run_json(args)));
}

TEST_CASE("exhaustive refuses models over the size limit", "[cli]") {
    const auto r = run("solve --solver exhaustive --no-presolve --limit 4 --instance " + tiny, true);
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("--solver sa") != std::string::npos);
}

TEST_CASE("compare flags the edge formulation disagreement", "[cli]") {
    const auto r = run("compare --instance " + tiny);
    CHECK(r.exit_code == 3);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.dump().find("edge") != std::string::npos);
}

TEST_CASE("gen writes a loadable instance", "[cli]") {
    const auto dir = std::filesystem::temp_directory_path() / "rppqubo_cli_gen";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "g.json").string();
    REQUIRE(run("gen --seed 5 --vehicles 2 --requests 2 --out " + path).exit_code == 0);
    const auto j = run_json("build --instance " + path);
    CHECK(j["counts"]["registered"] == 2 * (5 * 5 - 1));
    std::filesystem::remove_all(dir);
}
