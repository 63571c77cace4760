// Drives the built CLI binary end to end: formats, exit codes, determinism.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "freemult/measure.hpp"

namespace {

std::string g_cli;
const char* kDir = "/tmp/freemult_cli_test";

int run(const std::string& args) {
    std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

using namespace freemult;

TEST_CASE("density command: lambda at t=4 vanishes at the seam") {
    std::string out = std::string(kDir) + "/l4.csv";
    REQUIRE(run("density --law lambda --t 4 --grid 512 --out " + out) == 0);
    auto prof = parse_profile_csv(slurp(out));
    CHECK(prof.space == Space::circle);
    // value at theta = pi
    CHECK(prof.interpolate(kPi) <= 1e-6);
}

TEST_CASE("density command: chi integrates to one") {
    std::string out = std::string(kDir) + "/c1.csv";
    REQUIRE(run("density --law chi --t 1 --grid 1024 --out " + out) == 0);
    auto prof = parse_profile_csv(slurp(out));
    CHECK(prof.space == Space::halfline);
    CHECK(prof.mass() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("density command: haar emits the flat column") {
    std::string out = std::string(kDir) + "/haar.csv";
    REQUIRE(run("density --law haar --grid 256 --out " + out) == 0);
    auto prof = parse_profile_csv(slurp(out));
    for (double v : prof.values) CHECK(v == doctest::Approx(1.0 / kTwoPi));
}

TEST_CASE("convolve command: atom product law") {
    write_file(std::string(kDir) + "/a.json",
               serialize_measure(Measure::point_mass(Space::circle, 0.4)));
    write_file(std::string(kDir) + "/b.json",
               serialize_measure(Measure::point_mass(Space::circle, 0.5)));
    std::string out = std::string(kDir) + "/ab.json";
    REQUIRE(run("convolve --free " + std::string(kDir) + "/a.json " + kDir +
                "/b.json --grid 256 --out " + out) == 0);
    Measure r = parse_measure(slurp(out));
    REQUIRE(r.atoms.size() == 1);
    CHECK(r.atoms[0].pos == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("power command emits diagnostics") {
    std::string in = std::string(kDir) + "/l025.json";
    REQUIRE(run("density --law lambda --t 0.25 --grid 256 --out " +
                std::string(kDir) + "/l025.csv") == 0);
    // build a proper measure document through the library
    write_file(in, serialize_measure(
                        parse_profile_csv(slurp(std::string(kDir) + "/l025.csv"))
                            .to_measure(true)));
    std::string diag = std::string(kDir) + "/diag.json";
    REQUIRE(run("power --free --k 4 " + in + " --grid 256 --out " +
                std::string(kDir) + "/pw.json --diagnostics " + diag) == 0);
    std::string d = slurp(diag);
    CHECK(d.find("residual_sup") != std::string::npos);
    CHECK(d.find("arg_g") != std::string::npos);
}

TEST_CASE("entropy command prints a value") {
    std::string in = std::string(kDir) + "/haar_measure.json";
    write_file(in, serialize_measure(Measure::haar(256)));
    std::string out = std::string(kDir) + "/S.txt";
    REQUIRE(run("entropy " + in + " --out " + out) == 0);
    CHECK(std::abs(std::stod(slurp(out))) < 1e-9);
}

TEST_CASE("exit codes: validation 2, numerical 3") {
    // malformed measure document
    write_file(std::string(kDir) + "/bad.json", "{\"space\":\"circle\"}");
    CHECK(run("entropy " + std::string(kDir) + "/bad.json") == 2);
    // boolean infdiv with an atomic sigma: not a measure
    write_file(std::string(kDir) + "/badparams.json",
               R"({"space":"halfline","flavor":"boolean","gamma":0.0,)"
               R"("sigma":{"atoms":[{"pos":1.0,"mass":0.5}],"density":null,)"
               R"("mass_at_inf":0.0}})");
    CHECK(run("density --law infdiv --params " + std::string(kDir) +
              "/badparams.json --grid 256") == 3);
    // unknown law
    CHECK(run("density --law nope") == 2);
}

TEST_CASE("determinism: byte-identical outputs") {
    std::string o1 = std::string(kDir) + "/d1.csv";
    std::string o2 = std::string(kDir) + "/d2.csv";
    REQUIRE(run("density --law lambda --t 1 --grid 512 --out " + o1) == 0);
    REQUIRE(run("density --law lambda --t 1 --grid 512 --out " + o2) == 0);
    CHECK(slurp(o1) == slurp(o2));
    CHECK(!slurp(o1).empty());

    std::string e1 = std::string(kDir) + "/exp1";
    std::string e2 = std::string(kDir) + "/exp2";
    REQUIRE(run("experiment haar --mean 0.9 --nlist 4,8 --grid 256 --out " + e1) == 0);
    REQUIRE(run("experiment haar --mean 0.9 --nlist 4,8 --grid 256 --out " + e2) == 0);
    CHECK(slurp(e1 + "/report.json") == slurp(e2 + "/report.json"));
    CHECK(slurp(e1 + "/haar_8.csv") == slurp(e2 + "/haar_8.csv"));
}

TEST_CASE("experiment command writes a report") {
    // mean 0.5: the power law is atom-free from k = 4 on, so the sup
    // distance decreases over this n list
    std::string dir = std::string(kDir) + "/expq";
    REQUIRE(run("experiment haar --mean 0.5 --nlist 8,16 --grid 256 --out " + dir) ==
            0);
    std::string rep = slurp(dir + "/report.json");
    CHECK(rep.find("\"verdict\": \"pass\"") != std::string::npos);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-freemult>\n");
        return 1;
    }
    g_cli = argv[1];
    std::filesystem::remove_all(kDir);
    std::filesystem::create_directories(kDir);
    doctest::Context ctx;
    return ctx.run();
}
