#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "image_io.hpp"
#include "rng.hpp"

using mrd::PixelGrid;

namespace {

struct TempPath {
    std::string path;
    explicit TempPath(const char* name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempPath() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("csv round trip preserves doubles exactly") {
    PixelGrid g(5, 7);
    auto gen = mrd::rng::engine(1);
    std::uniform_real_distribution<double> dist(-1e6, 1e6);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 7; ++j) g(i, j) = dist(gen) * std::pow(10.0, (i - 2) * 3);
    g(0, 0) = 1.0 / 3.0;
    g(1, 1) = -0.0;
    TempPath tmp("mrd_io_test.csv");
    mrd::write_csv(g, tmp.path);
    const PixelGrid back = mrd::read_csv(tmp.path);
    REQUIRE(back.rows() == 5);
    REQUIRE(back.cols() == 7);
    CHECK(back.values() == g.values());
}

TEST_CASE("csv rejects garbage") {
    TempPath tmp("mrd_io_bad.csv");
    mrd::write_text_atomic(tmp.path, "1,2\n3,nope\n");
    CHECK_THROWS(mrd::read_csv(tmp.path));
    mrd::write_text_atomic(tmp.path, "1,2\n3\n");
    CHECK_THROWS(mrd::read_csv(tmp.path));
    CHECK_THROWS(mrd::read_csv("missing_file.csv"));
}

TEST_CASE("pgm round trips integer grids exactly") {
    PixelGrid g(9, 4);
    auto gen = mrd::rng::engine(2);
    std::uniform_int_distribution<int> dist(0, 255);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = dist(gen);
    TempPath tmp("mrd_io_test.pgm");
    const mrd::PgmMapping map = mrd::write_pgm(g, tmp.path, 255);
    CHECK(map.identity);
    const PixelGrid back = mrd::read_pgm(tmp.path);
    REQUIRE(back.rows() == 9);
    CHECK(back.values() == g.values());
}

TEST_CASE("pgm 16-bit round trip") {
    PixelGrid g(3, 3, 0.0);
    g(0, 0) = 65535;
    g(1, 1) = 256;
    g(2, 2) = 13;
    TempPath tmp("mrd_io_test16.pgm");
    CHECK(mrd::write_pgm(g, tmp.path, 65535).identity);
    CHECK(mrd::read_pgm(tmp.path).values() == g.values());
}

TEST_CASE("float grids are affinely mapped with a sidecar") {
    PixelGrid g(2, 2, {0.0, 0.25, 0.5, 1.0});
    TempPath tmp("mrd_io_float.pgm");
    TempPath sidecar("mrd_io_float.pgm.map.txt");
    const mrd::PgmMapping map = mrd::write_pgm(g, tmp.path, 255, sidecar.path);
    CHECK_FALSE(map.identity);
    CHECK(map.lo == 0.0);
    CHECK(map.hi == 1.0);
    const PixelGrid back = mrd::read_pgm(tmp.path);
    CHECK(back(0, 0) == 0.0);
    CHECK(back(1, 1) == 255.0);
    CHECK(back(0, 1) == doctest::Approx(64.0).epsilon(0.02));
    CHECK(std::filesystem::exists(sidecar.path));
}

TEST_CASE("pgm header comments are skipped") {
    TempPath tmp("mrd_io_comment.pgm");
    std::string content = "P5\n# a comment\n2 2\n255\n";
    content.push_back(static_cast<char>(10));
    content.push_back(static_cast<char>(20));
    content.push_back(static_cast<char>(30));
    content.push_back(static_cast<char>(40));
    mrd::write_text_atomic(tmp.path, content);
    const PixelGrid g = mrd::read_pgm(tmp.path);
    CHECK(g(0, 0) == 10.0);
    CHECK(g(1, 1) == 40.0);
}

TEST_CASE("truncated pgm rejected") {
    TempPath tmp("mrd_io_trunc.pgm");
    mrd::write_text_atomic(tmp.path, "P5\n4 4\n255\nxx");
    CHECK_THROWS(mrd::read_pgm(tmp.path));
}

TEST_CASE("atomic writes leave no temp files behind") {
    TempPath tmp("mrd_io_atomic.txt");
    mrd::write_text_atomic(tmp.path, "hello\n");
    CHECK(std::filesystem::exists(tmp.path));
    CHECK_FALSE(std::filesystem::exists(tmp.path + ".tmp"));
}

TEST_CASE("read_image dispatches on the extension") {
    TempPath csv("mrd_io_dispatch.csv");
    mrd::write_csv(PixelGrid(2, 2, 1.5), csv.path);
    CHECK(mrd::read_image(csv.path)(0, 0) == 1.5);
    TempPath pgm("mrd_io_dispatch.pgm");
    mrd::write_pgm(PixelGrid(2, 2, 9.0), pgm.path, 255);
    CHECK(mrd::read_image(pgm.path)(1, 1) == 9.0);
}
