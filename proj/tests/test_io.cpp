#include "doctest.h"

#include "ssmgic/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ssmgic;

namespace {

TimeSeries parse(const std::string& text, bool log_transform = false) {
    std::istringstream in(text);
    return parse_csv(in, log_transform);
}

std::string parse_error(const std::string& text, bool log_transform = false) {
    try {
        (void)parse(text, log_transform);
    } catch (const InvalidInput& e) {
        return e.what();
    }
    return {};
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ssmgic_io_" + name);
}

}  // namespace

TEST_CASE("plain numbers") {
    const TimeSeries y = parse("1.0\n2.0\n3.0");
    REQUIRE(y.size() == 3);
    CHECK(y[0] == 1.0);
    CHECK(y[2] == 3.0);
}

TEST_CASE("header and many rows") {
    std::string text = "value\n";
    for (int i = 0; i < 155; ++i) text += std::to_string(0.01 * i) + "\n";
    CHECK(parse(text).size() == 155);
}

TEST_CASE("blank lines, CRLF, byte-order mark and signs") {
    const TimeSeries y = parse("\xEF\xBB\xBFvalue\r\n\r\n+1.5\r\n  -2e-3 \r\n\n\n4\r\n");
    REQUIRE(y.size() == 3);
    CHECK(y[0] == 1.5);
    CHECK(y[1] == -2e-3);
    CHECK(y[2] == 4.0);
}

TEST_CASE("non-numeric rows cite their line") {
    const auto msg = parse_error("1\n2\n3\nabc\n5\n");
    CHECK(msg.find("line 4") != std::string::npos);
    CHECK(parse_error("value\n1\nlabel\n").find("line 3") != std::string::npos);
    CHECK(parse_error("1,2\n").find("line 1") == std::string::npos);  // first line is a header
    CHECK(parse_error("1\n1,2\n").find("line 2") != std::string::npos);
}

TEST_CASE("non-finite values are rejected") {
    CHECK(parse_error("1\nnan\n").find("line 2") != std::string::npos);
    CHECK(parse_error("1\n2\ninf\n").find("line 3") != std::string::npos);
}

TEST_CASE("empty input is rejected") {
    CHECK(parse_error("").find("no observations") != std::string::npos);
    CHECK(parse_error("value\n\n\n").find("no observations") != std::string::npos);
}

TEST_CASE("log transform") {
    const TimeSeries y = parse("1\n2.718281828459045\n", true);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(parse_error("1\n0\n", true).find("line 2") != std::string::npos);
    CHECK(parse_error("1\n-3\n", true).find("line 2") != std::string::npos);
}

TEST_CASE("file round trip preserves values exactly") {
    const auto path = temp_file("roundtrip.csv");
    const TimeSeries y({0.1, -1.0 / 3.0, 1e-300, 12345.678901234567});
    write_csv(path, y);
    const TimeSeries back = ingest_csv(path);
    REQUIRE(back.size() == y.size());
    for (std::size_t n = 0; n < y.size(); ++n) CHECK(back[n] == y[n]);
    std::filesystem::remove(path);
}

TEST_CASE("file errors name the file") {
    CHECK_THROWS_AS((void)ingest_csv(temp_file("does_not_exist.csv")), InvalidInput);
    const auto path = temp_file("bad.csv");
    {
        std::ofstream(path) << "1\nx\n";
    }
    try {
        (void)ingest_csv(path);
        FAIL("expected error");
    } catch (const InvalidInput& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad.csv") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }
    std::filesystem::remove(path);
}
