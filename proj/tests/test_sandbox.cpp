#include <doctest.h>

#include <chrono>

#include "sop/errors.hpp"
#include "sop/sandbox.hpp"

using namespace sop;
using namespace std::chrono_literals;

TEST_CASE("framing is a big-endian length prefix") {
    const auto f = frame("abc");
    CHECK(f == std::string("\x00\x00\x00\x03" "abc", 7));
    const std::string big(300, 'x');
    CHECK(frame(big).substr(0, 4) == std::string("\x00\x00\x01\x2c", 4));

    std::string buffer = frame("one") + frame("two").substr(0, 5);
    CHECK(take_frame(buffer) == "one");
    CHECK_FALSE(take_frame(buffer).has_value());
    buffer += "wo";
    CHECK(take_frame(buffer) == "two");
    CHECK(buffer.empty());
}

TEST_CASE("wire documents match the golden bytes") {
    ExecRequest req;
    req.code = "x";
    const auto request_doc = encode_request(req);
    CHECK(request_doc == R"({"code":"x","max_points":1000,"memory_mb":512,"timeout_ms":10000,"v":1})");
    CHECK(frame(request_doc).substr(0, 4) == std::string("\x00\x00\x00\x47", 4));  // 71 bytes

    ExecResult res;
    res.status = ExecStatus::Ok;
    res.points = {{1.5, -2.0}};
    const auto result_doc = encode_result(res);
    CHECK(result_doc == R"({"error_trace":"","points":[[1.5,-2.0]],"status":"ok","stdout_excerpt":"","v":1})");
    CHECK(frame(result_doc).substr(0, 4) == std::string("\x00\x00\x00\x50", 4));  // 80 bytes

    CHECK(encode_handshake_request() == R"({"op":"handshake","v":1})");
    CHECK(encode_capabilities({1, {"math"}}) == R"({"allowlist":["math"],"v":1})");
}

TEST_CASE("wire decoding") {
    const auto r = decode_result(
        R"({"v":1,"status":"error","points":[],"stdout_excerpt":"","error_trace":"NameError: x"})");
    CHECK(r.status == ExecStatus::Error);
    CHECK(r.error_trace == "NameError: x");
    CHECK(decode_request(R"({"v":1,"code":"c","timeout_ms":5,"memory_mb":6,"max_points":7})").max_points == 7);

    CHECK_THROWS_AS(decode_result(R"({"v":2,"status":"ok","points":[[0,0]]})"), SandboxError);
    CHECK_THROWS_AS(decode_result(R"({"v":1,"status":"ok","points":[]})"), SandboxError);
    CHECK_THROWS_AS(decode_result(R"({"v":1,"status":"ok","points":[[0]]})"), SandboxError);
    CHECK_THROWS_AS(decode_result(R"({"v":1,"status":"sleepy","points":[]})"), SandboxError);
    CHECK_THROWS_AS(decode_result("not json"), SandboxError);
    CHECK(parse_exec_status("killed") == ExecStatus::Killed);
}

TEST_CASE("stub client") {
    StubSandboxClient stub;
    ExecRequest req;
    req.code = "next_points = [(1, 2), (-3.5, 4e2)]";
    auto r = stub.execute(req);
    REQUIRE(r.status == ExecStatus::Ok);
    CHECK(r.points == std::vector<Point>{{1, 2}, {-3.5, 400}});

    req.code = "# grid\nnext_points = [\n  [0, 0],  # centre\n  [10, -10],\n]\n";
    r = stub.execute(req);
    REQUIRE(r.status == ExecStatus::Ok);
    CHECK(r.points.size() == 2);

    for (const char* bad : {"import os\nnext_points = [(0, 0)]", "next_points = []", "points = [(0, 0)]",
                            "next_points = [(0, 0, 1)]", "next_points = [(nan, 0)]",
                            "next_points = [(x, y) for x in range(3) for y in range(3)]"}) {
        CAPTURE(bad);
        req.code = bad;
        r = stub.execute(req);
        CHECK(r.status == ExecStatus::Error);
        CHECK_FALSE(r.error_trace.empty());
    }

    req.code = "next_points = [(0, 0), (1, 1), (2, 2)]";
    req.max_points = 2;
    r = stub.execute(req);
    CHECK(r.points.size() == 2);
    CHECK_FALSE(r.stdout_excerpt.empty());
}

TEST_CASE("describe_failure") {
    ExecRequest req;
    req.timeout_ms = 1500;
    ExecResult r;
    r.status = ExecStatus::Timeout;
    CHECK(describe_failure(r, req).find("1500") != std::string::npos);
    r.status = ExecStatus::Error;
    r.error_trace = "ZeroDivisionError";
    CHECK(describe_failure(r, req).find("ZeroDivisionError") != std::string::npos);
}

TEST_CASE("process client against a fake runner") {
    ExecRequest req;
    req.code = "next_points = [(5, 6)]";

    SUBCASE("handshake and execution") {
        ProcessSandboxClient client({SOP_FAKE_RUNNER, "ok"});
        CHECK(client.capabilities().version == 1);
        CHECK(client.capabilities().allowlist == std::vector<std::string>{"math", "random"});
        const auto r = client.execute(req);
        REQUIRE(r.status == ExecStatus::Ok);
        CHECK(r.points == std::vector<Point>{{5, 6}});
        req.code = "boom(";
        CHECK(client.execute(req).status == ExecStatus::Error);
    }
    SUBCASE("version mismatch is refused") {
        ProcessSandboxClient client({SOP_FAKE_RUNNER, "v2"});
        CHECK_THROWS_AS(client.capabilities(), SandboxError);
    }
    SUBCASE("a hung runner is killed and replaced") {
        ProcessSandboxClient client({SOP_FAKE_RUNNER, "hang"}, 200ms);
        ExecRequest hang;
        hang.code = "hang";
        hang.timeout_ms = 100;
        const auto t0 = std::chrono::steady_clock::now();
        CHECK(client.execute(hang).status == ExecStatus::Timeout);
        CHECK(std::chrono::steady_clock::now() - t0 < 5s);
        const auto r = client.execute(req);
        CHECK(r.status == ExecStatus::Ok);
    }
    SUBCASE("a runner that never answers the handshake") {
        ProcessSandboxClient client({SOP_FAKE_RUNNER, "silent"}, 100ms);
        CHECK_THROWS_AS(client.capabilities(), SandboxError);
    }
    SUBCASE("a crashing runner surfaces as an error") {
        ProcessSandboxClient client({SOP_FAKE_RUNNER, "crash"}, 100ms);
        CHECK_THROWS_AS(client.execute(req), SandboxError);
    }
}
