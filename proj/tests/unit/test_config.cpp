#include <cstdio>
#include <fstream>
#include <numbers>

#include "fdmimo/config.hpp"
#include "support.hpp"

using namespace fdmimo;
using namespace testing;

TEST_SUITE("config") {
  TEST_CASE("empty document gives the defaults") {
    const auto c = parse_config_text("");
    CHECK(c == ScenarioConfig{});
    CHECK(c.n_v == 100);
    CHECK(c.n_h == 40);
    CHECK(c.cells == 7);
    CHECK(c.k == 20);
    CHECK(c.delta_a == doctest::Approx(5.0 * std::numbers::pi / 180.0));
    CHECK(c.effective_delta_ext() == doctest::Approx(2.0 * c.delta_e));
    CHECK_NOTHROW(validate_config(c));
  }

  TEST_CASE("overrides") {
    const auto c = parse_config_text("", {"run.K=5"});
    ScenarioConfig expect;
    expect.k = 5;
    CHECK(c == expect);
    CHECK(error_of([] { parse_config_text("", {"channel.delta_a=-1"}); }) == ErrorCode::RangeError);
    CHECK(error_of([] { parse_config_text("", {"run.nope=1"}); }) == ErrorCode::UnknownKey);
    CHECK(error_of([] { parse_config_text("", {"run.K"}); }) == ErrorCode::ParseError);
    CHECK(error_of([] { parse_config_text("", {"run.K=abc"}); }) == ErrorCode::ParseError);
    CHECK(error_of([] { parse_config_text("", {"run.K=30"}); }) == ErrorCode::RangeError);
    CHECK(error_of([] { parse_config_text("", {"channel.model=ray"}); }) == ErrorCode::RangeError);
  }

  TEST_CASE("document syntax") {
    const auto c = parse_config_text(
        "# comment\n[array]\nn_v = 32 ; trailing\n n_h=16\n\n[channel]\ndelta_e = 4\n"
        "model = single_path\n[run]\nschemes = mlp, cb\ndelta_ext = 2.5\nscheduler = separated\n");
    CHECK(c.n_v == 32);
    CHECK(c.n_h == 16);
    CHECK(c.model == ChannelModel::SinglePath);
    CHECK(c.delta_e == doctest::Approx(4.0 * std::numbers::pi / 180.0));
    CHECK(c.has_scheme("mlp"));
    CHECK(c.has_scheme("cb"));
    CHECK_FALSE(c.has_scheme("zf"));
    REQUIRE(c.delta_ext.has_value());
    CHECK(*c.delta_ext == doctest::Approx(2.5 * std::numbers::pi / 180.0));
    CHECK(c.scheduler == Scheduler::Separated);

    try {
      parse_config_text("[array]\nn_v = 32\nbroken line\n");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    try {
      parse_config_text("[array]\n\nn_q = 1\n");
      FAIL("expected UnknownKey");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownKey);
      CHECK(std::string(e.what()) == "UnknownKey: line 3: 'array.n_q'");
    }
    CHECK(error_of([] { parse_config_text("n_v = 3\n"); }) == ErrorCode::ParseError);
    CHECK(error_of([] { parse_config_text("[array\n"); }) == ErrorCode::ParseError);
  }

  TEST_CASE("serialization round trip") {
    ScenarioConfig c;
    c.n_v = 64;
    c.delta_a = 7.3 * std::numbers::pi / 180.0;
    c.delta_ext = 0.1;
    c.tx_power_dbm = 12.345678901234;
    c.schemes = {"mlp", "zf"};
    c.seed = 18446744073709551615ULL;
    c.restrict_dmax = true;
    CHECK(parse_config_text(serialize_config(c)) == c);
    CHECK(parse_config_text(serialize_config(ScenarioConfig{})) == ScenarioConfig{});
    // Every key appears once.
    const std::string text = serialize_config(c);
    for (const auto& key : config_keys()) {
      const auto leaf = key.substr(key.find('.') + 1) + " = ";
      CHECK(text.find("\n" + leaf) != std::string::npos);
    }
  }

  TEST_CASE("files") {
    CHECK(error_of([] { parse_config_file("/nonexistent/cfg.ini"); }) == ErrorCode::IoError);
    const std::string path = "fdmimo_config_test.ini";
    {
      std::ofstream out(path);
      out << "[run]\ntrials = 3\n";
    }
    CHECK(parse_config_file(path, {"run.seed=9"}).trials == 3);
    CHECK(parse_config_file(path, {"run.seed=9"}).seed == 9);
    std::remove(path.c_str());
  }

  TEST_CASE("number formatting is locale independent and exact") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(std::stod(format_double(std::numbers::pi)) == std::numbers::pi);
    CHECK(format_sig(3.14159265358979, 4) == "3.142");
  }
}
