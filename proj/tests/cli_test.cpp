#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "horocat/cli.hpp"

using namespace horocat;

namespace {

std::string temp_file(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("horocat_" + name);
    std::ofstream(path) << text;
    return path.string();
}

ExperimentConfig config(const std::string& command, const std::string& preset = "modular") {
    ExperimentConfig c;
    c.command = command;
    c.preset = preset;
    return c;
}

ErrorKind error_kind(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::IoError;
}

} // namespace

TEST(Io, IntegersStayExactBeyondSixtyFourBits) {
    const Integer big("123456789012345678901234567890");
    EXPECT_EQ(to_json(big), Json("123456789012345678901234567890"));
    EXPECT_EQ(integer_from_json(to_json(big)), big);
    EXPECT_EQ(to_json(Integer(-7)), Json(-7));
}

TEST(Io, RationalsUseSlashStrings) {
    EXPECT_EQ(to_json(Rational(3, 4)), Json("3/4"));
    EXPECT_EQ(to_json(Rational(8, 4)), Json(2));
    EXPECT_EQ(rational_from_json(Json("-6/8")), Rational(-3, 4));
    EXPECT_EQ(rational_from_json(Json(5)), Rational(5));
    EXPECT_EQ(error_kind([] { integer_from_json(Json("1/2")); }), ErrorKind::ConfigError);
    EXPECT_EQ(error_kind([] { rational_from_json(Json(0.5)); }), ErrorKind::ConfigError);
}

TEST(Io, RationalGramIsClearedOfDenominators) {
    const Json j = Json::parse(R"({"gram": [[0, 0, "1/2"], [0, -1, 0], ["1/2", 0, 0]],
                                   "generators": [[[1, 2, 1], [0, 1, 1], [0, 0, 1]]]})");
    const GroupSpec s = group_spec_from_json(j);
    EXPECT_EQ(s.gram, (IntMatrix{{0, 0, 1}, {0, -2, 0}, {1, 0, 0}}));
    EXPECT_TRUE(s.cone.full_positive);
}

TEST(Io, HalfspaceConeIsReadAsPrimitiveFunctionals) {
    const Json j = Json::parse(R"({"gram": [[1, 0], [0, -1]], "generators": [],
                                   "cone": {"halfspaces": [["2/3", "4/3"]]}})");
    const GroupSpec s = group_spec_from_json(j);
    ASSERT_FALSE(s.cone.full_positive);
    EXPECT_EQ(s.cone.halfspaces.at(0), (IntVector{1, 2}));
}

TEST(Io, MalformedInputIsAConfigError) {
    EXPECT_EQ(error_kind([] { parse_json_text("{\"gram\": [", "text"); }), ErrorKind::ConfigError);
    EXPECT_EQ(error_kind([] { group_spec_from_json(Json::parse(R"({"generators": []})")); }), ErrorKind::ConfigError);
    EXPECT_EQ(error_kind([] { group_spec_from_json(Json::parse(R"({"gram": [[1, 0], [0]], "generators": []})")); }),
              ErrorKind::ConfigError);
    EXPECT_EQ(error_kind([] {
                  group_spec_from_json(Json::parse(R"({"gram": [[1, 0], [0, -1]], "generators": [[["1/2", 0], [0, 1]]]})"));
              }),
              ErrorKind::ConfigError);
    EXPECT_EQ(error_kind([] { group_spec_from_json(Json::parse(R"({"gram": [[1, 0], [0, -1]], "generators": [], "cone": 3})")); }),
              ErrorKind::ConfigError);
    EXPECT_EQ(error_kind([] { read_text_file("/nonexistent/horocat.json"); }), ErrorKind::IoError);
}

TEST(Io, PointsRoundTripThroughJson) {
    const ModelPoint p{Model::Ball, Eigen::Vector2d(0.25, -0.5)};
    const ModelPoint q = point_from_json(to_json(p));
    EXPECT_EQ(q.model, Model::Ball);
    EXPECT_EQ(q.coords, p.coords);
    EXPECT_EQ(point_from_json(Json::parse("[0, 2]"), Model::HalfSpace).coords, Eigen::Vector2d(0, 2));
    EXPECT_EQ(error_kind([] { point_from_json(Json::parse("[0, -1]"), Model::HalfSpace); }), ErrorKind::InvalidPoint);
    EXPECT_EQ(error_kind([] { parse_coordinates("1,x"); }), ErrorKind::ConfigError);
}

class PresetRoundTrip : public ::testing::TestWithParam<std::string> {};

TEST_P(PresetRoundTrip, IngestSerializeIngestIsIdentical) {
    const GroupSpec first = group_spec(make_preset(GetParam()));
    const std::string text = to_json(first).dump();
    const GroupSpec second = group_spec_from_json(parse_json_text(text, "round trip"));
    EXPECT_EQ(second, first);
    EXPECT_EQ(to_json(second).dump(), text);
    const GeneratedGroup rebuilt = make_group(second);
    const Preset preset = make_preset(GetParam());
    EXPECT_EQ(rebuilt.generators(), preset.group.generators());
    EXPECT_EQ(rebuilt.form().gram(), preset.group.form().gram());
    EXPECT_EQ(rebuilt.names(), preset.group.names());
}

INSTANTIATE_TEST_SUITE_P(AllPresets, PresetRoundTrip, ::testing::ValuesIn(preset_names()),
                         [](const auto& info) {
                             std::string s = info.param;
                             std::replace(s.begin(), s.end(), '-', '_');
                             return s;
                         });

TEST(Run, ClassifiesTranslationAsParabolic) {
    auto c = config("classify");
    c.word = "T";
    const auto r = run(c);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.report["result"]["class"], "parabolic");
    EXPECT_EQ(r.report["schema"], kReportSchema);
}

TEST(Run, InputFileMatchesPreset) {
    const std::string path = temp_file("modular.json", to_json(group_spec(make_preset("modular"))).dump());
    auto a = config("census");
    a.radius = 4;
    auto b = a;
    b.preset.clear();
    b.input = path;
    EXPECT_EQ(run(a).report["result"], run(b).report["result"]);
    std::remove(path.c_str());
}

TEST(Run, MalformedJsonExitsWithConfigError) {
    const std::string path = temp_file("broken.json", "{\"gram\": [[1, 0],");
    auto c = config("census");
    c.preset.clear();
    c.input = path;
    const auto r = run_reporting_errors(c);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_EQ(r.report["error"]["kind"], "ConfigError");
    std::remove(path.c_str());
}

TEST(Run, ConfigurationErrorsExitWithTwo) {
    EXPECT_EQ(run_reporting_errors(config("nonsense")).exit_code, 2);
    EXPECT_EQ(run_reporting_errors(config("census", "no-such-group")).exit_code, 2);
    auto both = config("census");
    both.input = "x.json";
    EXPECT_EQ(run_reporting_errors(both).exit_code, 2);
    EXPECT_EQ(run_reporting_errors(config("classify")).exit_code, 2);
}

TEST(Run, FailedCheckExitsWithOne) {
    auto c = config("coxeter");
    c.rank = 2;
    const auto r = run(c);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_FALSE(r.report["passed"].get<bool>());
}

TEST(Run, TruncatedProfileExitsWithThree) {
    auto c = config("distortion");
    c.word = "STTT";
    c.n = 40;
    const auto r = run(c);
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_TRUE(r.report["result"]["truncated"].get<bool>());
}

TEST(Run, SameSeedGivesIdenticalReport) {
    auto c = config("cat0");
    c.samples = 10;
    c.seed = 7;
    EXPECT_EQ(run(c).report.dump(), run(c).report.dump());
    auto d = c;
    d.seed = 8;
    EXPECT_NE(run(c).report["result"]["excesses"], run(d).report["result"]["excesses"]);
}

TEST(Run, ConfigHashIgnoresOutputLocations) {
    auto a = config("limitset");
    a.depth = 2;
    auto b = a;
    b.output = "/tmp/report.json";
    b.plot = "/tmp/plot.json";
    EXPECT_EQ(run(a).report["config_hash"], run(b).report["config_hash"]);
    b.seed = a.seed + 1;
    EXPECT_NE(run(a).report["config_hash"], run(b).report["config_hash"]);
}

TEST(Run, TimingsAreOptIn) {
    auto c = config("limitset");
    c.depth = 2;
    EXPECT_FALSE(run(c).report.contains("timings"));
    c.timings = true;
    EXPECT_TRUE(run(c).report.contains("timings"));
}

TEST(Run, ConvertAndDistAgree) {
    auto c = config("dist", "");
    c.from = "0,1";
    c.to = "0,2";
    c.model = "halfspace";
    EXPECT_NEAR(run(c).report["result"]["distance"].get<double>(), std::log(2.0), 1e-12);
    auto v = config("convert", "");
    v.from = "0,2";
    v.model = "halfspace";
    v.target = "ball";
    const auto r = run(v);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.report["result"]["points"][0]["model"], "ball");
}

TEST(PlotData, DistortionProfileIsTwoColumnCsv) {
    auto c = config("distortion", "free2");
    c.word = "ab";
    c.n = 5;
    const auto plot = emit_plot_data(run(c).report);
    EXPECT_EQ(plot.format, "csv");
    EXPECT_EQ(plot.text.rfind("n,ratio\n", 0), 0u);
    EXPECT_EQ(std::count(plot.text.begin(), plot.text.end(), '\n'), 6);
}

TEST(PlotData, LimitSetIsPointList) {
    auto c = config("limitset", "free2");
    c.depth = 3;
    const auto report = run(c).report;
    const auto plot = emit_plot_data(report);
    EXPECT_EQ(plot.format, "json");
    EXPECT_EQ(Json::parse(plot.text).size(), report["result"]["points"].size());
}

TEST(PlotData, EmptyReportHasNothingToPlot) {
    EXPECT_EQ(error_kind([] { emit_plot_data(Json::object()); }), ErrorKind::NothingToPlot);
    auto c = config("classify");
    c.word = "T";
    const auto report = run(c).report;
    EXPECT_EQ(error_kind([&] { emit_plot_data(report); }), ErrorKind::NothingToPlot);
}
