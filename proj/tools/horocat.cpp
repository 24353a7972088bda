#include <iostream>

#include "CLI11.hpp"
#include "horocat/cli.hpp"

namespace {

std::string preset_list() {
    std::string s;
    for (const auto& n : horocat::preset_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
}

void add_group_options(CLI::App* sub, horocat::ExperimentConfig& c) {
    sub->add_option("--basepoint", c.basepoint, "integer basepoint, comma separated");
}

void add_truncation_options(CLI::App* sub, horocat::ExperimentConfig& c) {
    add_group_options(sub, c);
    sub->add_option("--level-scale", c.level_scale, "multiplier on the horoball level")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv) {
    horocat::ExperimentConfig c;
    CLI::App app{"horocat: discrete groups, Dirichlet domains and truncated hyperbolic spaces"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--input", c.input, "group description or point list (JSON)");
    app.add_option("--preset", c.preset, "named group: " + preset_list());
    app.add_option("--radius", c.radius, "word-ball radius")->capture_default_str();
    app.add_option("--seed", c.seed, "random seed")->capture_default_str();
    app.add_option("--jobs", c.jobs, "worker threads")->capture_default_str();
    app.add_option("--tolerance", c.tolerance, "numerical tolerance override");
    app.add_option("--output", c.output, "write the report here instead of stdout");
    app.add_option("--plot", c.plot, "write plot data (csv or json) here");
    app.add_flag("--timings", c.timings, "include wall-clock time in the report");

    auto* classify = app.add_subcommand("classify", "classify a group element");
    add_group_options(classify, c);
    classify->add_option("--word", c.word, "word in the generators")->required();
    classify->add_option("--powers", c.powers, "check translation additivity up to this power");

    auto* dirichlet = app.add_subcommand("dirichlet", "Dirichlet domain and tiling check");
    add_group_options(dirichlet, c);
    dirichlet->add_option("--samples", c.samples, "cover samples")->capture_default_str();
    dirichlet->add_option("--cover-radius", c.cover_radius, "radius of the covered ball")->capture_default_str();

    auto* limitset = app.add_subcommand("limitset", "sample the limit set");
    add_group_options(limitset, c);
    limitset->add_option("--depth", c.depth, "word length")->capture_default_str();

    auto* truncate = app.add_subcommand("truncate", "cusps and an equivariant horoball family");
    add_truncation_options(truncate, c);

    auto* geodesic = app.add_subcommand("geodesic", "geodesic in the truncated space");
    add_truncation_options(geodesic, c);
    geodesic->add_option("--from", c.from, "start point coordinates")->required();
    geodesic->add_option("--to", c.to, "end point coordinates")->required();
    geodesic->add_option("--model", c.model, "model of the coordinates")->capture_default_str();

    auto* cat0 = app.add_subcommand("cat0", "comparison-triangle suite");
    add_truncation_options(cat0, c);
    cat0->add_option("--samples", c.samples, "triangles")->capture_default_str();
    cat0->add_option("--max-distance", c.max_distance, "vertex distance from the basepoint")->capture_default_str();

    auto* compactness = app.add_subcommand("compactness", "distance from the convex core, before and after truncation");
    add_truncation_options(compactness, c);

    auto* tits = app.add_subcommand("tits", "Tits alternative with a ping-pong certificate");
    add_group_options(tits, c);

    auto* census = app.add_subcommand("census", "finite subgroups up to conjugacy");
    add_group_options(census, c);

    auto* burnside = app.add_subcommand("burnside", "closures of random torsion subsets");
    add_group_options(burnside, c);
    burnside->add_option("--trials", c.trials, "subsets to try")->capture_default_str();

    auto* distortion = app.add_subcommand("distortion", "word length of powers against n");
    add_group_options(distortion, c);
    distortion->add_option("--word", c.word, "element")->required();
    distortion->add_option("--n", c.n, "largest power")->capture_default_str();

    auto* coxeter = app.add_subcommand("coxeter", "Coxeter group with all m_ij = infinity");
    coxeter->add_option("--rank", c.rank, "number of generators")->capture_default_str();
    coxeter->add_option("--word", c.word, "element to classify, e.g. s1s2s3");
    coxeter->add_option("--classify-upto", c.classify_upto, "classify all words up to this length");
    coxeter->add_option("--vector", c.vector, "rational vector for a Tits cone query");

    auto* convert = app.add_subcommand("convert", "change model");
    convert->add_option("--from", c.from, "point coordinates");
    convert->add_option("--model", c.model, "model of --from")->capture_default_str();
    convert->add_option("--target", c.target, "target model")->required();

    auto* dist = app.add_subcommand("dist", "hyperbolic distance");
    dist->add_option("--from", c.from, "first point");
    dist->add_option("--to", c.to, "second point");
    dist->add_option("--model", c.model, "model of the points")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return e.get_exit_code() == 0 ? code : 2;
    }
    c.command = app.get_subcommands().front()->get_name();

    const horocat::RunResult r = horocat::run_reporting_errors(c);
    const std::string text = r.report.dump(2) + "\n";
    try {
        if (c.output.empty()) std::cout << text;
        else horocat::write_text_file(c.output, text);
        if (!c.plot.empty() && r.report.contains("result"))
            horocat::write_text_file(c.plot, horocat::emit_plot_data(r.report).text);
    } catch (const horocat::Error& e) {
        std::cerr << "horocat: " << e.what() << '\n';
        return horocat::exit_code_for(e.kind());
    }
    if (r.report.contains("error")) std::cerr << "horocat: " << r.report["error"]["message"].get<std::string>() << '\n';
    return r.exit_code;
}
