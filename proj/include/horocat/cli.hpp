#pragma once

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "horocat/coxeter.hpp"
#include "horocat/dirichlet.hpp"
#include "horocat/io.hpp"
#include "horocat/presets.hpp"
#include "horocat/properties.hpp"
#include "horocat/truncation.hpp"

namespace horocat {

inline constexpr const char* kReportSchema = "horocat.report/1";

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"classify", "dirichlet", "limitset", "truncate",   "geodesic",
                                                "cat0",     "compactness", "tits",   "census",     "burnside",
                                                "distortion", "coxeter",   "convert", "dist"};
    return names;
}

// ExperimentConfig
// ~~~~~~~~~~~~~~~~
struct ExperimentConfig {
    std::string command;
    std::string input;
    std::string preset;
    std::size_t radius = 8;
    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    std::optional<double> tolerance;
    std::string output;
    std::string plot;
    bool timings = false;

    std::string word;
    std::size_t powers = 0;
    std::size_t n = 40;
    std::size_t depth = 6;
    std::size_t samples = 200;
    double max_distance = 4.0;
    std::size_t trials = 100;
    double level_scale = 1.0;
    double cover_radius = 2.0;
    std::string basepoint;
    std::string model = "halfspace";
    std::string from;
    std::string to;
    std::string target;
    std::size_t rank = 4;
    std::size_t classify_upto = 0;
    std::string vector;
};

/// The fields that determine the result; output locations and timing are excluded.
inline Json to_json(const ExperimentConfig& c) {
    Json j;
    j["command"] = c.command;
    j["input"] = c.input;
    j["preset"] = c.preset;
    j["radius"] = c.radius;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["tolerance"] = c.tolerance ? Json(*c.tolerance) : Json(nullptr);
    j["word"] = c.word;
    j["powers"] = c.powers;
    j["n"] = c.n;
    j["depth"] = c.depth;
    j["samples"] = c.samples;
    j["max_distance"] = c.max_distance;
    j["trials"] = c.trials;
    j["level_scale"] = c.level_scale;
    j["cover_radius"] = c.cover_radius;
    j["basepoint"] = c.basepoint;
    j["model"] = c.model;
    j["from"] = c.from;
    j["to"] = c.to;
    j["target"] = c.target;
    j["rank"] = c.rank;
    j["classify_upto"] = c.classify_upto;
    j["vector"] = c.vector;
    return j;
}

inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

struct RunResult {
    Json report;
    int exit_code = 0;
};

inline int exit_code_for(ErrorKind kind) { return kind == ErrorKind::BudgetExceeded ? 3 : 2; }

namespace detail {

class Checks {
public:
    void add(const std::string& name, bool passed, Json detail = Json::object()) {
        Json j{{"name", name}, {"passed", passed}};
        for (auto& [k, v] : detail.items()) j[k] = v;
        list_.push_back(std::move(j));
        all_ = all_ && passed;
    }
    bool passed() const { return all_; }
    Json json() const { return list_; }

private:
    Json list_ = Json::array();
    bool all_ = true;
};

struct Context {
    const ExperimentConfig& config;
    Checks checks;
    bool budget_exceeded = false;
};

inline void require_positive(std::size_t v, const char* what) {
    if (v == 0) fail(ErrorKind::ConfigError, std::string(what) + " must be positive");
}

inline GroupSpec resolve_group(const ExperimentConfig& c) {
    if (!c.input.empty() && !c.preset.empty()) fail(ErrorKind::ConfigError, "give either --input or --preset, not both");
    if (!c.input.empty()) return group_spec_from_json(load_json_file(c.input));
    return group_spec(make_preset(c.preset.empty() ? "modular" : c.preset));
}

inline IntVector resolve_basepoint(const ExperimentConfig& c, const GroupSpec& spec, const GeneratedGroup& group,
                                   const WordBall& ball) {
    if (!c.basepoint.empty()) {
        IntVector v;
        std::stringstream ss(c.basepoint);
        std::string item;
        while (std::getline(ss, item, ',')) v.push_back(integer_from_json(Json(item)));
        if (v.size() != group.dim()) fail(ErrorKind::DimensionMismatch, "basepoint has the wrong length");
        return v;
    }
    if (spec.basepoint) return *spec.basepoint;
    return choose_basepoint(group, ball, c.seed);
}

inline Json classification_json(const ClassifiedIsometry& c) {
    Json j;
    j["class"] = to_string(c.kind);
    j["charpoly"] = c.charpoly.to_string();
    if (c.kind == IsometryClass::Elliptic) j["order"] = c.order;
    if (c.loxodromic())
        j["spectral_radius"] = Json{{"lower", to_json(c.spectral_radius.lo)},
                                    {"upper", to_json(c.spectral_radius.hi)},
                                    {"approx", c.spectral_radius.approx}};
    const auto t = translation_length(c);
    j["translation_length"] = t.value;
    j["translation_attained"] = t.attained;
    Json fixed = Json::array();
    for (const auto& b : c.fixed_boundary) fixed.push_back(to_json(b));
    j["fixed_boundary"] = std::move(fixed);
    if (c.fixed_interior) j["fixed_interior"] = to_json(*c.fixed_interior);
    return j;
}

inline Json additivity_json(const AdditivityReport& r) {
    Json entries = Json::array();
    for (const auto& e : r.entries)
        entries.push_back(Json{{"n", e.n},
                               {"exact", e.exact},
                               {"predicted", e.predicted},
                               {"spectral", e.spectral},
                               {"min_displacement", e.min_displacement},
                               {"error", e.error}});
    return Json{{"translation_length", r.translation_length},
                {"exact", r.exact},
                {"max_error", r.max_error},
                {"tolerance", r.tolerance},
                {"entries", std::move(entries)}};
}

// classify
inline Json cmd_classify(Context& ctx) {
    const auto& c = ctx.config;
    if (c.word.empty()) fail(ErrorKind::ConfigError, "classify needs --word");
    const GroupSpec spec = resolve_group(c);
    const GeneratedGroup group = make_group(spec);
    const FormIsometry g = group.element(c.word);
    const auto cls = classify(g, group.form());
    Json j{{"word", g.word}, {"matrix", to_json(g.matrix)}};
    const Json details = classification_json(cls);
    for (const auto& [k, v] : details.items()) j[k] = v;
    if (c.powers > 0) {
        const auto r = translation_additivity_check(group, g, c.powers, c.tolerance.value_or(1e-6));
        j["additivity"] = additivity_json(r);
        ctx.checks.add("additivity_exact", r.exact);
        ctx.checks.add("additivity_displacement", r.max_error <= r.tolerance,
                       Json{{"max_error", r.max_error}, {"tolerance", r.tolerance}});
    }
    return j;
}

// dirichlet
inline Json domain_json(const DirichletDomain& d) {
    Json facets = Json::array();
    for (const auto& f : d.facets) {
        Json vs = Json::array();
        for (const auto& v : f.vertices) vs.push_back(to_json(v));
        facets.push_back(Json{{"word", f.word},
                              {"functional", to_json(f.functional)},
                              {"vertices", std::move(vs)},
                              {"paired_with", f.paired_with ? Json(*f.paired_with) : Json(nullptr)},
                              {"pairing_exact", f.pairing_exact}});
    }
    Json finite = Json::array();
    for (const auto& v : d.finite_vertices) finite.push_back(to_json(v));
    Json ideal = Json::array();
    for (const auto& v : d.ideal_vertices) ideal.push_back(to_json(v));
    return Json{{"basepoint", to_json(d.basepoint)},
                {"radius", d.radius},
                {"facets", std::move(facets)},
                {"finite_vertices", std::move(finite)},
                {"ideal_vertices", std::move(ideal)},
                {"certified_locally_finite", d.certified_locally_finite}};
}

inline Json cmd_dirichlet(Context& ctx) {
    const auto& c = ctx.config;
    require_positive(c.radius, "--radius");
    const GroupSpec spec = resolve_group(c);
    const GeneratedGroup group = make_group(spec);
    const WordBall ball(group, c.radius);
    const IntVector xi = resolve_basepoint(c, spec, group, ball);
    const DirichletDomain domain = dirichlet_domain(group, ball, xi);
    const TilingReport tiling = check_tiling(group, ball, domain, c.cover_radius, c.samples, c.seed);
    ctx.checks.add("side_pairings_exact", domain.certified_locally_finite, Json{{"facets", domain.facets.size()}});
    ctx.checks.add("translates_cover", tiling.covers,
                   Json{{"samples", tiling.samples}, {"covered", tiling.samples_covered}});
    ctx.checks.add("interiors_disjoint", tiling.disjoint_interiors,
                   Json{{"pairs", tiling.pairs_checked}, {"separated", tiling.pairs_separated}});
    Json j{{"domain", domain_json(domain)}};
    j["tiling"] = Json{{"cover_radius", tiling.cover_radius},
                       {"translates", tiling.translates},
                       {"pairs_checked", tiling.pairs_checked},
                       {"pairs_separated", tiling.pairs_separated},
                       {"samples", tiling.samples},
                       {"samples_covered", tiling.samples_covered}};
    return j;
}

// limitset
inline Json cmd_limitset(Context& ctx) {
    const auto& c = ctx.config;
    require_positive(c.depth, "--depth");
    const GroupSpec spec = resolve_group(c);
    const GeneratedGroup group = make_group(spec);
    const WordBall ball(group, 1);
    const IntVector xi = resolve_basepoint(c, spec, group, ball);
    const auto sample = limit_sample(group, c.depth, group.frame().point(to_rational(xi)));
    Json points = Json::array();
    for (const auto& p : sample.points) {
        Json q = to_json(p.point);
        q["word"] = p.word;
        points.push_back(std::move(q));
    }
    return Json{{"depth", sample.depth}, {"basepoint", to_json(xi)}, {"count", sample.points.size()}, {"points", points}};
}

// Truncation setup shared by truncate, geodesic, cat0 and compactness.
struct Truncation {
    GroupSpec spec;
    GeneratedGroup group;
    WordBall ball;
    IntVector basepoint;
    DirichletDomain domain;
    std::vector<CuspOrbit> cusps;
    KleinHull hull;
    HoroballFamily family;
};

inline std::unique_ptr<Truncation> build_truncation(const ExperimentConfig& c) {
    require_positive(c.radius, "--radius");
    GroupSpec spec = resolve_group(c);
    GeneratedGroup group = make_group(spec);
    WordBall ball(group, c.radius);
    IntVector xi = resolve_basepoint(c, spec, group, ball);
    DirichletDomain domain = dirichlet_domain(group, ball, xi);
    auto cusps = detect_cusps(group, ball, domain);
    KleinHull hull = limit_hull(group, WordBall(group, std::min<std::size_t>(c.radius, 6)), 5);
    auto t = std::unique_ptr<Truncation>(new Truncation{std::move(spec), std::move(group), std::move(ball), std::move(xi),
                                                        std::move(domain), std::move(cusps), std::move(hull), {}});
    FamilyOptions options;
    options.level_scale = c.level_scale;
    options.hull = &t->hull;
    t->family = build_horoball_family(t->group, t->ball, t->cusps, options);
    return t;
}

inline Json horoball_json(const Horoball& b) {
    return Json{{"null", to_json(b.null)},
                {"beta_squared", to_json(b.beta_squared)},
                {"level", b.level},
                {"orbit", b.orbit},
                {"base", to_json(b.base)}};
}

inline Json cmd_truncate(Context& ctx) {
    const auto t = build_truncation(ctx.config);
    Json cusps = Json::array();
    for (const auto& o : t->cusps)
        cusps.push_back(Json{{"representative", to_json(o.representative)},
                             {"members", o.members.size()},
                             {"rank", o.rank},
                             {"full_rank", o.full_rank},
                             {"parabolic_words", o.parabolic_words},
                             {"stabilizer_size", o.stabilizer_size}});
    const auto& f = t->family;
    Json reps = Json::array();
    for (const auto& b : f.representatives) reps.push_back(horoball_json(b));
    Json translates = Json::array();
    for (const auto& b : f.translates) translates.push_back(horoball_json(b));
    ctx.checks.add("closures_disjoint", f.disjoint_certified || f.translates.empty());
    ctx.checks.add("equivariant", f.equivariant || f.translates.empty());
    if (f.antipodal_checked) ctx.checks.add("antipodal_points_in_hull", f.antipodal_in_hull);
    return Json{{"basepoint", to_json(t->basepoint)},
                {"cusps", std::move(cusps)},
                {"family",
                 Json{{"level", f.level},
                      {"level_squared", to_json(f.level_squared)},
                      {"critical_level", f.critical_level},
                      {"shrinks", f.shrinks},
                      {"representatives", std::move(reps)},
                      {"translates", std::move(translates)}}}};
}

// geodesic
inline Json arc_json(const Arc& a) {
    return Json{{"kind", to_string(a.kind)},
                {"start", to_json(convert(hyperboloid_point(a.start), Model::HalfSpace))},
                {"end", to_json(convert(hyperboloid_point(a.end), Model::HalfSpace))},
                {"length", a.length},
                {"horoball", a.horoball ? Json(*a.horoball) : Json(nullptr)}};
}

inline Json cmd_geodesic(Context& ctx) {
    const auto& c = ctx.config;
    if (c.from.empty() || c.to.empty()) fail(ErrorKind::ConfigError, "geodesic needs --from and --to");
    const Model model = parse_model(c.model);
    const ModelPoint x{model, parse_coordinates(c.from)};
    const ModelPoint y{model, parse_coordinates(c.to)};
    const auto t = build_truncation(c);
    const TruncatedSpace space(t->family, t->group.form().hyperbolic_dim());
    GeodesicOptions options;
    if (c.tolerance) options.tolerance = *c.tolerance;
    const auto g = space.geodesic(to_hyperboloid_coords(x), to_hyperboloid_coords(y), options);
    const auto inv = space.check(g);
    Json arcs = Json::array();
    for (const auto& a : g.arcs) arcs.push_back(arc_json(a));
    ctx.checks.add("alternation", inv.alternates && inv.connected && inv.on_horospheres);
    ctx.checks.add("avoids_horoballs", inv.avoids, Json{{"max_penetration", inv.max_penetration}});
    ctx.checks.add("locally_optimal", g.locally_optimal, Json{{"residual", g.residual}});
    return Json{{"from", to_json(x)},
                {"to", to_json(y)},
                {"length", g.total_length},
                {"ambient_length", g.ambient_length},
                {"residual", g.residual},
                {"iterations", g.iterations},
                {"reseeds", g.reseeds},
                {"arcs", std::move(arcs)}};
}

// cat0
inline Json cmd_cat0(Context& ctx) {
    const auto& c = ctx.config;
    require_positive(c.samples, "--samples");
    const auto t = build_truncation(c);
    const TruncatedSpace space(t->family, t->group.form().hyperbolic_dim());
    const Eigen::VectorXd center = to_hyperboloid_coords(t->group.frame().point(to_rational(t->basepoint)));
    GeodesicOptions options;
    if (c.tolerance) options.tolerance = *c.tolerance;
    const auto s = cat0_suite(space, center, c.max_distance, c.samples, c.seed, options);
    ctx.checks.add("excess_within_residual", s.worst_margin <= 0,
                   Json{{"max_excess", s.max_excess}, {"max_residual", s.max_residual}});
    ctx.checks.add("pure_subtriangles_negative", s.subtriangle_max_excess < 0,
                   Json{{"count", s.subtriangles}, {"max_excess", s.subtriangle_max_excess}});
    ctx.checks.add("large_subtriangles_below_1e-4", s.large_subtriangle_max_excess <= -1e-4,
                   Json{{"count", s.large_subtriangles}, {"max_excess", s.large_subtriangle_max_excess}});
    ctx.checks.add("geodesic_invariants", s.invariants_ok);
    return Json{{"basepoint", to_json(t->basepoint)},
                {"max_distance", c.max_distance},
                {"horoballs", t->family.translates.size()},
                {"triangles", s.triangles},
                {"crossing_triangles", s.crossing_triangles},
                {"pure_triangles", s.pure_triangles},
                {"max_excess", s.max_excess},
                {"worst_margin", s.worst_margin},
                {"max_residual", s.max_residual},
                {"subtriangles", s.subtriangles},
                {"subtriangle_max_excess", s.subtriangle_max_excess},
                {"large_subtriangles", s.large_subtriangles},
                {"large_subtriangle_max_excess", s.large_subtriangle_max_excess},
                {"excesses", s.excesses}};
}

// compactness
inline Json compactness_json(const CompactnessReport& r) {
    Json levels = Json::array();
    for (const auto& l : r.levels)
        levels.push_back(Json{{"grid", l.grid}, {"samples", l.samples}, {"supremum", l.supremum}});
    return Json{{"levels", std::move(levels)},
                {"supremum", r.supremum},
                {"threshold", r.threshold},
                {"exceeds_threshold", r.exceeds_threshold},
                {"stable", r.stable},
                {"bounded_at_scale", r.bounded_at_scale}};
}

inline Json cmd_compactness(Context& ctx) {
    const auto t = build_truncation(ctx.config);
    const auto before = compactness_check(t->group, t->domain, &t->hull, {});
    const auto after = compactness_check(t->group, t->domain, &t->hull, t->family.translates);
    if (!t->family.translates.empty())
        ctx.checks.add("unbounded_before_truncation", before.exceeds_threshold, Json{{"supremum", before.supremum}});
    ctx.checks.add("bounded_after_truncation", after.bounded_at_scale,
                   Json{{"supremum", after.supremum}, {"stable", after.stable}});
    return Json{{"horoballs", t->family.translates.size()},
                {"before", compactness_json(before)},
                {"after", compactness_json(after)}};
}

// tits
inline Json certificate_json(const PingPongCertificate& cert) {
    Json caps = Json::array();
    for (const auto& cap : cert.caps) caps.push_back(Json{{"center", to_json(cap.center)}, {"aperture", cap.aperture}});
    Json table = Json::array();
    for (const auto& m : cert.table)
        table.push_back(Json{{"letter", m.letter},
                             {"maps_complement_of", m.excluded},
                             {"into", m.target},
                             {"checks", m.checks},
                             {"margin", m.margin}});
    return Json{{"first", cert.first},
                {"second", cert.second},
                {"first_power", cert.first_power},
                {"second_power", cert.second_power},
                {"caps", std::move(caps)},
                {"table", std::move(table)},
                {"rim_samples", cert.rim_samples},
                {"interior_samples", cert.interior_samples},
                {"fixed_points_checked", cert.fixed_points_checked},
                {"margin", cert.margin},
                {"words_checked", cert.words_checked},
                {"words_nontrivial", cert.words_nontrivial},
                {"verified", cert.verified}};
}

inline Json tits_json(const TitsVerdict& v) {
    Json j{{"verdict", to_string(v.kind)}, {"radius", v.radius}};
    if (v.kind == TitsKind::VirtuallyAbelian) {
        j["rank"] = v.rank;
        j["witness"] = v.witness;
    }
    if (v.certificate) j["certificate"] = certificate_json(*v.certificate);
    if (!v.reason.empty()) j["reason"] = v.reason;
    return j;
}

inline Json cmd_tits(Context& ctx) {
    const auto& c = ctx.config;
    require_positive(c.radius, "--radius");
    const GeneratedGroup group = make_group(resolve_group(c));
    TitsOptions options;
    options.ping_pong.seed = c.seed;
    const auto v = tits_classify(group, c.radius, options);
    ctx.checks.add("conclusive", v.kind != TitsKind::Inconclusive);
    if (v.certificate) ctx.checks.add("certificate_verified", v.certificate->verified);
    return tits_json(v);
}

// census
inline Json census_json(const SubgroupCensus& s) {
    Json classes = Json::array();
    for (const auto& k : s.classes)
        classes.push_back(Json{{"id", k.id}, {"order", k.order}, {"generators", k.generators}, {"members", k.members}});
    Json subgroups = Json::array();
    for (const auto& h : s.subgroups)
        subgroups.push_back(Json{{"generators", h.generators}, {"order", h.order}, {"class", h.class_id}});
    return Json{{"radius", s.radius},
                {"torsion_elements", s.torsion_elements},
                {"bound", s.bound},
                {"orders", s.orders()},
                {"classes", std::move(classes)},
                {"subgroups", std::move(subgroups)}};
}

inline Json cmd_census(Context& ctx) {
    const auto& c = ctx.config;
    require_positive(c.radius, "--radius");
    require_positive(c.jobs, "--jobs");
    const GeneratedGroup group = make_group(resolve_group(c));
    const auto s = finite_subgroup_census(group, c.radius, c.jobs);
    bool closed = true;
    for (const auto& h : s.subgroups) closed = closed && h.elements.size() == h.order;
    ctx.checks.add("subgroups_closed", closed);
    return census_json(s);
}

// burnside
inline Json cmd_burnside(Context& ctx) {
    const auto& c = ctx.config;
    require_positive(c.radius, "--radius");
    const GeneratedGroup group = make_group(resolve_group(c));
    const auto r = burnside_check(group, c.radius, c.trials, c.seed);
    ctx.checks.add("no_escaping_torsion_closure", r.passes, Json{{"candidates", r.candidates}});
    Json trials = Json::array();
    for (const auto& t : r.trials)
        trials.push_back(Json{{"subset", t.subset},
                              {"closure_size", t.closure_size},
                              {"finite", t.finite},
                              {"infinite_order", t.infinite_order}});
    return Json{{"radius", r.radius},
                {"torsion_elements", r.torsion_elements},
                {"finite_closures", r.finite_closures},
                {"not_torsion", r.not_torsion},
                {"candidates", r.candidates},
                {"max_closure", r.max_closure},
                {"trials", std::move(trials)}};
}

// distortion
inline Json cmd_distortion(Context& ctx) {
    const auto& c = ctx.config;
    if (c.word.empty()) fail(ErrorKind::ConfigError, "distortion needs --word");
    require_positive(c.n, "--n");
    const GroupSpec spec = resolve_group(c);
    const GeneratedGroup group = make_group(spec);
    const WordBall ball(group, 1);
    const IntVector xi = resolve_basepoint(c, spec, group, ball);
    const auto p = distortion_profile(group, c.word, c.n, group.frame().point(to_rational(xi)));
    Json profile = Json::array();
    for (const auto& e : p.entries) profile.push_back(Json{{"n", e.n}, {"length", e.length}, {"ratio", e.ratio}});
    if (p.infinite_order)
        ctx.checks.add("above_lower_bound", p.passes(), Json{{"min_ratio", p.min_ratio}, {"lower_bound", p.lower_bound}});
    if (p.truncated) ctx.budget_exceeded = true;
    return Json{{"word", p.word},
                {"infinite_order", p.infinite_order},
                {"translation_length", p.translation_length},
                {"generator_displacement", p.generator_displacement},
                {"lower_bound", p.lower_bound},
                {"min_ratio", p.min_ratio},
                {"free_basis", p.free_basis},
                {"truncated", p.truncated},
                {"profile", std::move(profile)}};
}

// coxeter
inline Json cmd_coxeter(Context& ctx) {
    const auto& c = ctx.config;
    if (c.rank < 2) fail(ErrorKind::ConfigError, "--rank must be at least 2");
    const auto rep = build_rep(c.rank - 1);
    const Signature raw = signature(rep.gram);
    Json j{{"rank", rep.rank}, {"gram", to_json(rep.gram)}, {"degenerate", rep.degenerate}};
    j["signature_raw"] = {raw.pos, raw.zero, raw.neg};
    Json refl = Json::array();
    for (const auto& s : rep.reflections) refl.push_back(to_json(s));
    j["reflections"] = std::move(refl);
    if (rep.degenerate) {
        ctx.checks.add("hyperbolic_signature", false, Json{{"reason", "rank-2 form is degenerate"}});
        return j;
    }
    const QuadraticForm form = coxeter_form(rep);
    const Signature sig = signature(form.gram());
    j["signature"] = {sig.pos, sig.zero, sig.neg};
    ctx.checks.add("hyperbolic_signature", sig == Signature{1, 0, rep.rank - 1});
    bool involutions = true;
    for (const auto& s : rep.reflections) involutions = involutions && (s * s).is_identity() && is_isometry(s, form);
    ctx.checks.add("reflections_are_isometric_involutions", involutions);
    if (!c.word.empty()) j["element"] = classification_json(classify(word_to_matrix(rep, c.word), form));
    if (c.classify_upto > 0) {
        const auto stats = classify_coxeter_words(rep, c.classify_upto);
        Json rows = Json::array();
        for (const auto& r : stats.by_length)
            rows.push_back(Json{{"length", r.length},
                                {"elliptic", r.elliptic},
                                {"parabolic", r.parabolic},
                                {"loxodromic", r.loxodromic}});
        j["words"] = Json{{"by_length", std::move(rows)},
                          {"max_spectral_radius", stats.max_spectral_radius},
                          {"max_word", stats.max_word}};
    }
    if (!c.vector.empty()) {
        RatVector v;
        std::stringstream ss(c.vector);
        std::string item;
        while (std::getline(ss, item, ',')) v.push_back(parse_rational(item));
        const auto r = tits_cone_membership(rep, v, c.radius);
        j["tits_cone"] = Json{{"vector", to_json(v)}, {"member", r.found}, {"word", r.word}, {"radius", r.radius}};
    }
    return j;
}

// convert / dist
inline std::vector<ModelPoint> resolve_points(const ExperimentConfig& c) {
    std::vector<ModelPoint> out;
    const Model model = parse_model(c.model);
    if (!c.input.empty()) {
        const Json j = load_json_file(c.input);
        Model fallback = model;
        const Json* list = &j;
        if (j.is_object()) {
            if (j.contains("model")) fallback = parse_model(j.at("model").get<std::string>());
            if (!j.contains("points")) fail(ErrorKind::ConfigError, "point file needs \"points\"");
            list = &j.at("points");
        }
        for (const auto& p : require_array(*list, "points")) out.push_back(point_from_json(p, fallback));
    }
    for (const auto* text : {&c.from, &c.to})
        if (!text->empty()) {
            ModelPoint p{model, parse_coordinates(*text)};
            validate(p);
            out.push_back(std::move(p));
        }
    return out;
}

inline Json cmd_convert(Context& ctx) {
    const auto& c = ctx.config;
    if (c.target.empty()) fail(ErrorKind::ConfigError, "convert needs --target");
    const Model target = parse_model(c.target);
    const auto points = resolve_points(c);
    if (points.empty()) fail(ErrorKind::ConfigError, "convert needs points (--input or --from)");
    Json out = Json::array();
    double worst = 0.0;
    for (const auto& p : points) {
        const ModelPoint q = convert(p, target);
        worst = std::max(worst, dist(convert(q, p.model), p));
        out.push_back(to_json(q));
    }
    ctx.checks.add("round_trip", worst <= 1e-9, Json{{"max_distance", worst}});
    return Json{{"target", to_string(target)}, {"points", std::move(out)}};
}

inline Json cmd_dist(Context& ctx) {
    const auto points = resolve_points(ctx.config);
    if (points.size() != 2) fail(ErrorKind::ConfigError, "dist needs exactly two points");
    return Json{{"a", to_json(points[0])}, {"b", to_json(points[1])}, {"distance", dist(points[0], points[1])}};
}

} // namespace detail

/// Dispatches the command and assembles the report. Module errors propagate.
inline RunResult run(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    detail::Context ctx{config, {}, false};
    Json result;
    const std::string& cmd = config.command;
    if (cmd == "classify") result = detail::cmd_classify(ctx);
    else if (cmd == "dirichlet") result = detail::cmd_dirichlet(ctx);
    else if (cmd == "limitset") result = detail::cmd_limitset(ctx);
    else if (cmd == "truncate") result = detail::cmd_truncate(ctx);
    else if (cmd == "geodesic") result = detail::cmd_geodesic(ctx);
    else if (cmd == "cat0") result = detail::cmd_cat0(ctx);
    else if (cmd == "compactness") result = detail::cmd_compactness(ctx);
    else if (cmd == "tits") result = detail::cmd_tits(ctx);
    else if (cmd == "census") result = detail::cmd_census(ctx);
    else if (cmd == "burnside") result = detail::cmd_burnside(ctx);
    else if (cmd == "distortion") result = detail::cmd_distortion(ctx);
    else if (cmd == "coxeter") result = detail::cmd_coxeter(ctx);
    else if (cmd == "convert") result = detail::cmd_convert(ctx);
    else if (cmd == "dist") result = detail::cmd_dist(ctx);
    else fail(ErrorKind::ConfigError, "unknown command '" + cmd + "'");

    const Json cfg = to_json(config);
    RunResult out;
    out.report["schema"] = kReportSchema;
    out.report["command"] = cmd;
    out.report["config"] = cfg;
    out.report["config_hash"] = fnv1a_hex(cfg.dump());
    out.report["seed"] = config.seed;
    out.report["result"] = std::move(result);
    out.report["checks"] = ctx.checks.json();
    out.report["passed"] = ctx.checks.passed();
    if (ctx.budget_exceeded) out.report["budget_exceeded"] = true;
    if (config.timings) {
        const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
        out.report["timings"] = Json{{"wall_seconds", wall.count()}};
    }
    out.exit_code = ctx.budget_exceeded ? 3 : ctx.checks.passed() ? 0 : 1;
    return out;
}

/// run() with errors turned into an error report and the matching exit code.
inline RunResult run_reporting_errors(const ExperimentConfig& config) {
    try {
        return run(config);
    } catch (const Error& e) {
        RunResult out;
        out.report["schema"] = kReportSchema;
        out.report["command"] = config.command;
        out.report["error"] = Json{{"kind", to_string(e.kind())}, {"message", e.what()}};
        out.report["passed"] = false;
        out.exit_code = exit_code_for(e.kind());
        return out;
    } catch (const nlohmann::json::exception& e) {
        RunResult out;
        out.report["schema"] = kReportSchema;
        out.report["command"] = config.command;
        out.report["error"] = Json{{"kind", to_string(ErrorKind::ConfigError)}, {"message", e.what()}};
        out.report["passed"] = false;
        out.exit_code = 2;
        return out;
    }
}

// Plot data
// ~~~~~~~~~
struct PlotData {
    std::string format;
    std::string text;
};

/// Flat series from a report: distortion profiles as CSV (n, ratio), limit sets as a
/// JSON point list, CAT(0) excesses as CSV (triangle, excess).
inline PlotData emit_plot_data(const Json& report) {
    if (report.contains("result")) {
        const Json& r = report.at("result");
        if (r.contains("profile") && !r.at("profile").empty()) {
            std::ostringstream ss;
            ss << std::setprecision(17) << "n,ratio\n";
            for (const auto& e : r.at("profile")) ss << e.at("n").get<std::size_t>() << ',' << e.at("ratio").get<double>() << '\n';
            return {"csv", ss.str()};
        }
        if (r.contains("points") && !r.at("points").empty()) {
            Json pts = Json::array();
            for (const auto& p : r.at("points")) pts.push_back(p.contains("sphere") ? p.at("sphere") : p.at("coords"));
            return {"json", pts.dump(2) + "\n"};
        }
        if (r.contains("excesses") && !r.at("excesses").empty()) {
            std::ostringstream ss;
            ss << std::setprecision(17) << "triangle,excess\n";
            std::size_t i = 0;
            for (const auto& e : r.at("excesses")) ss << i++ << ',' << e.get<double>() << '\n';
            return {"csv", ss.str()};
        }
    }
    fail(ErrorKind::NothingToPlot, "report has no plottable series");
}

} // namespace horocat
