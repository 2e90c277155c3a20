#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bvcert/audit.hpp"
#include "bvcert/characterization.hpp"
#include "bvcert/common.hpp"
#include "bvcert/geometry.hpp"
#include "bvcert/json_io.hpp"
#include "bvcert/maximal.hpp"
#include "bvcert/space.hpp"
#include "bvcert/variation.hpp"

namespace {

using bvcert::json;

double parse_radius(const std::string& text) {
    if (text == "inf" || text == "Inf" || text == "INF") return bvcert::kInf;
    try {
        size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size() || !(v > 0.0)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw bvcert::input_error("radius must be a positive number or \"inf\", got \"" +
                                  text + "\"");
    }
}

void emit(const json& report, const std::string& output) {
    std::string text = bvcert::dump_json(report);
    if (output.empty())
        std::fwrite(text.data(), 1, text.size(), stdout);
    else
        bvcert::write_text_file(output, text);
}

const bvcert::scalar_field& need_function(const bvcert::space_document& doc,
                                          const std::string& name) {
    auto it = doc.functions.find(name);
    if (it == doc.functions.end())
        throw bvcert::input_error("document has no function named \"" + name + "\"");
    return it->second;
}

const bvcert::point_measure& need_measure(const bvcert::space_document& doc,
                                          const std::string& name) {
    auto it = doc.measures.find(name);
    if (it == doc.measures.end())
        throw bvcert::input_error("document has no measure named \"" + name + "\"");
    return it->second;
}

std::string metric_kind(const bvcert::metric_measure_space& space) {
    if (space.grid) return "grid";
    if (space.graph_backed) return "graph";
    return "matrix";
}

struct common_opts {
    std::string input;
    std::string output;
    int threads = 1;

    void attach(CLI::App* sub, const std::string& input_desc) {
        sub->add_option("input", input, input_desc)->required();
        sub->add_option("--output", output, "write the report here instead of standard output");
        sub->add_option("--threads", threads, "worker thread bound")->check(CLI::PositiveNumber);
    }
};

int run_info(const common_opts& io) {
    bvcert::space_document doc = bvcert::load_space_document_file(io.input);
    json rep = json::object();
    rep["command"] = "info";
    rep["space"] = doc.space.name;
    rep["points"] = doc.space.n;
    rep["metric"] = metric_kind(doc.space);
    rep["diameter"] = doc.space.diameter;
    rep["total_mass"] = doc.space.total_mass;
    json fns = json::array();
    for (const auto& [name, f] : doc.functions) fns.push_back(name);
    rep["functions"] = std::move(fns);
    json ms = json::array();
    for (const auto& [name, m] : doc.measures) ms.push_back(name);
    rep["measures"] = std::move(ms);
    emit(rep, io.output);
    return 0;
}

int run_maximal(const common_opts& io, const std::string& fname, const std::string& mname,
                const std::string& radius_text, int x, bool have_x) {
    if (fname.empty() == mname.empty())
        throw bvcert::input_error("pass exactly one of --function or --measure");
    bvcert::space_document doc = bvcert::load_space_document_file(io.input);
    double R = parse_radius(radius_text);
    json rep = json::object();
    rep["command"] = "maximal";
    rep["space"] = doc.space.name;
    rep["kind"] = fname.empty() ? "measure" : "function";
    rep["name"] = fname.empty() ? mname : fname;
    rep["R"] = bvcert::json_real(R);
    if (have_x) {
        rep["x"] = x;
        double value = fname.empty()
                           ? bvcert::restricted_maximal_measure(doc.space,
                                                                need_measure(doc, mname), x, R)
                           : bvcert::restricted_maximal(doc.space, need_function(doc, fname),
                                                        x, R);
        rep["value"] = value;
    } else {
        bvcert::scalar_field field =
            fname.empty()
                ? bvcert::restricted_maximal_measure_field(doc.space, need_measure(doc, mname),
                                                           R, io.threads)
                : bvcert::restricted_maximal_field(doc.space, need_function(doc, fname), R,
                                                   io.threads);
        rep["values"] = field.values;
    }
    emit(rep, io.output);
    return 0;
}

int run_doubling(const common_opts& io) {
    bvcert::space_document doc = bvcert::load_space_document_file(io.input);
    bvcert::doubling_report dr = bvcert::doubling_constant(doc.space);
    json rep = json::object();
    rep["command"] = "doubling";
    rep["space"] = doc.space.name;
    rep["constant"] = dr.constant;
    json witness = json::object();
    witness["center"] = dr.witness_center;
    witness["radius"] = dr.witness_radius;
    rep["witness"] = std::move(witness);
    rep["dimension"] = bvcert::doubling_dimension(doc.space);
    rep["covering"] = bvcert::covering_constant_5r(doc.space);
    emit(rep, io.output);
    return 0;
}

int run_geometry(const common_opts& io, bool resolve_length, bool have_audit, double audit_s,
                 bool geodesic, int x0, int x, double R, double r, double slack,
                 bool have_slack) {
    bvcert::space_document doc = bvcert::load_space_document_file(io.input);
    int modes = int(resolve_length) + int(have_audit) + int(geodesic);
    if (modes > 1) throw bvcert::input_error("pass at most one geometry mode");

    if (resolve_length) {
        bvcert::space_document out;
        out.space = bvcert::length_metric(doc.space);
        out.functions = doc.functions;
        out.measures = doc.measures;
        emit(bvcert::document_to_json(out), io.output);
        return 0;
    }

    if (geodesic) {
        if (!have_slack) {
            slack = 0.0;
            for (const auto& e : doc.space.edges) slack = std::max(slack, e.length);
        }
        bvcert::geodesic_ball_report gb =
            bvcert::find_geodesic_ball(doc.space, x0, R, x, r, slack);
        json rep = json::object();
        rep["command"] = "geometry";
        rep["space"] = doc.space.name;
        rep["mode"] = "geodesic-ball";
        rep["x0"] = x0;
        rep["R"] = R;
        rep["x"] = x;
        rep["r"] = r;
        rep["slack"] = slack;
        rep["found"] = gb.found;
        rep["witness"] = gb.witness;
        rep["witness_radius"] = gb.radius;
        rep["members"] = gb.members;
        rep["contained"] = gb.contained;
        if (!gb.found) rep["note"] = gb.note;
        bvcert::doubling_report dr = bvcert::doubling_constant(doc.space);
        bvcert::small_ball_report sb = bvcert::check_small_ball(
            doc.space, x0, R, x, r, dr.constant, bvcert::doubling_dimension(doc.space));
        json small = json::object();
        small["lhs"] = sb.lhs;
        small["rhs"] = sb.rhs;
        small["holds"] = sb.holds;
        rep["small_ball"] = std::move(small);
        emit(rep, io.output);
        return gb.found ? 0 : 2;
    }

    json rep = json::object();
    rep["command"] = "geometry";
    rep["space"] = doc.space.name;
    rep["metric"] = metric_kind(doc.space);
    rep["quasiconvexity"] = bvcert::quasiconvexity_constant(doc.space);
    bvcert::doubling_report dr = bvcert::doubling_constant(doc.space);
    rep["doubling"] = dr.constant;
    rep["dimension"] = bvcert::doubling_dimension(doc.space);
    if (have_audit) {
        bvcert::dimension_audit_report da = bvcert::audit_dimension(doc.space, audit_s);
        json audit = json::object();
        audit["s"] = da.s;
        audit["best_constant"] = bvcert::json_real(da.best_constant);
        audit["combinations"] = da.combinations;
        rep["dimension_audit"] = std::move(audit);
    }
    emit(rep, io.output);
    return 0;
}

int run_variation(const common_opts& io, const std::string& fname, const std::string& mode,
                  const std::string& gname, long long path_budget) {
    bvcert::space_document doc = bvcert::load_space_document_file(io.input);
    const bvcert::scalar_field& u = need_function(doc, fname);

    if (!gname.empty()) {
        const bvcert::scalar_field& g = need_function(doc, gname);
        bvcert::path_check_report pr =
            bvcert::upper_gradient_check(doc.space, u, g, path_budget);
        json rep = json::object();
        rep["command"] = "variation";
        rep["space"] = doc.space.name;
        rep["mode"] = "upper-gradient";
        rep["function"] = fname;
        rep["gradient"] = gname;
        rep["paths_checked"] = pr.paths_checked;
        rep["passed"] = pr.passed;
        if (!pr.passed) {
            json witness = json::object();
            witness["from"] = pr.from;
            witness["to"] = pr.to;
            witness["path"] = pr.path;
            witness["difference"] = pr.difference;
            witness["integral"] = pr.integral;
            rep["witness"] = std::move(witness);
        }
        emit(rep, io.output);
        return pr.passed ? 0 : 2;
    }

    bvcert::variation_mode vm = bvcert::parse_variation_mode(mode);
    bvcert::point_measure nu = bvcert::variation_measure(doc.space, u, vm);
    json rep = json::object();
    rep["command"] = "variation";
    rep["space"] = doc.space.name;
    rep["function"] = fname;
    rep["mode"] = mode;
    rep["values"] = nu.masses;
    rep["total"] = bvcert::total_variation(doc.space, u, vm);
    emit(rep, io.output);
    return 0;
}

json poincare_row_json(const bvcert::poincare_row& row) {
    json r = json::object();
    r["center"] = row.center;
    r["radius"] = row.radius;
    r["members"] = row.members;
    r["lhs"] = row.lhs;
    r["rhs_factor"] = row.rhs_factor;
    r["local_constant"] = bvcert::json_real(row.local_constant);
    return r;
}

int run_poincare(const common_opts& io, const std::string& fname, const std::string& mname,
                 double eta, bool normalized) {
    bvcert::space_document doc = bvcert::load_space_document_file(io.input);
    bvcert::poincare_report pr = bvcert::check_ball_poincare(
        doc.space, need_function(doc, fname), need_measure(doc, mname), eta, normalized,
        io.threads);
    json rep = json::object();
    rep["command"] = "poincare";
    rep["space"] = doc.space.name;
    rep["function"] = fname;
    rep["measure"] = mname;
    rep["eta"] = pr.eta;
    rep["normalized"] = pr.normalized;
    rep["minimal_constant"] = bvcert::json_real(pr.minimal_constant);
    rep["worst_index"] = pr.worst_index;
    if (pr.worst_index >= 0)
        rep["worst"] = poincare_row_json(pr.rows[static_cast<size_t>(pr.worst_index)]);
    json rows = json::array();
    for (const auto& row : pr.rows) rows.push_back(poincare_row_json(row));
    rep["rows"] = std::move(rows);
    emit(rep, io.output);
    return std::isfinite(pr.minimal_constant) ? 0 : 2;
}

int run_pointwise(const common_opts& io, const std::string& fname, const std::string& mname,
                  const std::string& gname, const std::string& p_text, double sigma, double c0,
                  bool have_c0) {
    if (mname.empty() == gname.empty())
        throw bvcert::input_error("pass exactly one of --measure or --gradient");
    if (!gname.empty() && have_c0)
        throw bvcert::input_error("--c0 applies to the measure form only");
    bvcert::space_document doc = bvcert::load_space_document_file(io.input);
    const bvcert::scalar_field& u = need_function(doc, fname);
    const double p = parse_radius(p_text);

    bvcert::pointwise_report pw;
    if (!mname.empty()) {
        std::optional<double> c0opt;
        if (have_c0) c0opt = c0;
        pw = bvcert::check_pointwise(doc.space, u, need_measure(doc, mname), sigma, c0opt,
                                     io.threads);
    } else {
        pw = bvcert::check_sobolev_pointwise(doc.space, u, need_function(doc, gname), p, sigma,
                                             io.threads);
    }
    json rep = json::object();
    rep["command"] = "pointwise";
    rep["space"] = doc.space.name;
    rep["function"] = fname;
    if (!mname.empty()) rep["measure"] = mname;
    else {
        rep["gradient"] = gname;
        rep["p"] = bvcert::json_real(p);
    }
    json body = bvcert::pointwise_to_json(pw);
    for (auto& [key, value] : body.items()) rep[key] = value;
    emit(rep, io.output);
    return pw.passed ? 0 : 2;
}

int run_characterize(const common_opts& io, const std::string& fname, const std::string& mname,
                     double sigma, double c0, int audit_balls) {
    bvcert::space_document doc = bvcert::load_space_document_file(io.input);
    bvcert::certificate cert =
        bvcert::characterize(doc, fname, mname, sigma, c0, audit_balls, io.threads);
    emit(bvcert::certificate_to_json(cert), io.output);
    return cert.passed ? 0 : 2;
}

int run_audit(const common_opts& io) {
    bvcert::audit_result res = bvcert::audit_certificate_file(io.input, io.threads);
    json rep = json::object();
    rep["command"] = "audit";
    rep["certificate"] = io.input;
    rep["ok"] = res.ok;
    if (!res.ok) rep["first_issue"] = res.first_issue;
    emit(rep, io.output);
    return res.ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"operators, inequalities, and certificates on finite metric measure spaces"};
    app.require_subcommand(1);

    common_opts info_io;
    CLI::App* info = app.add_subcommand("info", "summarize a space document");
    info_io.attach(info, "space document (JSON)");

    common_opts max_io;
    std::string max_fn, max_ms, max_R = "inf";
    int max_x = 0;
    CLI::App* maximal = app.add_subcommand("maximal", "restricted maximal function values");
    max_io.attach(maximal, "space document (JSON)");
    maximal->add_option("--function", max_fn, "field to maximize averages of");
    maximal->add_option("--measure", max_ms, "measure to maximize ratios of");
    maximal->add_option("--R", max_R, "radius bound, a positive number or \"inf\"");
    CLI::Option* max_x_opt = maximal->add_option("--x", max_x, "evaluate at one point only");

    common_opts dbl_io;
    CLI::App* doubling = app.add_subcommand("doubling", "doubling and covering constants");
    dbl_io.attach(doubling, "space document (JSON)");

    common_opts geo_io;
    bool geo_resolve = false;
    double geo_s = 0.0, geo_R = 0.0, geo_r = 0.0, geo_slack = 0.0;
    int geo_x0 = 0, geo_x = 0;
    CLI::App* geometry = app.add_subcommand("geometry", "metric and dimension diagnostics");
    geo_io.attach(geometry, "space document (JSON)");
    geometry->add_flag("--resolve-length", geo_resolve, "emit the space under its length metric");
    CLI::Option* geo_audit_opt =
        geometry->add_option("--audit-dimension", geo_s, "verify the volume lower bound at s");
    CLI::Option* geo_x0_opt =
        geometry->add_option("--x0", geo_x0, "outer ball center for the geodesic-ball search");
    geometry->add_option("--x", geo_x, "inner ball center");
    geometry->add_option("--R", geo_R, "outer ball radius");
    geometry->add_option("--r", geo_r, "inner ball radius");
    CLI::Option* geo_slack_opt = geometry->add_option(
        "--slack", geo_slack, "tolerance for the midpoint search (default: longest edge)");

    common_opts var_io;
    std::string var_fn, var_mode = "graph", var_g;
    long long var_budget = 10000;
    CLI::App* variation = app.add_subcommand("variation", "variation measure or gradient check");
    var_io.attach(variation, "space document (JSON)");
    variation->add_option("--function", var_fn, "field to differentiate")->required();
    variation->add_option("--mode", var_mode, "graph or grid")
        ->check(CLI::IsMember({"graph", "grid"}));
    variation->add_option("--gradient", var_g, "check this field as an upper gradient instead");
    variation->add_option("--path-budget", var_budget, "paths to enumerate per pair")
        ->check(CLI::PositiveNumber);

    common_opts poi_io;
    std::string poi_fn, poi_ms;
    double poi_eta = 1.0;
    bool poi_norm = false;
    CLI::App* poincare = app.add_subcommand("poincare", "ball oscillation inequality sweep");
    poi_io.attach(poincare, "space document (JSON)");
    poincare->add_option("--function", poi_fn, "field whose oscillation is measured")->required();
    poincare->add_option("--measure", poi_ms, "measure on the dilated ball")->required();
    poincare->add_option("--eta", poi_eta, "dilation factor, at least 1")->required();
    poincare->add_flag("--normalized", poi_norm, "use averaged forms of both sides");

    common_opts pw_io;
    std::string pw_fn, pw_ms, pw_g, pw_p = "1";
    double pw_sigma = 1.0, pw_c0 = 0.0;
    CLI::App* pointwise = app.add_subcommand("pointwise", "two-point maximal inequality check");
    pw_io.attach(pointwise, "space document (JSON)");
    pointwise->add_option("--function", pw_fn, "field on the left-hand side")->required();
    pointwise->add_option("--measure", pw_ms, "measure form: maximal ratios on the right");
    pointwise->add_option("--gradient", pw_g, "gradient form: maximal averages of g^p");
    pointwise->add_option("--p", pw_p, "exponent for the gradient form (inf accepted)");
    pointwise->add_option("--sigma", pw_sigma, "radius scale, at least 1")->required();
    CLI::Option* pw_c0_opt = pointwise->add_option("--c0", pw_c0, "constant to test against");

    common_opts ch_io;
    std::string ch_fn, ch_ms;
    double ch_sigma = 1.0, ch_c0 = 1.0;
    int ch_balls = -1;
    CLI::App* characterize = app.add_subcommand("characterize", "full certificate pipeline");
    ch_io.attach(characterize, "space document (JSON)");
    characterize->add_option("--function", ch_fn, "field under test")->required();
    characterize->add_option("--measure", ch_ms, "candidate variation measure")->required();
    characterize->add_option("--sigma", ch_sigma, "radius scale, at least 1")->required();
    characterize->add_option("--c0", ch_c0, "pointwise constant to certify")->required();
    characterize->add_option("--audit-balls", ch_balls,
                             "trace this many worst balls (-1: all when n <= 200, else 32)");

    common_opts au_io;
    CLI::App* audit = app.add_subcommand("audit", "recheck a certificate");
    au_io.attach(audit, "certificate document (JSON)");

    int rc = 0;
    info->callback([&] { rc = run_info(info_io); });
    maximal->callback([&] {
        rc = run_maximal(max_io, max_fn, max_ms, max_R, max_x, max_x_opt->count() > 0);
    });
    doubling->callback([&] { rc = run_doubling(dbl_io); });
    geometry->callback([&] {
        rc = run_geometry(geo_io, geo_resolve, geo_audit_opt->count() > 0, geo_s,
                          geo_x0_opt->count() > 0, geo_x0, geo_x, geo_R, geo_r, geo_slack,
                          geo_slack_opt->count() > 0);
    });
    variation->callback([&] { rc = run_variation(var_io, var_fn, var_mode, var_g, var_budget); });
    poincare->callback([&] { rc = run_poincare(poi_io, poi_fn, poi_ms, poi_eta, poi_norm); });
    pointwise->callback([&] {
        rc = run_pointwise(pw_io, pw_fn, pw_ms, pw_g, pw_p, pw_sigma, pw_c0,
                           pw_c0_opt->count() > 0);
    });
    characterize->callback(
        [&] { rc = run_characterize(ch_io, ch_fn, ch_ms, ch_sigma, ch_c0, ch_balls); });
    audit->callback([&] { rc = run_audit(au_io); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const bvcert::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
