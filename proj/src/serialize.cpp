#include "ksup/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace ksup {

json num(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

double num(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
        if (s == "nan")
            return std::numeric_limits<double>::quiet_NaN();
        throw std::invalid_argument("expected a number, got '" + s + "'");
    }
    return j.get<double>();
}

namespace {

json nums(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v)
        a.push_back(num(x));
    return a;
}

std::vector<double> nums(const json& j) {
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& x : j)
        v.push_back(num(x));
    return v;
}

} // namespace

json to_json(const PL1D& f) {
    return {{"breakpoints", f.breakpoints()},
            {"values", f.values()},
            {"left_ext", to_string(f.left_ext())},
            {"right_ext", to_string(f.right_ext())}};
}

PL1D pl1d_from_json(const json& j) {
    return PL1D(j.at("breakpoints").get<std::vector<double>>(),
                j.at("values").get<std::vector<double>>(),
                extension_from_string(j.at("left_ext").get<std::string>()),
                extension_from_string(j.at("right_ext").get<std::string>()));
}

json to_json(const PlateauFunction& f) {
    json plats = json::array();
    for (const auto& p : f.plateaus())
        plats.push_back({p.lo, p.hi, p.value});
    return {{"baseline", to_string(f.baseline())}, {"ramp", f.ramp()}, {"plateaus", plats}};
}

PlateauFunction plateau_from_json(const json& j) {
    std::vector<Plateau> plats;
    for (const auto& p : j.at("plateaus"))
        plats.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    const Baseline b = baseline_from_string(j.at("baseline").get<std::string>());
    if (plats.empty())
        return PlateauFunction::identity_of(b);
    return PlateauFunction(std::move(plats), b, j.at("ramp").get<double>());
}

json to_json(const Scheme& s) {
    json j = {{"variant", to_string(s.variant)},
              {"n", s.n},
              {"m", s.m},
              {"rows", s.rows},
              {"baseline", to_string(s.baseline)},
              {"eps0", s.eps0},
              {"eps1", s.eps1},
              {"eps", s.eps},
              {"alpha", s.alpha},
              {"C", s.C},
              {"D_base", s.D_base}};
    if (s.variant == Variant::Standard) {
        const Params& p = s.params;
        j["params"] = {{"n", p.n},
                       {"m", p.m},
                       {"lambda", p.lambda},
                       {"lambda_min", p.lambda_min},
                       {"C", p.C},
                       {"eps0", p.eps0},
                       {"eps1", p.eps1},
                       {"eps_max", p.eps_max},
                       {"eps", p.eps},
                       {"alpha_max", p.alpha_max},
                       {"alpha", p.alpha}};
    }
    return j;
}

Scheme scheme_from_json(const json& j) {
    Scheme s;
    s.variant = variant_from_string(j.at("variant").get<std::string>());
    s.n = j.at("n").get<int>();
    s.m = j.at("m").get<int>();
    s.rows = j.at("rows").get<std::vector<std::vector<double>>>();
    s.baseline = baseline_from_string(j.at("baseline").get<std::string>());
    s.eps0 = j.at("eps0").get<double>();
    s.eps1 = j.at("eps1").get<double>();
    s.eps = j.at("eps").get<double>();
    s.alpha = j.at("alpha").get<double>();
    s.C = j.at("C").get<double>();
    s.D_base = j.at("D_base").get<double>();
    if (j.contains("params")) {
        const auto& q = j.at("params");
        Params& p = s.params;
        p.n = q.at("n").get<int>();
        p.m = q.at("m").get<int>();
        p.lambda = q.at("lambda").get<std::vector<double>>();
        p.lambda_min = q.at("lambda_min").get<double>();
        p.C = q.at("C").get<double>();
        p.eps0 = q.at("eps0").get<double>();
        p.eps1 = q.at("eps1").get<double>();
        p.eps_max = q.at("eps_max").get<double>();
        p.eps = q.at("eps").get<double>();
        p.alpha_max = q.at("alpha_max").get<double>();
        p.alpha = q.at("alpha").get<double>();
    }
    if (s.rows.size() != static_cast<std::size_t>(s.m))
        throw std::invalid_argument("scheme: row count does not match m");
    for (const auto& r : s.rows)
        if (r.size() != static_cast<std::size_t>(s.n))
            throw std::invalid_argument("scheme: row length does not match n");
    return s;
}

json to_json(const WeightMatrix& w) {
    return {{"n", w.n},       {"m", w.m},   {"rows", w.rows},       {"seed", w.seed},
            {"C", w.C},       {"D", w.D},   {"eps0", w.eps0},       {"eps1", w.eps1}};
}

WeightMatrix weights_from_json(const json& j) {
    WeightMatrix w;
    w.n = j.at("n").get<int>();
    w.m = j.at("m").get<int>();
    w.rows = j.at("rows").get<std::vector<std::vector<double>>>();
    w.seed = j.at("seed").get<std::uint64_t>();
    w.C = j.at("C").get<double>();
    w.D = j.at("D").get<double>();
    w.eps0 = j.at("eps0").get<double>();
    w.eps1 = j.at("eps1").get<double>();
    return w;
}

json to_json(const StageRecord& r) {
    return {{"k", r.k},
            {"N", r.N},
            {"eta", num(r.eta)},
            {"delta", num(r.delta)},
            {"xi", num(r.xi)},
            {"f_norm", num(r.f_norm)},
            {"f_lipschitz", num(r.f_lipschitz)},
            {"M", nums(r.M)},
            {"h_norm", num(r.h_norm)},
            {"t", r.t},
            {"lhs", nums(r.lhs)},
            {"rhs", nums(r.rhs)},
            {"h_norm_t", nums(r.h_norm_t)},
            {"h_bound_t", nums(r.h_bound_t)},
            {"gamma_min", num(r.gamma_min)},
            {"radius", num(r.radius)},
            {"budget", num(r.budget)},
            {"budget_spent", num(r.budget_spent)},
            {"knots", r.knots},
            {"knot_max_gap", num(r.knot_max_gap)},
            {"zero_branch", r.zero_branch},
            {"attempts", r.attempts}};
}

StageRecord stage_record_from_json(const json& j) {
    StageRecord r;
    r.k = j.at("k").get<int>();
    r.N = j.at("N").get<int>();
    r.eta = num(j.at("eta"));
    r.delta = num(j.at("delta"));
    r.xi = num(j.at("xi"));
    r.f_norm = num(j.at("f_norm"));
    r.f_lipschitz = num(j.at("f_lipschitz"));
    r.M = nums(j.at("M"));
    r.h_norm = num(j.at("h_norm"));
    r.t = j.at("t").get<std::vector<int>>();
    r.lhs = nums(j.at("lhs"));
    r.rhs = nums(j.at("rhs"));
    r.h_norm_t = nums(j.at("h_norm_t"));
    r.h_bound_t = nums(j.at("h_bound_t"));
    r.gamma_min = num(j.at("gamma_min"));
    r.radius = num(j.at("radius"));
    r.budget = num(j.at("budget"));
    r.budget_spent = num(j.at("budget_spent"));
    r.knots = j.at("knots").get<std::size_t>();
    r.knot_max_gap = num(j.at("knot_max_gap"));
    r.zero_branch = j.at("zero_branch").get<bool>();
    r.attempts = j.at("attempts").get<int>();
    return r;
}

json to_json(const Representation& rep) {
    json fam = json::array();
    for (const auto& f : rep.family)
        fam.push_back(to_json(f));
    json stages = json::array();
    for (const auto& h : rep.stages)
        stages.push_back(to_json(h));
    json trace = json::array();
    for (const auto& r : rep.trace)
        trace.push_back(to_json(r));
    return {{"format", "ksup-representation-1"},
            {"scheme", to_json(rep.scheme)},
            {"family", fam},
            {"stages", stages},
            {"g", to_json(rep.g)},
            {"output_scale", rep.output_scale},
            {"target", rep.target},
            {"stop", {{"tol", rep.stop.tol}, {"K_max", rep.stop.k_max}, {"T_max", rep.stop.t_max}}},
            {"options",
             {{"grid_res", rep.options.grid_res},
              {"max_boxes", rep.options.max_boxes},
              {"delta_rule", rep.options.rule == DeltaRule::Textbook ? "textbook" : "anchor"},
              {"max_retries", rep.options.max_retries},
              {"modulus",
               rep.options.modulus == ModulusSource::Certified ? "certified" : "estimated"},
              {"seed", rep.options.seed}}},
            {"trace", trace},
            {"final_M", nums(rep.final_M)},
            {"status", to_string(rep.status)},
            {"abort_reason", rep.abort_reason},
            {"abort_stage", rep.abort_stage},
            {"notes", rep.notes}};
}

Representation representation_from_json(const json& j) {
    if (j.value("format", "") != "ksup-representation-1")
        throw std::invalid_argument("not a representation file");
    Representation rep;
    rep.scheme = scheme_from_json(j.at("scheme"));
    for (const auto& f : j.at("family"))
        rep.family.push_back(plateau_from_json(f));
    if (rep.family.size() != static_cast<std::size_t>(rep.scheme.m))
        throw std::invalid_argument("representation: family size does not match m");
    for (const auto& h : j.at("stages"))
        rep.stages.push_back(pl1d_from_json(h));
    rep.g = pl1d_from_json(j.at("g"));
    rep.output_scale = j.at("output_scale").get<double>();
    rep.target = j.at("target").get<std::string>();
    const auto& st = j.at("stop");
    rep.stop.tol = st.at("tol").get<double>();
    rep.stop.k_max = st.at("K_max").get<int>();
    rep.stop.t_max = st.at("T_max").get<int>();
    const auto& o = j.at("options");
    rep.options.grid_res = o.at("grid_res").get<int>();
    rep.options.max_boxes = o.at("max_boxes").get<std::uint64_t>();
    rep.options.rule = o.at("delta_rule").get<std::string>() == "textbook" ? DeltaRule::Textbook
                                                                       : DeltaRule::Anchor;
    rep.options.max_retries = o.at("max_retries").get<int>();
    rep.options.modulus = o.at("modulus").get<std::string>() == "certified"
                              ? ModulusSource::Certified
                              : ModulusSource::Estimated;
    rep.options.seed = o.at("seed").get<std::uint64_t>();
    for (const auto& r : j.at("trace"))
        rep.trace.push_back(stage_record_from_json(r));
    rep.final_M = nums(j.at("final_M"));
    rep.status = run_status_from_string(j.at("status").get<std::string>());
    rep.abort_reason = j.at("abort_reason").get<std::string>();
    rep.abort_stage = j.at("abort_stage").get<int>();
    rep.notes = j.at("notes").get<std::vector<std::string>>();
    return rep;
}

void save_json(const json& j, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write " + path.string());
    os << j.dump() << '\n';
    if (!os)
        throw std::runtime_error("write failed for " + path.string());
}

namespace {

void write_numbers(std::ostream& os, const std::vector<double>& v) {
    char buf[40];
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        const int len = std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        if (i)
            os << ',';
        os.write(buf, len);
    }
    os << ']';
}

void write_pl1d(std::ostream& os, const PL1D& f) {
    os << "{\"breakpoints\":";
    write_numbers(os, f.breakpoints());
    os << ",\"values\":";
    write_numbers(os, f.values());
    os << ",\"left_ext\":\"" << to_string(f.left_ext()) << "\",\"right_ext\":\""
       << to_string(f.right_ext()) << "\"}";
}

} // namespace

void save_representation(const Representation& rep, const std::filesystem::path& path) {
    Representation head;
    head.scheme = rep.scheme;
    head.family = rep.family;
    head.output_scale = rep.output_scale;
    head.target = rep.target;
    head.stop = rep.stop;
    head.options = rep.options;
    head.trace = rep.trace;
    head.final_M = rep.final_M;
    head.status = rep.status;
    head.abort_reason = rep.abort_reason;
    head.abort_stage = rep.abort_stage;
    head.notes = rep.notes;
    json small = to_json(head);

    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write " + path.string());
    os << '{';
    bool first = true;
    for (auto it = small.begin(); it != small.end(); ++it) {
        if (!first)
            os << ',';
        first = false;
        os << json(it.key()).dump() << ':';
        if (it.key() == "g") {
            write_pl1d(os, rep.g);
        } else if (it.key() == "stages") {
            os << '[';
            for (std::size_t k = 0; k < rep.stages.size(); ++k) {
                if (k)
                    os << ',';
                write_pl1d(os, rep.stages[k]);
            }
            os << ']';
        } else {
            os << it.value().dump();
        }
    }
    os << "}\n";
    if (!os)
        throw std::runtime_error("write failed for " + path.string());
}

json load_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot read " + path.string());
    return json::parse(is);
}

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_trace_csv(const Representation& rep, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write " + path.string());
    const int top = rep.stop.t_max + 2;
    os << "k,eta_k,delta_k";
    for (int t = 0; t <= top; ++t)
        os << ",M_k" << t;
    os << ",h_norm,gamma_min,radius,budget_spent,budget,knots,attempts\n";
    for (const auto& r : rep.trace) {
        os << r.k << ',' << g17(r.eta) << ',' << g17(r.delta);
        for (int t = 0; t <= top; ++t)
            os << ',' << (static_cast<std::size_t>(t) < r.M.size() ? g17(r.M[static_cast<std::size_t>(t)]) : "");
        os << ',' << g17(r.h_norm) << ',' << g17(r.gamma_min) << ',' << g17(r.radius) << ','
           << g17(r.budget_spent) << ',' << g17(r.budget) << ',' << r.knots << ',' << r.attempts
           << '\n';
    }
    if (!rep.final_M.empty() && (rep.trace.empty() || !rep.trace.back().zero_branch)) {
        os << rep.stages.size() << ",,";
        for (int t = 0; t <= top; ++t)
            os << ',' << (static_cast<std::size_t>(t) < rep.final_M.size() ? g17(rep.final_M[static_cast<std::size_t>(t)]) : "");
        os << ",,,,,,,\n";
    }
}

json make_report(const Representation& rep, const std::string& representation_file) {
    json trace = json::array();
    for (const auto& r : rep.trace)
        trace.push_back(to_json(r));
    return {{"variant", to_string(rep.scheme.variant)},
            {"target", rep.target},
            {"scheme", to_json(rep.scheme)},
            {"stop", {{"tol", rep.stop.tol}, {"K_max", rep.stop.k_max}, {"T_max", rep.stop.t_max}}},
            {"status", to_string(rep.status)},
            {"abort_reason", rep.abort_reason},
            {"abort_stage", rep.abort_stage},
            {"stages_completed", rep.stages.size()},
            {"final_M", nums(rep.final_M)},
            {"trace", trace},
            {"notes", rep.notes},
            {"representation", representation_file}};
}

} // namespace ksup
