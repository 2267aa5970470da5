#include "ksup/cli.hpp"

#include "ksup/constants.hpp"
#include "ksup/monotone.hpp"
#include "ksup/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ksup::cli {

namespace {

void diag(std::ostream& err, const char* level, const char* cmd, const std::string& msg) {
    err << "level=" << level << " cmd=" << cmd << " msg=\"" << msg << "\"\n";
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || p != last || !std::isfinite(out))
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    return out;
}

long long parse_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || p != last)
        throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep)
        out.push_back("");
    return out;
}

} // namespace

RunConfig parse_config(std::istream& is) {
    RunConfig c;
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (seen[key]++)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        auto positive = [&](long long v) {
            if (v < 1)
                throw ConfigError("key '" + key + "' must be at least 1");
            return v;
        };

        if (key == "n") {
            c.n = static_cast<int>(positive(parse_int(key, val)));
        } else if (key == "m") {
            c.m = static_cast<int>(positive(parse_int(key, val)));
        } else if (key == "lambda") {
            c.lambda.clear();
            if (val != "auto")
                for (const auto& part : split(val, ','))
                    c.lambda.push_back(parse_double(key, part));
        } else if (key == "target") {
            c.target = val;
        } else if (key == "tol") {
            c.tol = parse_double(key, val);
        } else if (key == "K_max") {
            c.k_max = static_cast<int>(positive(parse_int(key, val)));
        } else if (key == "T_max") {
            c.t_max = static_cast<int>(positive(parse_int(key, val)));
        } else if (key == "seed") {
            c.seed = static_cast<std::uint64_t>(parse_int(key, val));
        } else if (key == "variant") {
            try {
                c.variant = variant_from_string(val);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (key == "output") {
            c.output = val;
        } else if (key == "grid_res") {
            c.grid_res = static_cast<int>(parse_int(key, val));
            if (c.grid_res < 2)
                throw ConfigError("grid_res must be at least 2");
        } else if (key == "max_boxes") {
            c.max_boxes = static_cast<std::uint64_t>(positive(parse_int(key, val)));
        } else if (key == "delta_rule") {
            if (val == "textbook")
                c.delta_rule = DeltaRule::Textbook;
            else if (val == "anchor")
                c.delta_rule = DeltaRule::Anchor;
            else
                throw ConfigError("delta_rule must be 'textbook' or 'anchor'");
        } else if (key == "modulus") {
            if (val == "certified")
                c.modulus = ModulusSource::Certified;
            else if (val == "estimated")
                c.modulus = ModulusSource::Estimated;
            else
                throw ConfigError("modulus must be 'certified' or 'estimated'");
        } else if (key == "sphere_resolution") {
            c.sphere_resolution = static_cast<int>(positive(parse_int(key, val)));
        } else {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot read config " + path.string());
    return parse_config(is);
}

int cmd_approximate(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
    const char* cmd = "approximate";
    RunConfig c;
    Scheme scheme;
    TargetFunction target;
    std::optional<WeightMatrix> weights;
    try {
        c = load_config(config);
        target = make_target(c.target, c.n);
        if (c.variant == Variant::Standard) {
            const auto lambda = c.lambda.empty() ? default_lambda(c.n) : c.lambda;
            scheme = standard_scheme(derive(c.n, c.m, lambda));
        } else {
            if (!c.lambda.empty())
                throw ConfigError("lambda does not apply to the monotone variant");
            weights = sample_weights(c.m, c.n, c.seed);
            compute_C(*weights, c.sphere_resolution, 10000, c.seed + 1);
            scheme = monotone_scheme(*weights);
        }
    } catch (const std::exception& e) {
        diag(err, "error", cmd, e.what());
        return kConfigError;
    }

    RunOptions opts;
    opts.grid_res = c.grid_res;
    opts.max_boxes = c.max_boxes;
    opts.rule = c.delta_rule;
    opts.modulus = c.modulus;
    opts.seed = c.seed;
    StopRule stop{c.tol, c.k_max, c.t_max};

    Representation rep;
    try {
        rep = run(target, scheme, stop, opts);
    } catch (const std::exception& e) {
        diag(err, "error", cmd, e.what());
        return kConfigError;
    }

    try {
        std::filesystem::create_directories(c.output);
        save_representation(rep, c.output / "representation.json");
        write_trace_csv(rep, c.output / "trace.csv");
        save_json(make_report(rep, "representation.json"), c.output / "report.json");
        if (weights)
            save_json(to_json(*weights), c.output / "weights.json");
    } catch (const std::exception& e) {
        diag(err, "error", cmd, e.what());
        return kConfigError;
    }

    for (const auto& r : rep.trace) {
        out << "stage " << r.k;
        if (r.zero_branch) {
            out << " zero residual\n";
            continue;
        }
        out << " N=" << r.N << " eta=" << r.eta << " delta=" << r.delta << " knots=" << r.knots
            << " M0=" << r.M[0];
        for (std::size_t i = 0; i < r.t.size(); ++i)
            out << " residual(t=" << r.t[i] << ")=" << r.lhs[i] << "<" << r.rhs[i];
        out << " radius=" << r.radius << "\n";
    }
    if (!rep.final_M.empty())
        out << "final Q_0 residual " << rep.final_M[0] << "\n";
    out << "status " << to_string(rep.status) << ", outputs in " << c.output.string() << "\n";
    if (rep.status == RunStatus::Aborted) {
        diag(err, "error", cmd, rep.abort_reason);
        return kStageAbort;
    }
    return kOk;
}

namespace {

Representation load_any(const std::filesystem::path& path) {
    json j = load_json(path);
    if (j.contains("representation") && j.at("representation").is_string()) {
        // a report: follow the reference
        return representation_from_json(
            load_json(path.parent_path() / j.at("representation").get<std::string>()));
    }
    return representation_from_json(j);
}

std::optional<TargetFunction> catalog_target(const Representation& rep) {
    if (rep.target.empty())
        return std::nullopt;
    try {
        return make_target(rep.target, rep.scheme.n);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

} // namespace

int cmd_eval(const std::filesystem::path& representation, const std::filesystem::path& points,
             const std::filesystem::path& output, std::ostream& out, std::ostream& err) {
    const char* cmd = "eval";
    Representation rep;
    try {
        rep = load_any(representation);
    } catch (const std::exception& e) {
        diag(err, "error", cmd, e.what());
        return kConfigError;
    }
    std::ifstream is(points);
    if (!is) {
        diag(err, "error", cmd, "cannot read " + points.string());
        return kConfigError;
    }
    const int n = rep.scheme.n;
    std::vector<std::vector<double>> xs;
    std::string line;
    int row = 0;
    while (std::getline(is, line)) {
        ++row;
        line = trim(line);
        if (line.empty() || line[0] == '#' || (row == 1 && line[0] == 'x'))
            continue;
        const auto parts = split(line, ',');
        if (static_cast<int>(parts.size()) != n) {
            diag(err, "error", cmd,
                 "row " + std::to_string(row) + ": expected " + std::to_string(n) +
                     " coordinates, got " + std::to_string(parts.size()));
            return kConfigError;
        }
        std::vector<double> x;
        try {
            for (const auto& p : parts)
                x.push_back(parse_double("x", p));
        } catch (const ConfigError&) {
            diag(err, "error", cmd, "row " + std::to_string(row) + ": malformed number");
            return kConfigError;
        }
        xs.push_back(std::move(x));
    }

    const auto target = catalog_target(rep);
    const bool wrapped = rep.target.rfind("wrapped:", 0) == 0;
    std::ofstream file;
    std::ostream* os = &out;
    if (!output.empty()) {
        file.open(output);
        if (!file) {
            diag(err, "error", cmd, "cannot write " + output.string());
            return kConfigError;
        }
        os = &file;
    }
    *os << std::setprecision(17);
    for (int p = 0; p < n; ++p)
        *os << "x" << p + 1 << ",";
    *os << "value";
    if (target)
        *os << ",target,error";
    if (wrapped)
        *os << ",unwrapped,clamped";
    *os << "\n";
    for (const auto& x : xs) {
        for (double c : x)
            *os << c << ",";
        const double v = eval_representation(rep, x);
        *os << v;
        if (target) {
            const double f = (*target)(x);
            *os << "," << f << "," << std::abs(f - v);
        }
        if (wrapped) {
            const auto u = unwrap(v);
            *os << "," << u.value << "," << (u.clamped ? 1 : 0);
        }
        *os << "\n";
    }
    return kOk;
}

namespace {

// Residual of stage j at anchors inside the gated cubes. Families are rebuilt
// from the recorded step.
std::string anchor_violation(const Representation& rep, const Evaluator& fj, std::size_t j) {
    const Scheme& s = rep.scheme;
    const StageRecord& r = rep.trace[j];
    const double D_N = s.D(r.N);
    for (int q = 1; q <= s.m; ++q) {
        const auto fam = build_family_unchecked(q, s.m, r.delta, D_N);
        std::uint64_t count = 1;
        for (int p = 0; p < s.n; ++p)
            count *= fam.size();
        const std::uint64_t stride = std::max<std::uint64_t>(1, count / 400);
        for (std::uint64_t box = 0; box < count; box += stride) {
            const auto a = box_center(fam, box, s.n);
            double na = 0.0;
            for (double c : a)
                na = std::max(na, std::abs(c));
            for (std::size_t i = 0; i < r.t.size(); ++i) {
                if (na > s.D(r.t[i]))
                    continue;
                const double res =
                    std::abs(fj(a) - superpose(rep.stages[j], rep.family, s, a));
                if (!(res < r.rhs[i])) {
                    std::ostringstream os;
                    os << "stage " << j << " anchor of family " << q << " box " << box
                       << ": " << res << " >= " << r.rhs[i];
                    return os.str();
                }
            }
        }
    }
    return "";
}

} // namespace

std::vector<CheckRow> check_representation(const Representation& rep) {
    std::vector<CheckRow> rows;
    const Scheme& s = rep.scheme;
    const auto target = catalog_target(rep);

    CheckRow support{"support", true, ""};
    CheckRow norm{"norm bound", true, ""};
    CheckRow residual_row{"residual bound", true, ""};
    if (!target) {
        const std::string why = "target '" + rep.target + "' not in the catalog, grid checks skipped";
        support.detail = norm.detail = residual_row.detail = why;
    } else {
        const auto checks = reverify(rep, *target);
        const Normalized nt = normalize(*target);
        std::size_t c = 0;
        for (std::size_t j = 0; j < rep.trace.size() && j < rep.stages.size(); ++j) {
            if (rep.trace[j].zero_branch)
                continue;
            const StageCheck& sc = checks[c++];
            if (support.ok && !sc.support_ok) {
                support.ok = false;
                support.detail = "stage " + std::to_string(j) + ": h nonzero outside the window";
            }
            for (std::size_t i = 0; i < sc.h_norm.size() && norm.ok; ++i)
                if (!(sc.h_norm[i] < sc.h_bound[i])) {
                    norm.ok = false;
                    std::ostringstream os;
                    os << "stage " << j << " t=" << i << ": " << sc.h_norm[i]
                       << " >= " << sc.h_bound[i];
                    norm.detail = os.str();
                }
            for (std::size_t i = 0; i < sc.margin.size() && residual_row.ok; ++i)
                if (!(sc.margin[i] > 0.0)) {
                    residual_row.ok = false;
                    std::ostringstream os;
                    os << "stage " << j << " t=" << sc.t[i] << ": " << sc.lhs[i]
                       << " >= " << sc.rhs[i];
                    residual_row.detail = os.str();
                }
            if (residual_row.ok) {
                const Evaluator fj = residual(nt.target.eval, std::span(rep.stages).first(j),
                                              rep.family, s);
                const auto v = anchor_violation(rep, fj, j);
                if (!v.empty()) {
                    residual_row.ok = false;
                    residual_row.detail = v;
                }
            }
        }

        // The last stage again, this time through g itself.
        if (residual_row.ok && !rep.stages.empty() && !rep.trace.empty() &&
            !rep.trace.back().zero_branch && rep.trace.size() == rep.stages.size()) {
            const StageRecord& last = rep.trace.back();
            std::vector<double> x;
            for (std::size_t i = 0; i < last.t.size() && residual_row.ok; ++i) {
                CubeGrid grid(s.n, s.D(last.t[i]), rep.options.grid_res);
                for (std::size_t p = 0; p < grid.size(); ++p) {
                    grid.point(p, x);
                    const double r = std::abs(nt.target(x) - superpose(rep.g, rep.family, s, x));
                    if (!(r < last.rhs[i])) {
                        residual_row.ok = false;
                        std::ostringstream os;
                        os << "through g, t=" << last.t[i] << ": " << r << " >= " << last.rhs[i];
                        residual_row.detail = os.str();
                        break;
                    }
                }
            }
        }
    }
    rows.push_back(support);
    rows.push_back(norm);
    rows.push_back(residual_row);

    CheckRow gsum{"g equals the sum of the stages", true, ""};
    {
        const PL1D expect = sum(rep.stages);
        if (expect.breakpoints() != rep.g.breakpoints() || expect.values() != rep.g.values() ||
            expect.left_ext() != rep.g.left_ext() || expect.right_ext() != rep.g.right_ext()) {
            gsum.ok = false;
            std::size_t first = 0;
            const auto& a = expect.values();
            const auto& b = rep.g.values();
            while (first < a.size() && first < b.size() && a[first] == b[first] &&
                   expect.breakpoints()[first] == rep.g.breakpoints()[first])
                ++first;
            gsum.detail = "first difference at breakpoint " + std::to_string(first);
        }
    }
    rows.push_back(gsum);

    CheckRow final_row{"recorded final residual", true, ""};
    if (target && !rep.final_M.empty()) {
        const Normalized nt = normalize(*target);
        const Evaluator fK = residual(nt.target.eval, rep.stages, rep.family, s);
        for (std::size_t t = 0; t < rep.final_M.size(); ++t) {
            const double v = grid_norm(fK, s.n, s.D(static_cast<int>(t)), rep.options.grid_res);
            if (!(std::abs(v - rep.final_M[t]) <= 1e-9 * std::max(1.0, std::abs(v)))) {
                final_row.ok = false;
                std::ostringstream os;
                os << "t=" << t << ": recomputed " << v << ", recorded " << rep.final_M[t];
                final_row.detail = os.str();
                break;
            }
        }
    } else {
        final_row.detail = "skipped";
    }
    rows.push_back(final_row);

    for (const auto& inv : check_trace(rep))
        rows.push_back({inv.name, inv.ok, inv.detail});

    CheckRow member{"inner class membership", true, ""};
    for (std::size_t q = 0; q < rep.family.size(); ++q) {
        const double dev = rep.family[q].baseline_deviation();
        if (!(dev < 1.0)) {
            member.ok = false;
            member.detail = "phi_" + std::to_string(q + 1) + " deviates by " + std::to_string(dev);
            break;
        }
    }
    rows.push_back(member);

    if (s.variant == Variant::Monotone) {
        CheckRow mono{"monotonicity", true, ""};
        for (std::size_t q = 0; q < rep.family.size(); ++q)
            if (!rep.family[q].is_increasing(true)) {
                mono.ok = false;
                mono.detail = "phi_" + std::to_string(q + 1) + " is not strictly increasing";
                break;
            }
        rows.push_back(mono);
    }
    return rows;
}

int cmd_check(const std::filesystem::path& path, std::ostream& out, std::ostream& err) {
    const char* cmd = "check";
    Representation rep;
    try {
        rep = load_any(path);
    } catch (const std::exception& e) {
        diag(err, "error", cmd, e.what());
        return kConfigError;
    }
    const auto rows = check_representation(rep);
    bool all = true;
    for (const auto& r : rows) {
        out << (r.ok ? "PASS " : "FAIL ") << r.name;
        if (!r.detail.empty())
            out << "  (" << r.detail << ")";
        out << "\n";
        if (!r.ok) {
            all = false;
            diag(err, "error", cmd, "invariant failed: " + r.name);
        }
    }
    if (rep.status == RunStatus::Aborted)
        out << "note: run aborted at stage " << rep.abort_stage << "; completed stages checked\n";
    return all ? kOk : kInvariantFailed;
}

} // namespace ksup::cli
