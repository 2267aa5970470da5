#include "ksup/cli.hpp"

#include "ksup/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ksup::cli {

namespace {

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    bool points = false;
};

struct Marker {
    double x;
    std::string label;
};

constexpr double kW = 800.0;
constexpr double kH = 480.0;
constexpr double kPad = 50.0;

std::string svg(const std::string& title, const std::vector<Series>& series,
                const std::vector<Marker>& markers) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    for (const auto& m : markers) {
        x0 = std::min(x0, m.x);
        x1 = std::max(x1, m.x);
    }
    if (!std::isfinite(x0)) {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    y0 = std::min(y0, 0.0);
    if (x1 - x0 < 1e-12) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (y1 - y0 < 1e-12)
        y1 = y0 + 1.0;
    auto px = [&](double x) { return kPad + (x - x0) / (x1 - x0) * (kW - 2 * kPad); };
    auto py = [&](double y) { return kH - kPad - (y - y0) / (y1 - y0) * (kH - 2 * kPad); };

    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kPad << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    os << "<line x1=\"" << kPad << "\" y1=\"" << py(0) << "\" x2=\"" << kW - kPad << "\" y2=\""
       << py(0) << "\" stroke=\"#999\"/>\n";
    os << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\""
       << kH - kPad << "\" stroke=\"#999\"/>\n";
    os << "<text x=\"" << kPad << "\" y=\"" << kH - kPad + 15 << "\">" << x0 << "</text>\n";
    os << "<text x=\"" << kW - kPad << "\" y=\"" << kH - kPad + 15
       << "\" text-anchor=\"end\">" << x1 << "</text>\n";
    os << "<text x=\"" << kPad - 4 << "\" y=\"" << kPad << "\" text-anchor=\"end\">" << y1
       << "</text>\n";
    os << "<text x=\"" << kPad - 4 << "\" y=\"" << kH - kPad << "\" text-anchor=\"end\">" << y0
       << "</text>\n";
    for (const auto& m : markers) {
        os << "<line x1=\"" << px(m.x) << "\" y1=\"" << kPad << "\" x2=\"" << px(m.x)
           << "\" y2=\"" << kH - kPad << "\" stroke=\"#c33\" stroke-dasharray=\"4 3\"/>\n";
        os << "<text x=\"" << px(m.x) + 3 << "\" y=\"" << kPad + 12 << "\" fill=\"#c33\">"
           << m.label << "</text>\n";
    }
    double ly = 36;
    for (const auto& s : series) {
        if (s.points) {
            for (std::size_t i = 0; i < s.x.size(); ++i)
                os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
                   << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                os << px(s.x[i]) << "," << py(s.y[i]) << " ";
            os << "\"/>\n";
        }
        os << "<text x=\"" << kW - kPad - 200 << "\" y=\"" << ly << "\" fill=\"" << s.color
           << "\">" << s.label << "</text>\n";
        ly += 14;
    }
    os << "</svg>\n";
    return os.str();
}

// Min/max per pixel column keeps the shape of functions with many knots.
Series decimate(const PL1D& f, double a, double b, const std::string& label,
                const std::string& color) {
    Series s{label, color, {}, {}, false};
    const int cols = 1200;
    const auto& xs = f.breakpoints();
    const auto& ys = f.values();
    for (int c = 0; c < cols; ++c) {
        const double lo = a + (b - a) * c / cols;
        const double hi = a + (b - a) * (c + 1) / cols;
        double mn = std::min(f(lo), f(hi));
        double mx = std::max(f(lo), f(hi));
        auto i0 = std::lower_bound(xs.begin(), xs.end(), lo);
        auto i1 = std::upper_bound(xs.begin(), xs.end(), hi);
        for (auto it = i0; it < i1; ++it) {
            const double y = ys[static_cast<std::size_t>(it - xs.begin())];
            mn = std::min(mn, y);
            mx = std::max(mx, y);
        }
        s.x.push_back(lo);
        s.y.push_back(mn);
        s.x.push_back(0.5 * (lo + hi));
        s.y.push_back(mx);
    }
    return s;
}

const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                         "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p);
    if (!os)
        throw std::runtime_error("cannot write " + p.string());
    os << text;
}

std::string g17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace

int cmd_plot(const std::filesystem::path& path, const std::string& kind,
             const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
    auto fail = [&](int code, const std::string& msg) {
        err << "level=error cmd=plot msg=\"" << msg << "\"\n";
        return code;
    };
    static const std::vector<std::string> kinds = {"residual-decay", "h-gallery", "phi-gallery",
                                                   "g"};
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
        return fail(kConfigError, "unknown plot kind '" + kind +
                                      "' (residual-decay, h-gallery, phi-gallery, g)");
    Representation rep;
    try {
        json j = load_json(path);
        if (j.contains("representation") && j.at("representation").is_string())
            j = load_json(path.parent_path() / j.at("representation").get<std::string>());
        rep = representation_from_json(j);
    } catch (const std::exception& e) {
        return fail(kConfigError, e.what());
    }
    const auto dir = out_dir.empty() ? path.parent_path() : out_dir;
    const Scheme& s = rep.scheme;
    std::vector<Series> series;
    std::vector<Marker> markers;
    std::ostringstream csv;
    std::string title;

    if (kind == "residual-decay") {
        title = "grid residual M_{k,0}, M_{k,1} and the decay envelope at i = 1";
        Series m0{"M_{k,0}", kColors[0], {}, {}, true};
        Series m1{"M_{k,1}", kColors[1], {}, {}, true};
        Series env{"(k+1) eps1^(alpha k - (1-alpha))", kColors[3], {}, {}, false};
        std::vector<std::vector<double>> rows;
        for (const auto& r : rep.trace)
            rows.push_back(r.M);
        if (!rep.final_M.empty() && (rep.trace.empty() || !rep.trace.back().zero_branch))
            rows.push_back(rep.final_M);
        csv << "k,M_k0,M_k1,envelope_1\n";
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const double kk = static_cast<double>(k);
            const double e = (kk + 1.0) * std::pow(s.eps1, s.alpha * kk - (1.0 - s.alpha));
            const double a = rows[k].empty() ? 0.0 : rows[k][0];
            const double b = rows[k].size() > 1 ? rows[k][1] : 0.0;
            m0.x.push_back(kk);
            m0.y.push_back(a);
            m1.x.push_back(kk);
            m1.y.push_back(b);
            // f = 0 has nothing to bound
            if (!(rep.trace.size() == 1 && rep.trace[0].zero_branch)) {
                env.x.push_back(kk);
                env.y.push_back(e);
            }
            csv << k << "," << g17(a) << "," << g17(b) << "," << g17(e) << "\n";
        }
        series = {m0, m1};
        if (!env.x.empty())
            series.push_back(env);
    } else if (kind == "h-gallery") {
        title = "outer stages h_k";
        csv << "k,breakpoints,support_lo,support_hi,nonzero_outside\n";
        double hi_all = 0.0;
        for (std::size_t k = 0; k < rep.stages.size(); ++k) {
            const auto& h = rep.stages[k];
            const int N = k < rep.trace.size() ? rep.trace[k].N : 0;
            const double lo = s.support_lo(N);
            const double hi = s.support_hi(N);
            bool outside = h.left_ext() == Extension::Affine || h.right_ext() == Extension::Affine;
            for (std::size_t i = 0; i < h.size(); ++i)
                if (h.values()[i] != 0.0 && !(h.breakpoints()[i] > lo && h.breakpoints()[i] < hi))
                    outside = true;
            if (!h.empty() && (h.values().front() != 0.0 || h.values().back() != 0.0))
                outside = true;
            csv << k << "," << h.size() << "," << g17(lo) << "," << g17(hi) << ","
                << (outside ? 1 : 0) << "\n";
            if (outside)
                return fail(kInvariantFailed,
                            "h_" + std::to_string(k) + " is nonzero outside its support window");
            hi_all = std::max(hi_all, hi);
            series.push_back(decimate(h, lo - 1.0, hi + 1.0, "h_" + std::to_string(k),
                                      kColors[k % 10]));
            markers.push_back({hi, "D_N+2 (k=" + std::to_string(k) + ")"});
        }
        markers.push_back({s.support_lo(0), s.variant == Variant::Standard ? "-2" : "lo"});
    } else if (kind == "phi-gallery") {
        title = "inner functions phi_q";
        const int N = rep.trace.empty() ? 0 : rep.trace.back().N;
        const double D = s.D(N);
        csv << "q,plateaus,baseline_deviation\n";
        for (std::size_t q = 0; q < rep.family.size(); ++q) {
            const auto& f = rep.family[q];
            csv << q + 1 << "," << f.plateaus().size() << "," << g17(f.baseline_deviation())
                << "\n";
            series.push_back(decimate(f.realized(), -D - 1.0, D + 1.0,
                                      "phi_" + std::to_string(q + 1), kColors[q % 10]));
        }
        markers = {{-D, "-D_N"}, {D, "D_N"}};
    } else {
        title = "outer function g";
        const auto& g = rep.g;
        csv << "x,y\n";
        for (std::size_t i = 0; i < g.size(); ++i)
            csv << g17(g.breakpoints()[i]) << "," << g17(g.values()[i]) << "\n";
        const double a = g.empty() ? -1.0 : g.breakpoints().front();
        const double b = g.empty() ? 1.0 : g.breakpoints().back();
        series.push_back(decimate(g, a, b, "g", kColors[0]));
        const int N = rep.trace.empty() ? 0 : rep.trace.back().N;
        markers = {{s.support_lo(N), "support"}, {s.support_hi(N), "D_N+2"}};
        out << "g breakpoints: " << g.size() << "\n";
    }

    try {
        std::filesystem::create_directories(dir);
        const auto svg_path = dir / (kind + ".svg");
        write_file(svg_path, svg(title, series, markers));
        write_file(dir / (kind + ".csv"), csv.str());
        out << svg_path.string() << "\n";
    } catch (const std::exception& e) {
        return fail(kConfigError, e.what());
    }
    return kOk;
}

} // namespace ksup::cli
