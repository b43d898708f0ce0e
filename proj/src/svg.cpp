#include "slx/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "slx/errors.hpp"

namespace slx {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 80;
constexpr int kMarginRight = 30;
constexpr int kMarginTop = 30;
constexpr int kMarginBottom = 70;

const char* kRegionColors[kRegionCount] = {"#d95f02", "#1b9e77", "#7570b3", "#e7298a"};

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string sci(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.1e", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

class SvgWriter {
public:
    explicit SvgWriter(const std::filesystem::path& path) : os_(path), path_(path) {
        if (!os_) throw IoError("cannot write " + path.string());
        os_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
            << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
            << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    ~SvgWriter() {
        if (!closed_) os_ << "</svg>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0, const std::string& dash = {}) {
        os_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
            << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
            << num(width) << "\"";
        if (!dash.empty()) os_ << " stroke-dasharray=\"" << dash << "\"";
        os_ << "/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill) {
        os_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
            << "\" fill=\"" << fill << "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill) {
        os_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
            << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 12,
              const std::string& anchor = "middle", double rotate = 0.0) {
        os_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size
            << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\"";
        if (rotate != 0.0)
            os_ << " transform=\"rotate(" << num(rotate) << " " << num(x) << " " << num(y)
                << ")\"";
        os_ << ">" << xml_escape(s) << "</text>\n";
    }

    void finish() {
        os_ << "</svg>\n";
        closed_ = true;
        os_.flush();
        if (!os_) throw IoError("failed writing " + path_.string());
    }

private:
    std::ofstream os_;
    std::filesystem::path path_;
    bool closed_ = false;
};

}  // namespace

void write_parity_scatter_svg(const std::filesystem::path& path,
                              std::span<const ScatterPoint> points,
                              const std::string& x_label, const std::string& y_label) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& p : points) {
        for (double v : {p.x - p.x_err, p.x + p.x_err, p.y - p.y_err, p.y + p.y_err, p.x, p.y})
            if (v > 0.0 && std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    }
    if (!(lo < hi)) {
        lo = 1.0;
        hi = 10.0;
    }
    const double log_lo = std::floor(std::log10(lo) * 2.0) / 2.0;
    const double log_hi = std::ceil(std::log10(hi) * 2.0) / 2.0;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double v) {
        return kMarginLeft + (std::log10(v) - log_lo) / (log_hi - log_lo) * plot_w;
    };
    auto py = [&](double v) {
        return kMarginTop + plot_h - (std::log10(v) - log_lo) / (log_hi - log_lo) * plot_h;
    };

    SvgWriter svg(path);
    // axes
    svg.line(kMarginLeft, kMarginTop, kMarginLeft, kMarginTop + plot_h, "black");
    svg.line(kMarginLeft, kMarginTop + plot_h, kMarginLeft + plot_w, kMarginTop + plot_h,
             "black");
    // decade ticks
    for (int d = static_cast<int>(std::ceil(log_lo)); d <= static_cast<int>(std::floor(log_hi));
         ++d) {
        const double v = std::pow(10.0, d);
        svg.line(px(v), kMarginTop + plot_h, px(v), kMarginTop + plot_h + 5, "black");
        svg.text(px(v), kMarginTop + plot_h + 20, "1e" + std::to_string(d), 11);
        svg.line(kMarginLeft - 5, py(v), kMarginLeft, py(v), "black");
        svg.text(kMarginLeft - 10, py(v) + 4, "1e" + std::to_string(d), 11, "end");
    }
    svg.text(kMarginLeft + plot_w / 2, kHeight - 20, x_label, 14);
    svg.text(20, kMarginTop + plot_h / 2, y_label, 14, "middle", -90);

    // parity line
    const double vlo = std::pow(10.0, log_lo), vhi = std::pow(10.0, log_hi);
    svg.line(px(vlo), py(vlo), px(vhi), py(vhi), "green", 1.5);

    for (const auto& p : points) {
        if (!(p.x > 0.0) || !(p.y > 0.0)) continue;
        const double x = px(p.x), y = py(p.y);
        if (p.x - p.x_err > 0.0)
            svg.line(px(p.x - p.x_err), y, px(p.x + p.x_err), y, "#3366cc", 1.5);
        if (p.y - p.y_err > 0.0)
            svg.line(x, py(p.y - p.y_err), x, py(p.y + p.y_err), "#cc3333", 1.5);
        svg.circle(x, y, 4, "black");
        svg.text(x + 8, y - 8, p.label, 11, "start");
    }
    svg.finish();
}

void write_budget_bars_svg(const std::filesystem::path& path,
                           std::span<const BudgetBar> bars, const std::string& y_label) {
    double max_loss = 0.0;
    for (const auto& b : bars) {
        double total = 0.0;
        for (double c : b.components) total += c;
        max_loss = std::max({max_loss, b.measured_total, total});
    }
    if (max_loss <= 0.0) max_loss = 1.0;
    max_loss *= 1.1;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto py = [&](double v) { return kMarginTop + plot_h - v / max_loss * plot_h; };

    SvgWriter svg(path);
    svg.line(kMarginLeft, kMarginTop, kMarginLeft, kMarginTop + plot_h, "black");
    svg.line(kMarginLeft, kMarginTop + plot_h, kMarginLeft + plot_w, kMarginTop + plot_h,
             "black");
    for (int t = 0; t <= 5; ++t) {
        const double v = max_loss * t / 5.0;
        svg.line(kMarginLeft - 5, py(v), kMarginLeft, py(v), "black");
        svg.text(kMarginLeft - 10, py(v) + 4, sci(v), 10, "end");
    }
    svg.text(20, kMarginTop + plot_h / 2, y_label, 14, "middle", -90);

    const double group_w = plot_w / std::max<std::size_t>(bars.size(), 1);
    const double bar_w = group_w * 0.3;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const BudgetBar& b = bars[i];
        const double x0 = kMarginLeft + i * group_w + group_w * 0.15;
        // measured total
        svg.rect(x0, py(b.measured_total), bar_w, kMarginTop + plot_h - py(b.measured_total),
                 "#999999");
        // stacked predicted components
        double acc = 0.0;
        for (std::size_t r = 0; r < kRegionCount; ++r) {
            const double c = b.components[r];
            if (c <= 0.0) continue;
            svg.rect(x0 + bar_w * 1.2, py(acc + c), bar_w, py(acc) - py(acc + c),
                     kRegionColors[r]);
            acc += c;
        }
        svg.text(x0 + bar_w, kMarginTop + plot_h + 16, b.label, 10);
    }
    // legend
    double lx = kMarginLeft + 10;
    svg.rect(lx, kMarginTop + 2, 10, 10, "#999999");
    svg.text(lx + 14, kMarginTop + 11, "measured 1/Q_TLS", 11, "start");
    lx += 150;
    for (std::size_t r = 0; r < kRegionCount; ++r) {
        svg.rect(lx, kMarginTop + 2, 10, 10, kRegionColors[r]);
        svg.text(lx + 14, kMarginTop + 11, std::string(to_string(kRegions[r])), 11, "start");
        lx += 60;
    }
    svg.finish();
}

}  // namespace slx
