#include "cass/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cass/errors.hpp"

namespace cass {

namespace {

constexpr int kWidth = 720, kHeight = 440;
constexpr int kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Minimal SVG builder: fixed-size canvas with one linear x/y plot area.
class Svg {
  public:
    Svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
        double x0, double x1, double y0, double y1)
        : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
        if (x1_ <= x0_) x1_ = x0_ + 1.0;
        if (y1_ <= y0_) y1_ = y0_ + 1.0;
        body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
                 "\" height=\"" + std::to_string(kHeight) + "\">\n";
        body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        body_ += "<text x=\"" + std::to_string(kWidth / 2) +
                 "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" font-family=\"sans-serif\">" +
                 title + "</text>\n";
        axes(xlabel, ylabel);
    }

    double px(double x) const {
        return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom);
    }

    void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& color) {
        body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < xs.size(); ++i)
            body_ += num(px(xs[i])) + "," + num(py(ys[i])) + " ";
        body_ += "\"/>\n";
    }

    void dots(const std::vector<double>& xs, const std::vector<double>& ys,
              const std::string& color) {
        for (size_t i = 0; i < xs.size(); ++i)
            body_ += "<circle cx=\"" + num(px(xs[i])) + "\" cy=\"" + num(py(ys[i])) +
                     "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
    }

    void hline(double y, const std::string& color) {
        body_ += "<line x1=\"" + num(px(x0_)) + "\" y1=\"" + num(py(y)) + "\" x2=\"" +
                 num(px(x1_)) + "\" y2=\"" + num(py(y)) + "\" stroke=\"" + color +
                 "\" stroke-dasharray=\"4 3\"/>\n";
    }

    void legend(const std::vector<std::string>& labels) {
        double y = kTop + 8;
        for (size_t i = 0; i < labels.size(); ++i) {
            const std::string c = kPalette[i % std::size(kPalette)];
            body_ += "<line x1=\"" + std::to_string(kWidth - kRight - 130) + "\" y1=\"" + num(y) +
                     "\" x2=\"" + std::to_string(kWidth - kRight - 105) + "\" y2=\"" + num(y) +
                     "\" stroke=\"" + c + "\" stroke-width=\"2\"/>\n";
            body_ += "<text x=\"" + std::to_string(kWidth - kRight - 100) + "\" y=\"" +
                     num(y + 4) + "\" font-size=\"12\" font-family=\"sans-serif\">" + labels[i] +
                     "</text>\n";
            y += 18;
        }
    }

    void save(const std::string& path) {
        body_ += "</svg>\n";
        std::ofstream out(path);
        if (!out) throw DataError("cannot open '" + path + "' for writing");
        out << body_;
        if (!out) throw DataError("write failed on '" + path + "'");
    }

  private:
    void axes(const std::string& xlabel, const std::string& ylabel) {
        body_ += "<rect x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(kTop) +
                 "\" width=\"" + std::to_string(kWidth - kLeft - kRight) + "\" height=\"" +
                 std::to_string(kHeight - kTop - kBottom) +
                 "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (int i = 0; i <= 5; ++i) {
            const double fx = x0_ + (x1_ - x0_) * i / 5.0;
            const double fy = y0_ + (y1_ - y0_) * i / 5.0;
            body_ += "<text x=\"" + num(px(fx)) + "\" y=\"" +
                     std::to_string(kHeight - kBottom + 16) +
                     "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" +
                     num(fx) + "</text>\n";
            body_ += "<text x=\"" + std::to_string(kLeft - 6) + "\" y=\"" + num(py(fy) + 4) +
                     "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" +
                     num(fy) + "</text>\n";
        }
        body_ += "<text x=\"" + std::to_string((kLeft + kWidth - kRight) / 2) + "\" y=\"" +
                 std::to_string(kHeight - 12) +
                 "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" +
                 xlabel + "</text>\n";
        body_ += "<text x=\"16\" y=\"" + std::to_string((kTop + kHeight - kBottom) / 2) +
                 "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
                 "transform=\"rotate(-90 16 " +
                 std::to_string((kTop + kHeight - kBottom) / 2) + ")\">" + ylabel + "</text>\n";
    }

    double x0_, x1_, y0_, y1_;
    std::string body_;
};

std::string curve_file(const std::vector<CurveRun>& runs, const std::string& component,
                       size_t comp_idx, const std::string& path, int from_epoch,
                       const std::string& title) {
    double ymin = 1e300, ymax = -1e300;
    double xmin = 1e300, xmax = -1e300;
    for (const CurveRun& run : runs)
        for (const EpochLog& log : run.logs) {
            if (log.epoch < from_epoch) continue;
            const double e = log.test_l2.at(comp_idx);
            if (e <= 0.0)
                throw DomainError("curve plot: nonpositive test error at epoch " +
                                  std::to_string(log.epoch) + " cannot be log-transformed");
            const double y = std::log10(e);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
            xmin = std::min(xmin, static_cast<double>(log.epoch));
            xmax = std::max(xmax, static_cast<double>(log.epoch));
        }
    if (xmin > xmax) throw ArgumentError("curve plot: no epochs in range");
    const double pad = std::max(0.05, (ymax - ymin) * 0.08);
    Svg svg(title + " - " + component, "epoch", "log10 relative L2 error", xmin, xmax,
            ymin - pad, ymax + pad);
    std::vector<std::string> labels;
    for (size_t r = 0; r < runs.size(); ++r) {
        std::vector<double> xs, ys;
        for (const EpochLog& log : runs[r].logs) {
            if (log.epoch < from_epoch) continue;
            xs.push_back(log.epoch);
            ys.push_back(std::log10(log.test_l2.at(comp_idx)));
        }
        svg.polyline(xs, ys, kPalette[r % std::size(kPalette)]);
        labels.push_back(runs[r].label);
    }
    svg.legend(labels);
    svg.save(path);
    return path;
}

} // namespace

std::vector<std::string> plot_error_curves(const std::vector<CurveRun>& runs,
                                           const std::vector<std::string>& component_names,
                                           const std::string& out_prefix, int last_k) {
    if (runs.empty()) throw ArgumentError("curve plot: no runs");
    for (const CurveRun& run : runs)
        if (run.logs.empty()) throw ArgumentError("curve plot: run '" + run.label + "' is empty");
    if (last_k < 1) throw ArgumentError("curve plot: last_k must be positive");
    std::vector<std::string> files;
    for (size_t c = 0; c < component_names.size(); ++c) {
        files.push_back(curve_file(runs, component_names[c], c,
                                   out_prefix + "curve_" + component_names[c] + ".svg", 1,
                                   "test error"));
        int max_epoch = 0;
        for (const CurveRun& run : runs)
            max_epoch = std::max(max_epoch, run.logs.back().epoch);
        const int from = std::max(1, max_epoch - last_k + 1);
        files.push_back(curve_file(runs, component_names[c], c,
                                   out_prefix + "curve_" + component_names[c] + "_last" +
                                       std::to_string(last_k) + ".svg",
                                   from, "test error, last " + std::to_string(last_k)));
    }
    return files;
}

std::vector<std::string> plot_discriminator_outputs(
    const std::vector<CrossAnalysisRecord>& records,
    const std::vector<std::string>& component_names, const std::string& out_prefix) {
    if (records.empty()) throw ArgumentError("scatter plot: no records");
    std::vector<std::string> files;
    for (const CrossAnalysisRecord& rec : records) {
        const std::string& src = component_names.at(rec.source_component);
        const std::string& judge = component_names.at(rec.judge_component);
        const std::string path = out_prefix + "disc_" + src + "_to_" + judge + ".svg";
        Svg svg("D(" + judge + ") on AE(" + src + ") outputs", "sample", "discriminator output",
                0.0, static_cast<double>(rec.outputs.size() > 1 ? rec.outputs.size() - 1 : 1),
                0.0, 1.0);
        std::vector<double> xs(rec.outputs.size());
        for (size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
        svg.hline(0.5, "#999999");
        svg.dots(xs, rec.outputs, kPalette[0]);
        svg.save(path);
        files.push_back(path);
    }
    return files;
}

} // namespace cass
