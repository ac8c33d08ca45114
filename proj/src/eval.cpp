#include "cass/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "cass/errors.hpp"
#include "cass/io.hpp"

namespace cass {

namespace {

double norm_of(const std::vector<double>& v, NormOrder p) {
    double acc = 0.0;
    switch (p) {
        case NormOrder::l1:
            for (double x : v) acc += std::fabs(x);
            return acc;
        case NormOrder::l2:
            for (double x : v) acc += x * x;
            return std::sqrt(acc);
        case NormOrder::linf:
            for (double x : v) acc = std::max(acc, std::fabs(x));
            return acc;
    }
    throw ArgumentError("invalid norm order");
}

} // namespace

double relative_error(const Tensor& recon, const Tensor& truth, NormOrder p) {
    if (recon.shape != truth.shape) throw ArgumentError("relative error: shape mismatch");
    const double ref = norm_of(truth.v, p);
    if (ref == 0.0) throw DomainError("relative error undefined for a zero-norm reference");
    std::vector<double> diff(recon.v.size());
    for (size_t i = 0; i < diff.size(); ++i) diff[i] = recon.v[i] - truth.v[i];
    return norm_of(diff, p) / ref;
}

ErrorReport evaluate_report(const CassModel& model, const std::vector<EvalItem>& items,
                            EvalDomain domain, const StftConfig& cfg, const Normalizer& norm,
                            const std::string& dataset_id, uint64_t seed) {
    if (items.empty()) throw ArgumentError("evaluate: no items");
    const size_t k = model.k();
    ErrorReport report;
    for (const auto& c : model.components) report.component_names.push_back(c.name);
    report.errors.assign(k, {0.0, 0.0, 0.0});
    report.domain = domain == EvalDomain::spectrogram ? "spectrogram" : "waveform";
    report.dataset_id = dataset_id;
    report.mode = mode_name(model.mode);
    report.seed = seed;

    const NormOrder orders[3] = {NormOrder::l1, NormOrder::l2, NormOrder::linf};
    for (const EvalItem& item : items) {
        if (domain == EvalDomain::waveform && item.truth.size() != k)
            throw ArgumentError("evaluate: item lacks per-component waveforms");
        for (size_t i = 0; i < k; ++i) {
            const Tensor recon = model.components[i].reconstruct(item.prepared.mixture);
            if (domain == EvalDomain::spectrogram) {
                for (int o = 0; o < 3; ++o)
                    report.errors[i][o] +=
                        relative_error(recon, item.prepared.targets[i], orders[o]);
            } else {
                const Waveform wave =
                    postprocess(recon, item.prepared.phase, cfg, norm,
                                item.prepared.source_length, item.prepared.sample_rate);
                Tensor rv, tv;
                rv.shape = {static_cast<int>(wave.samples.size())};
                rv.v = wave.samples;
                tv.shape = {static_cast<int>(item.truth[i].samples.size())};
                tv.v = item.truth[i].samples;
                for (int o = 0; o < 3; ++o)
                    report.errors[i][o] += relative_error(rv, tv, orders[o]);
            }
        }
    }
    for (auto& e : report.errors)
        for (double& x : e) x /= static_cast<double>(items.size());
    return report;
}

std::vector<CrossAnalysisRecord> cross_discriminator_analysis(
    const CassModel& model, const std::vector<ModelExample>& test) {
    if (model.mode == Mode::baseline)
        throw ConfigError("cross analysis: baseline mode trains no discriminators");
    if (test.empty()) throw ArgumentError("cross analysis: empty test split");
    std::vector<CrossAnalysisRecord> records;
    const size_t k = model.k();
    for (size_t j = 0; j < k; ++j) {
        for (size_t i = 0; i < k; ++i) {
            if (i == j) continue;
            CrossAnalysisRecord rec;
            rec.source_component = j;
            rec.judge_component = i;
            size_t fake = 0;
            for (const ModelExample& ex : test) {
                const Tensor out_j = model.components[j].reconstruct(ex.mixture);
                const double p = model.components[i].discriminate(out_j);
                rec.outputs.push_back(p);
                if (p < 0.5) ++fake;
            }
            rec.fraction_fake = static_cast<double>(fake) / static_cast<double>(test.size());
            records.push_back(std::move(rec));
        }
    }
    return records;
}

namespace {

std::string fixed5(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5f", v);
    return buf;
}

// CSV cells use the shortest exact form so tables parse back to equal values.
std::string csv_errors(const std::array<double, 3>& e) {
    return format_real(e[0]) + "," + format_real(e[1]) + "," + format_real(e[2]) + "\n";
}

void append_text_row(std::string& out, const std::string& label,
                     const std::array<double, 3>& e, size_t label_width) {
    out += label;
    out.append(label_width > label.size() ? label_width - label.size() : 1, ' ');
    out += fixed5(e[0]) + "  " + fixed5(e[1]) + "  " + fixed5(e[2]) + "\n";
}

} // namespace

std::string render_table(const ErrorReport& report, TableFormat format) {
    if (format == TableFormat::csv) {
        std::string out = "component,l1,l2,linf\n";
        for (size_t i = 0; i < report.component_names.size(); ++i)
            out += report.component_names[i] + "," + csv_errors(report.errors[i]);
        return out;
    }
    size_t width = 12;
    for (const auto& n : report.component_names) width = std::max(width, n.size() + 2);
    std::string out = "dataset: " + report.dataset_id + "  mode: " + report.mode +
                      "  domain: " + report.domain + "  seed: " + std::to_string(report.seed) +
                      "\n";
    out += "component";
    out.append(width - 9, ' ');
    out += "L1       L2       Linf\n";
    for (size_t i = 0; i < report.component_names.size(); ++i)
        append_text_row(out, report.component_names[i], report.errors[i], width);
    return out;
}

ErrorReport parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "component,l1,l2,linf")
        throw DataError("not an error-report CSV");
    ErrorReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string name, l1, l2, linf;
        if (!std::getline(row, name, ',') || !std::getline(row, l1, ',') ||
            !std::getline(row, l2, ',') || !std::getline(row, linf))
            throw DataError("error-report CSV: bad row '" + line + "'");
        report.component_names.push_back(name);
        report.errors.push_back({std::strtod(l1.c_str(), nullptr),
                                 std::strtod(l2.c_str(), nullptr),
                                 std::strtod(linf.c_str(), nullptr)});
    }
    return report;
}

std::string render_table(const std::vector<ErrorReport>& reports, TableFormat format) {
    if (reports.empty()) throw ArgumentError("render table: no reports");
    // All reports must name the same components in the same order.
    for (const auto& r : reports)
        if (r.component_names != reports.front().component_names)
            throw ArgumentError("render table: reports disagree on components");

    struct Row {
        size_t component;
        std::string mode, dataset, label;
        std::array<double, 3> errors;
    };
    std::vector<Row> rows;
    for (const auto& r : reports)
        for (size_t i = 0; i < r.component_names.size(); ++i)
            rows.push_back({i, r.mode, r.dataset_id,
                            r.component_names[i] + " (" + r.mode + ")", r.errors[i]});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.component != b.component) return a.component < b.component;
        if (a.mode != b.mode) return a.mode < b.mode;
        return a.dataset < b.dataset;
    });

    if (format == TableFormat::csv) {
        std::string out = "component,mode,l1,l2,linf\n";
        for (const Row& r : rows)
            out += reports.front().component_names[r.component] + "," + r.mode + "," +
                   csv_errors(r.errors);
        return out;
    }
    size_t width = 12;
    for (const Row& r : rows) width = std::max(width, r.label.size() + 2);
    std::string out = "domain: " + reports.front().domain + "\n";
    out += "component";
    out.append(width - 9, ' ');
    out += "L1       L2       Linf\n";
    for (const Row& r : rows) append_text_row(out, r.label, r.errors, width);
    return out;
}

} // namespace cass
