#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cass/model.hpp"
#include "cass/spectro.hpp"

namespace cass {

enum class NormOrder { l1, l2, linf };

// |recon - truth|_p / |truth|_p. DomainError when the reference norm is zero.
double relative_error(const Tensor& recon, const Tensor& truth, NormOrder p);

struct ErrorReport {
    std::vector<std::string> component_names;
    std::vector<std::array<double, 3>> errors; // per component: L1, L2, Linf
    std::string domain;                        // "spectrogram" or "waveform"
    std::string dataset_id;
    std::string mode;
    uint64_t seed = 0;
};

// One evaluation record: the model-ready tensors plus the original component
// waveforms needed for waveform-domain comparison.
struct EvalItem {
    ModelExample prepared;
    std::vector<Waveform> truth;
};

enum class EvalDomain { spectrogram, waveform };

// Mean relative error over the items, per component and norm order. The
// waveform domain routes each reconstruction back through the inverse
// transform before comparing against the original signals.
ErrorReport evaluate_report(const CassModel& model, const std::vector<EvalItem>& items,
                            EvalDomain domain, const StftConfig& cfg, const Normalizer& norm,
                            const std::string& dataset_id, uint64_t seed);

struct CrossAnalysisRecord {
    size_t source_component = 0; // j: whose autoencoder produced the signal
    size_t judge_component = 0;  // i: whose discriminator judged it (i != j)
    std::vector<double> outputs; // D_i(AE_j(X)) per test sample, each in (0,1)
    double fraction_fake = 0.0;  // share of outputs below 0.5
};

// Every ordered pair (source j -> judge i), j != i, over the test split.
std::vector<CrossAnalysisRecord> cross_discriminator_analysis(
    const CassModel& model, const std::vector<ModelExample>& test);

enum class TableFormat { text, csv };

// One row per component: label column plus the three norms.
std::string render_table(const ErrorReport& report, TableFormat format);
// Inverse of the CSV form above; fills names and errors, leaving the
// mode/domain/dataset fields to the caller.
ErrorReport parse_report_csv(const std::string& text);
// Combined table over several runs; rows ordered by component index, then
// mode name, then dataset id.
std::string render_table(const std::vector<ErrorReport>& reports, TableFormat format);

} // namespace cass
