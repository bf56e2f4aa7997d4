#pragma once

// Statistics over observed image sequences: survival and gain fractions
// between images, the per-cycle metric series, atom-number fluctuations,
// Pearson correlations, exponential decay fits and the recurrence overlay.
// Undefined values (zero denominators, zero variance) are empty optionals.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atomcycle/simulator.hpp"

namespace atomcycle {

using MaybeValue = std::optional<double>;

/// Two images per cycle (tags 1, 2, 1, 2, ...) with the target mask and the
/// tweezer mask they are evaluated against.
struct ImageSequence {
    std::vector<OccupancyMatrix> images;
    SiteMask target;
    SiteMask tweezers;
    /// Planned destinations of each cycle; empty for cycles without resorting.
    std::vector<std::vector<SiteIndex>> destinations;

    std::size_t n_cycles() const { return images.size() / 2; }
    const OccupancyMatrix& first(std::size_t cycle) const { return images.at(2 * cycle); }
    const OccupancyMatrix& second(std::size_t cycle) const { return images.at(2 * cycle + 1); }
};

/// Throws DomainError when tags do not alternate, masks disagree in size or
/// the target leaves the storage zone.
void validate(const ImageSequence& sequence, const LatticeGeometry& geometry);

ImageSequence image_sequence(const RunTrace& trace);

/// |mask ∩ m ∩ n| / |mask ∩ m|
MaybeValue survival_fraction(const OccupancyMatrix& m, const OccupancyMatrix& n, const SiteMask& mask);
/// |mask ∩ n \ m| / |mask ∩ n|
MaybeValue gain_fraction(const OccupancyMatrix& m, const OccupancyMatrix& n, const SiteMask& mask);

/// Per-cycle series. Entries tied to a cycle pair (i, i+1) sit at index i and
/// are empty for the last cycle.
struct FractionSeries {
    std::vector<MaybeValue> loading_fraction;   // |1 ∩ tweezers| / |tweezers|
    std::vector<MaybeValue> move_success;       // destinations filled in 2 / N_L
    std::vector<MaybeValue> shelved_survival;   // s_21'
    std::vector<MaybeValue> stored_survival;    // s_12 over target sites that were not destinations
    std::vector<MaybeValue> cycle_survival;     // s_22'
    std::vector<MaybeValue> survival_1p2p;      // s_1'2'
    std::vector<MaybeValue> gain_1p2p;          // a_1'2'
    std::vector<MaybeValue> gain_21p;           // a_21'
    std::vector<MaybeValue> gain_22p;           // a_22'
    std::vector<MaybeValue> fluctuation;        // ΔN_s/N_s
    std::vector<double> stored_count;           // target occupation of image 2
    std::vector<double> loaded_count;           // tweezer occupation of image 1
};

FractionSeries per_cycle_metrics(const ImageSequence& sequence);

/// (N(i+1) − N(i))/N(i) from a per-cycle count series; needs two counts.
std::vector<MaybeValue> atom_number_fluctuation(std::span<const double> stored_counts);
std::vector<MaybeValue> atom_number_fluctuation(const ImageSequence& sequence);

/// Population covariance over population standard deviations. Needs equal
/// lengths of at least 2 (DomainError otherwise); empty on zero variance.
MaybeValue pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationEntry {
    std::string quantity;
    MaybeValue rho;
    std::size_t n_pairs = 0;  // cycle pairs where both values are defined
};

struct CorrelationReport {
    std::vector<CorrelationEntry> entries;
    const CorrelationEntry* find(const std::string& quantity) const;
};

inline constexpr std::size_t kMinCorrelationPairs = 3;

/// ρ(q, ΔN_s/N_s) for q in s_1'2', s_21', s_22', a_1'2', a_21', a_22', each
/// evaluated on the cycle pair (i, i+1) as ΔN_s/N_s. Throws
/// InsufficientDataError below kMinCorrelationPairs cycle pairs.
CorrelationReport correlation_report(const FractionSeries& series);
CorrelationReport correlation_report(const ImageSequence& sequence);

struct DecayWindow {
    std::size_t first = 0;
    std::size_t last = 0;  // inclusive
};

struct DecayFit {
    double survival = 1.0;  // exp(slope); above 1 when the window grows
    double alpha_c = 0.0;   // 1 − survival
    double intercept = 0.0; // fitted log N at window.first
    DecayWindow window;
    double residual_norm = 0.0;  // of the log-space fit
    double slope_stderr = 0.0;
};

/// Least-squares line through log N_i over the inclusive window. Throws
/// InsufficientDataError for windows shorter than 3 or past the data, and
/// DomainError for non-positive counts.
DecayFit fit_decay(std::span<const double> stored_counts, DecayWindow window);

/// Measured inputs for the recurrence overlay, one entry per cycle.
struct OverlayInputs {
    std::vector<double> stored;               // N_i
    std::vector<MaybeValue> alpha_c;          // loss from cycle i to i+1, at index i
    std::vector<MaybeValue> alpha_r;          // resorting loss of cycle i
    std::vector<double> n_loaded;             // N_L of cycle i
    std::vector<bool> resorted;               // cycle i resorted
};

/// Measured cycle loss 1 − |2 ∩ 2' off the destinations of i+1| / |2| and
/// resorting loss 1 − move_success from the images.
OverlayInputs overlay_inputs(const ImageSequence& sequence);

struct Overlay {
    std::vector<double> predicted;
    double alpha_c_resort = 0.0;
    double alpha_r = 0.0;
    double n_load = 0.0;
    /// Decay-phase cycle loss, used with N_L = 0 after resorting stops.
    double alpha_c_decay = 0.0;
};

/// Time-averaged α_c, α_r and N_L of the resorting phase (and α_c of the
/// decay phase), iterated from the observed N_0. Throws InsufficientDataError
/// on an empty series.
Overlay model_overlay(const OverlayInputs& inputs);

}  // namespace atomcycle
