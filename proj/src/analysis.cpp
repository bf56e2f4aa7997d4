#include "atomcycle/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "atomcycle/errors.hpp"
#include "atomcycle/kernels.hpp"

namespace atomcycle {
namespace {

MaybeValue ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

SiteMask mask_of(std::size_t n_sites, const std::vector<SiteIndex>& sites) {
    SiteMask m(n_sites);
    for (SiteIndex s : sites) m.set(s);
    return m;
}

double mean_or(const std::vector<MaybeValue>& v, const std::vector<bool>& use, double fallback) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!use[i] || !v[i]) continue;
        sum += *v[i];
        ++n;
    }
    return n == 0 ? fallback : sum / static_cast<double>(n);
}

}  // namespace

void validate(const ImageSequence& seq, const LatticeGeometry& geometry) {
    if (seq.images.size() % 2 != 0) throw DomainError("image sequence must hold two images per cycle");
    for (std::size_t i = 0; i < seq.images.size(); ++i) {
        const int want = i % 2 == 0 ? 1 : 2;
        if (seq.images[i].image_tag != want)
            throw DomainError("image " + std::to_string(i) + " has tag " + std::to_string(seq.images[i].image_tag) +
                              ", expected " + std::to_string(want));
        if (seq.images[i].occupied.size() != geometry.site_count())
            throw DomainError("image " + std::to_string(i) + " does not match the lattice size");
    }
    if (seq.target.size() != geometry.site_count() || seq.tweezers.size() != geometry.site_count())
        throw DomainError("target and tweezer masks must match the lattice size");
    SiteMask outside = seq.target;
    outside.subtract(geometry.storage_zone());
    if (!outside.empty()) throw DomainError("target mask leaves the storage zone");
}

ImageSequence image_sequence(const RunTrace& trace) {
    const LatticeGeometry g(trace.config.geometry);
    const TargetPattern target(g, trace.config.target);
    ImageSequence seq;
    seq.target = target.mask();
    seq.tweezers = g.tweezer_sites();
    seq.images.reserve(trace.records.size() * 2);
    for (const CycleRecord& r : trace.records) {
        seq.images.push_back(r.image1);
        seq.images.push_back(r.image2);
        seq.destinations.push_back(r.destinations);
    }
    return seq;
}

MaybeValue survival_fraction(const OccupancyMatrix& m, const OccupancyMatrix& n, const SiteMask& mask) {
    return ratio(count_and(mask, m.occupied, n.occupied), count_and(mask, m.occupied));
}

MaybeValue gain_fraction(const OccupancyMatrix& m, const OccupancyMatrix& n, const SiteMask& mask) {
    return ratio(count_andnot_and(m.occupied, mask, n.occupied), count_and(mask, n.occupied));
}

std::vector<MaybeValue> atom_number_fluctuation(std::span<const double> counts) {
    if (counts.size() < 2) throw InsufficientDataError("atom-number fluctuation needs at least 2 cycles");
    std::vector<MaybeValue> out(counts.size(), std::nullopt);
    for (std::size_t i = 0; i + 1 < counts.size(); ++i)
        if (counts[i] != 0.0) out[i] = (counts[i + 1] - counts[i]) / counts[i];
    return out;
}

std::vector<MaybeValue> atom_number_fluctuation(const ImageSequence& seq) {
    std::vector<double> counts;
    for (std::size_t i = 0; i < seq.n_cycles(); ++i)
        counts.push_back(static_cast<double>(count_and(seq.target, seq.second(i).occupied)));
    return atom_number_fluctuation(counts);
}

FractionSeries per_cycle_metrics(const ImageSequence& seq) {
    const std::size_t n = seq.n_cycles();
    if (n == 0) throw InsufficientDataError("per-cycle metrics need at least 1 cycle");
    const std::size_t n_sites = seq.target.size();
    FractionSeries f;
    const std::size_t n_tweezers = seq.tweezers.count();

    for (std::size_t i = 0; i < n; ++i) {
        const OccupancyMatrix& one = seq.first(i);
        const OccupancyMatrix& two = seq.second(i);
        const std::size_t loaded = count_and(seq.tweezers, one.occupied);
        f.loaded_count.push_back(static_cast<double>(loaded));
        f.stored_count.push_back(static_cast<double>(count_and(seq.target, two.occupied)));
        f.loading_fraction.push_back(ratio(loaded, n_tweezers));

        const std::vector<SiteIndex>& dests = i < seq.destinations.size() ? seq.destinations[i] : std::vector<SiteIndex>{};
        const SiteMask dest_mask = mask_of(n_sites, dests);
        if (dests.empty())
            f.move_success.push_back(std::nullopt);
        else
            f.move_success.push_back(ratio(count_and(dest_mask, two.occupied), loaded));

        SiteMask unmoved = seq.target;
        unmoved.subtract(dest_mask);
        f.stored_survival.push_back(survival_fraction(one, two, unmoved));

        if (i + 1 < n) {
            const OccupancyMatrix& one_p = seq.first(i + 1);
            const OccupancyMatrix& two_p = seq.second(i + 1);
            f.shelved_survival.push_back(survival_fraction(two, one_p, seq.target));
            f.cycle_survival.push_back(survival_fraction(two, two_p, seq.target));
            f.survival_1p2p.push_back(survival_fraction(one_p, two_p, seq.target));
            f.gain_1p2p.push_back(gain_fraction(one_p, two_p, seq.target));
            f.gain_21p.push_back(gain_fraction(two, one_p, seq.target));
            f.gain_22p.push_back(gain_fraction(two, two_p, seq.target));
        } else {
            for (auto* v : {&f.shelved_survival, &f.cycle_survival, &f.survival_1p2p, &f.gain_1p2p, &f.gain_21p,
                            &f.gain_22p})
                v->push_back(std::nullopt);
        }
    }
    f.fluctuation = n >= 2 ? atom_number_fluctuation(f.stored_count) : std::vector<MaybeValue>(n, std::nullopt);
    return f;
}

MaybeValue pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("pearson: series lengths differ");
    if (x.size() < 2) throw DomainError("pearson: need at least 2 values");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    const kernels::Moments mo = kernels::active().centered_moments(x.data(), y.data(), x.size(), mx, my);
    if (!(mo.sxx > 0.0) || !(mo.syy > 0.0)) return std::nullopt;
    const double rho = (mo.sxy / n) / (std::sqrt(mo.sxx / n) * std::sqrt(mo.syy / n));
    return std::clamp(rho, -1.0, 1.0);
}

const CorrelationEntry* CorrelationReport::find(const std::string& quantity) const {
    for (const CorrelationEntry& e : entries)
        if (e.quantity == quantity) return &e;
    return nullptr;
}

CorrelationReport correlation_report(const FractionSeries& f) {
    const std::size_t n_pairs = f.fluctuation.empty() ? 0 : f.fluctuation.size() - 1;
    if (n_pairs < kMinCorrelationPairs)
        throw InsufficientDataError("correlation report needs at least " + std::to_string(kMinCorrelationPairs) +
                                    " cycle pairs (" + std::to_string(kMinCorrelationPairs + 1) + " cycles), got " +
                                    std::to_string(n_pairs));
    const std::pair<const char*, const std::vector<MaybeValue>*> quantities[] = {
        {"s_1'2'", &f.survival_1p2p}, {"s_21'", &f.shelved_survival}, {"s_22'", &f.cycle_survival},
        {"a_1'2'", &f.gain_1p2p},     {"a_21'", &f.gain_21p},         {"a_22'", &f.gain_22p},
    };
    CorrelationReport report;
    for (const auto& [name, series] : quantities) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < n_pairs; ++i) {
            if (!(*series)[i] || !f.fluctuation[i]) continue;
            xs.push_back(*(*series)[i]);
            ys.push_back(*f.fluctuation[i]);
        }
        CorrelationEntry e{name, std::nullopt, xs.size()};
        if (xs.size() >= 2) e.rho = pearson(xs, ys);
        report.entries.push_back(e);
    }
    return report;
}

CorrelationReport correlation_report(const ImageSequence& sequence) {
    return correlation_report(per_cycle_metrics(sequence));
}

DecayFit fit_decay(std::span<const double> counts, DecayWindow w) {
    if (w.last < w.first || w.last - w.first + 1 < 3)
        throw InsufficientDataError("decay fit needs a window of at least 3 cycles");
    if (w.last >= counts.size())
        throw InsufficientDataError("decay window ends at cycle " + std::to_string(w.last) + " but only " +
                                    std::to_string(counts.size()) + " cycles are available");
    const std::size_t m = w.last - w.first + 1;
    std::vector<double> t(m), z(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double c = counts[w.first + k];
        if (!(c > 0.0)) throw DomainError("decay fit: non-positive count at cycle " + std::to_string(w.first + k));
        t[k] = static_cast<double>(k);
        z[k] = std::log(c);
    }
    double mt = 0.0, mz = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        mt += t[k];
        mz += z[k];
    }
    mt /= static_cast<double>(m);
    mz /= static_cast<double>(m);
    double stt = 0.0, stz = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        stt += (t[k] - mt) * (t[k] - mt);
        stz += (t[k] - mt) * (z[k] - mz);
    }
    const double slope = stz / stt;
    const double intercept = mz - slope * mt;
    double rss = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double r = z[k] - (intercept + slope * t[k]);
        rss += r * r;
    }
    DecayFit fit;
    fit.survival = std::exp(slope);
    fit.alpha_c = 1.0 - fit.survival;
    fit.intercept = intercept;
    fit.window = w;
    fit.residual_norm = std::sqrt(rss);
    fit.slope_stderr = m > 2 ? std::sqrt(rss / static_cast<double>(m - 2) / stt) : 0.0;
    return fit;
}

OverlayInputs overlay_inputs(const ImageSequence& seq) {
    const FractionSeries f = per_cycle_metrics(seq);
    const std::size_t n = seq.n_cycles();
    OverlayInputs in;
    in.stored = f.stored_count;
    in.n_loaded = f.loaded_count;
    const std::size_t n_sites = seq.target.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool resorted = i < seq.destinations.size() && !seq.destinations[i].empty();
        in.resorted.push_back(resorted);
        in.alpha_r.push_back(f.move_success[i] ? MaybeValue(1.0 - *f.move_success[i]) : std::nullopt);
        if (i + 1 < n) {
            SiteMask old = seq.target;
            if (i + 1 < seq.destinations.size()) old.subtract(mask_of(n_sites, seq.destinations[i + 1]));
            const std::size_t before = count_and(seq.target, seq.second(i).occupied);
            const std::size_t kept = count_and(old, seq.second(i).occupied, seq.second(i + 1).occupied);
            const MaybeValue s = ratio(kept, before);
            in.alpha_c.push_back(s ? MaybeValue(1.0 - *s) : std::nullopt);
        } else {
            in.alpha_c.push_back(std::nullopt);
        }
    }
    return in;
}

Overlay model_overlay(const OverlayInputs& in) {
    const std::size_t n = in.stored.size();
    if (n == 0) throw InsufficientDataError("model overlay needs at least 1 cycle");
    if (in.alpha_c.size() != n || in.alpha_r.size() != n || in.n_loaded.size() != n || in.resorted.size() != n)
        throw DomainError("model overlay: input series lengths differ");

    // α_c at index i describes the transition into cycle i+1, so it belongs to
    // the phase of cycle i+1.
    std::vector<bool> resort_pair(n, false), decay_pair(n, false);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        resort_pair[i] = in.resorted[i + 1];
        decay_pair[i] = !in.resorted[i + 1];
    }
    Overlay o;
    o.alpha_c_resort = mean_or(in.alpha_c, resort_pair, 0.0);
    o.alpha_c_decay = mean_or(in.alpha_c, decay_pair, o.alpha_c_resort);
    o.alpha_r = mean_or(in.alpha_r, in.resorted, 0.0);
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!in.resorted[i]) continue;
        sum += in.n_loaded[i];
        ++k;
    }
    o.n_load = k == 0 ? 0.0 : sum / static_cast<double>(k);

    o.predicted.resize(n);
    o.predicted[0] = in.stored[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (in.resorted[i])
            o.predicted[i] = (1.0 - o.alpha_c_resort) * o.predicted[i - 1] + (1.0 - o.alpha_r) * o.n_load;
        else
            o.predicted[i] = (1.0 - o.alpha_c_decay) * o.predicted[i - 1];
    }
    return o;
}

}  // namespace atomcycle
