#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oracle/baseband.hpp"
#include "oracle/impairments.hpp"
#include "oracle/similarity.hpp"

namespace oracle::plan {

enum class ImpairmentType : int { iq = 0, dc = 1 };

const char* type_name(ImpairmentType t);

// One (type, level) cell of the impairment map: the impairment it stands
// for and its BER curve over the SNR grid.
struct MapEntry {
    ImpairmentType type = ImpairmentType::iq;
    int level_index = 0;  // position within its type's bank, ascending impact
    impair::ImpairmentConfig config;
    std::vector<double> ber_raw;  // Monte Carlo estimates per grid SNR
    std::vector<double> ber;      // isotonic (non-increasing in SNR) fit
};

struct ImpairmentMap {
    std::vector<double> snr_grid;  // sorted ascending, dB
    std::vector<MapEntry> entries;
    baseband::Constellation constellation = baseband::Constellation::qpsk;
    uint64_t seed = 0;
    long long bits_per_point = 0;

    const MapEntry* find(ImpairmentType t, int level_index) const;
    std::vector<const MapEntry*> by_type(ImpairmentType t) const;

    // Largest grid SNR strictly below snr_db (the conservative lookup row).
    std::optional<size_t> grid_index_below(double snr_db) const;

    // Regularized BER at an arbitrary SNR, linear interpolation in dB,
    // clamped at the grid ends.
    double ber_at(ImpairmentType t, int level_index, double snr_db) const;
};

struct MapBuildParams {
    std::vector<double> snr_grid;
    long long bits_per_point = 200000;
    double ber_bound = 1e-4;  // resolvability check: bits_per_point >= 10/bound
    baseband::Constellation constellation = baseband::Constellation::qpsk;
    int preamble_symbols = 64;
    int payload_symbols = 512;
    uint64_t seed = 1;
};

// Monte Carlo BER curve per level: known frames are distorted by the level,
// passed through an AWGN channel at each grid SNR, equalized against the
// preamble and sliced; the curve is then regularized to be non-increasing
// in SNR. Levels with only an IQ term go in the iq bank, DC-only levels in
// the dc bank, in input order. Deterministic per params.seed; cells run in
// parallel.
ImpairmentMap build_impairment_map(const std::vector<impair::ImpairmentConfig>& levels,
                                   const MapBuildParams& params);

// Largest level index of the given type whose regularized BER, at the
// greatest grid SNR strictly below snr_db, stays within ber_bound.
// nullopt when no grid point or no level qualifies.
std::optional<int> max_level(const ImpairmentMap& map, ImpairmentType t,
                             double snr_db, double ber_bound);

// Pool-adjacent-violators projection onto non-increasing sequences.
std::vector<double> isotonic_nonincreasing(const std::vector<double>& y);

struct PatternProtocol {
    int n_pattern = 64;
    int preamble_symbols = 64;
    int payload_symbols = 256;
    uint64_t seed = 1;
    baseband::Constellation constellation = baseband::Constellation::qpsk;
};

// The receiver-side signature of an impairment: a fixed known frame is
// distorted, equalized against the preamble (no channel, no noise) and
// subsampled to n_pattern demodulated symbols. Identical protocol inputs
// mean two configs' patterns differ only through the impairments.
pattern::Pattern reference_pattern(const impair::ImpairmentConfig& cfg,
                                   const PatternProtocol& proto);

struct FeasibleMember {
    ImpairmentType type = ImpairmentType::iq;
    int level_index = 0;
    impair::ImpairmentConfig config;
    double ref_ber = 0.0;  // regularized BER at the reference SNR
    pattern::Pattern pat;
};

struct FeasibleSet {
    std::vector<FeasibleMember> members;  // ordered by increasing BER impact
    double emd_threshold = 0.0;           // T
    double ber_bound = 0.0;
    double ref_snr_db = 0.0;

    size_t size() const { return members.size(); }
};

struct SelectParams {
    int n_required = 0;
    double emd_threshold = 0.15;  // T
    double ref_snr_db = 40.0;
    double ber_bound = 1e-4;
    PatternProtocol pattern;
};

// Greedy scan per type, weakest level first (ordered by BER at the
// reference SNR, ties by level index): a candidate joins the set iff its
// reference BER stays within the bound and its pattern sits more than T
// away (per-point EMD) from every admitted pattern. Scanning moves to the
// next impairment type once a type is exhausted and stops as soon as
// n_required members are admitted. Throws InfeasibleError naming the
// shortfall when every type is exhausted first.
FeasibleSet select_feasible(const ImpairmentMap& map, const SelectParams& params);

struct RadioProfile {
    int id = 0;
    double snr_db = 0.0;
    impair::ImpairmentConfig residual;
};

struct Assignment {
    int radio_id = 0;
    int member_index = 0;  // into FeasibleSet::members
    double predicted_ber = 0.0;
};

struct Allocation {
    std::vector<Assignment> assigned;
    std::vector<int> classifiable;    // R1
    std::vector<int> unclassifiable;  // R2
};

// SNR-aware greedy allocation: radios sorted by how much impairment they
// tolerate (c_max ascending), feasible members handed out from weakest to
// strongest, never above a radio's c_max. Radios whose SNR sits below the
// whole grid are unclassifiable outright; radios that cannot take any
// remaining member of one type are retried with the next type.
Allocation allocate_greedy(const std::vector<RadioProfile>& radios,
                           const FeasibleSet& set, const ImpairmentMap& map,
                           double ber_bound);

// Baseline: uniformly samples |radios| distinct members, ignoring SNR.
Allocation allocate_random(const std::vector<RadioProfile>& radios,
                           const FeasibleSet& set, const ImpairmentMap& map,
                           uint64_t seed);

// Sum of predicted BER over all assigned radios.
double total_ber(const Allocation& alloc);

// JSON documents (both directions for the map so plans can be cached).
std::string impairment_map_to_json(const ImpairmentMap& map, const std::string& config_hash);
ImpairmentMap impairment_map_from_json(const std::string& text, std::string* config_hash = nullptr);
std::string allocation_to_json(const Allocation& alloc, const FeasibleSet& set,
                               const std::vector<RadioProfile>& radios,
                               const std::string& config_hash);
std::string feasible_set_to_json(const FeasibleSet& set, const std::string& config_hash);

// CSV report: radio, snr, impairment label, predicted BER.
void write_plan_csv(const std::string& path, const Allocation& alloc,
                    const std::vector<RadioProfile>& radios, const FeasibleSet& set);

}  // namespace oracle::plan
