#include "oracle/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "oracle/errors.hpp"
#include "oracle/parallel.hpp"
#include "oracle/rng.hpp"

namespace oracle::plan {

using json = nlohmann::json;
namespace bb = oracle::baseband;

const char* type_name(ImpairmentType t) {
    return t == ImpairmentType::iq ? "iq" : "dc";
}

const MapEntry* ImpairmentMap::find(ImpairmentType t, int level_index) const {
    for (const MapEntry& e : entries)
        if (e.type == t && e.level_index == level_index) return &e;
    return nullptr;
}

std::vector<const MapEntry*> ImpairmentMap::by_type(ImpairmentType t) const {
    std::vector<const MapEntry*> out;
    for (const MapEntry& e : entries)
        if (e.type == t) out.push_back(&e);
    std::sort(out.begin(), out.end(), [](const MapEntry* a, const MapEntry* b) {
        return a->level_index < b->level_index;
    });
    return out;
}

std::optional<size_t> ImpairmentMap::grid_index_below(double snr_db) const {
    std::optional<size_t> best;
    for (size_t i = 0; i < snr_grid.size(); ++i)
        if (snr_grid[i] < snr_db) best = i;
    return best;
}

double ImpairmentMap::ber_at(ImpairmentType t, int level_index, double snr_db) const {
    const MapEntry* e = find(t, level_index);
    if (!e) throw InvalidInput("ImpairmentMap::ber_at: unknown level");
    if (snr_grid.empty()) throw InvalidInput("ImpairmentMap::ber_at: empty grid");
    if (snr_db <= snr_grid.front()) return e->ber.front();
    if (snr_db >= snr_grid.back()) return e->ber.back();
    size_t hi = 1;
    while (snr_grid[hi] < snr_db) ++hi;
    const double f = (snr_db - snr_grid[hi - 1]) / (snr_grid[hi] - snr_grid[hi - 1]);
    return e->ber[hi - 1] * (1.0 - f) + e->ber[hi] * f;
}

std::vector<double> isotonic_nonincreasing(const std::vector<double>& y) {
    // PAVA on the reversed sequence (non-decreasing there).
    const size_t n = y.size();
    std::vector<double> v(y.rbegin(), y.rend());
    std::vector<double> level;
    std::vector<size_t> weight;
    for (size_t i = 0; i < n; ++i) {
        level.push_back(v[i]);
        weight.push_back(1);
        while (level.size() > 1 && level[level.size() - 2] > level.back()) {
            const double merged =
                (level[level.size() - 2] * static_cast<double>(weight[weight.size() - 2]) +
                 level.back() * static_cast<double>(weight.back())) /
                static_cast<double>(weight[weight.size() - 2] + weight.back());
            weight[weight.size() - 2] += weight.back();
            level[level.size() - 2] = merged;
            level.pop_back();
            weight.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(n);
    for (size_t b = 0; b < level.size(); ++b)
        out.insert(out.end(), weight[b], level[b]);
    std::reverse(out.begin(), out.end());
    return out;
}

namespace {

ImpairmentType classify(const impair::ImpairmentConfig& cfg) {
    const bool has_dc = cfg.dc.offset != bb::cplx{0.0, 0.0};
    return (cfg.iq.identity() && has_dc) ? ImpairmentType::dc : ImpairmentType::iq;
}

// One Monte Carlo BER cell: known frames through the impairment, AWGN at
// the target SNR, preamble equalization, hard slicing.
double simulate_cell_ber(const impair::ImpairmentConfig& level, double snr_db,
                         const MapBuildParams& p, uint64_t cell_id) {
    const std::vector<bb::cplx> preamble = bb::make_preamble(p.seed, p.preamble_symbols);
    const int bps = bb::bits_per_symbol(p.constellation);
    const long long bits_per_frame = static_cast<long long>(p.payload_symbols) * bps;
    const long long frames = (p.bits_per_point + bits_per_frame - 1) / bits_per_frame;

    long long errors = 0, bits = 0;
    for (long long f = 0; f < frames; ++f) {
        Rng frame_rng(p.seed, mix64(cell_id) ^ static_cast<uint64_t>(f));
        bb::Frame frame = bb::make_frame(preamble, p.payload_symbols, p.constellation, frame_rng);
        std::vector<bb::cplx> tx = impair::apply_impairment(frame.samples(), level);

        bb::ChannelRealization ch;
        ch.gain = {1.0, 0.0};
        ch.noise_power_db = -snr_db;
        ch.seed = mix64(cell_id ^ 0x5eedULL) ^ static_cast<uint64_t>(f);
        const std::vector<bb::cplx> rx = bb::apply_channel(tx, ch);

        const bb::Equalized eq = bb::estimate_and_equalize(rx, preamble);
        const std::vector<uint8_t> rx_bits = bb::demodulate(eq.symbols, p.constellation);
        for (size_t k = 0; k < frame.payload_bits.size(); ++k)
            errors += frame.payload_bits[k] != rx_bits[k];
        bits += bits_per_frame;
    }
    return static_cast<double>(errors) / static_cast<double>(bits);
}

}  // namespace

ImpairmentMap build_impairment_map(const std::vector<impair::ImpairmentConfig>& levels,
                                   const MapBuildParams& params) {
    if (levels.empty()) throw InvalidInput("build_impairment_map: no levels");
    if (params.snr_grid.empty()) throw InvalidInput("build_impairment_map: empty SNR grid");
    if (!std::is_sorted(params.snr_grid.begin(), params.snr_grid.end()))
        throw InvalidInput("build_impairment_map: SNR grid must be sorted ascending");
    if (params.ber_bound <= 0.0 ||
        static_cast<double>(params.bits_per_point) < 10.0 / params.ber_bound)
        throw ConfigError("build_impairment_map: bits_per_point too small to resolve ber_bound");

    ImpairmentMap map;
    map.snr_grid = params.snr_grid;
    map.constellation = params.constellation;
    map.seed = params.seed;
    map.bits_per_point = params.bits_per_point;
    map.entries.resize(levels.size());

    int next_index[2] = {0, 0};
    for (size_t i = 0; i < levels.size(); ++i) {
        MapEntry& e = map.entries[i];
        e.type = classify(levels[i]);
        e.level_index = next_index[static_cast<int>(e.type)]++;
        e.config = levels[i];
        e.ber_raw.assign(map.snr_grid.size(), 0.0);
    }

    const size_t cells = levels.size() * map.snr_grid.size();
    parallel_for(cells, [&](size_t cell) {
        const size_t li = cell / map.snr_grid.size();
        const size_t si = cell % map.snr_grid.size();
        map.entries[li].ber_raw[si] =
            simulate_cell_ber(map.entries[li].config, map.snr_grid[si], params,
                              static_cast<uint64_t>(cell));
    });

    for (MapEntry& e : map.entries) e.ber = isotonic_nonincreasing(e.ber_raw);
    return map;
}

std::optional<int> max_level(const ImpairmentMap& map, ImpairmentType t,
                             double snr_db, double ber_bound) {
    if (map.entries.empty()) throw InvalidInput("max_level: empty map");
    const std::optional<size_t> qi = map.grid_index_below(snr_db);
    if (!qi) return std::nullopt;
    std::optional<int> best;
    for (const MapEntry* e : map.by_type(t))
        if (e->ber[*qi] <= ber_bound) best = e->level_index;
    return best;
}

pattern::Pattern reference_pattern(const impair::ImpairmentConfig& cfg,
                                   const PatternProtocol& proto) {
    const std::vector<bb::cplx> preamble = bb::make_preamble(proto.seed, proto.preamble_symbols);
    Rng rng(proto.seed, /*stream=*/0x7061796cULL);
    const bb::Frame frame =
        bb::make_frame(preamble, proto.payload_symbols, proto.constellation, rng);
    const std::vector<bb::cplx> tx = impair::apply_impairment(frame.samples(), cfg);
    const bb::Equalized eq = bb::estimate_and_equalize(tx, preamble);
    return pattern::extract_pattern(eq.symbols, proto.n_pattern, proto.seed);
}

FeasibleSet select_feasible(const ImpairmentMap& map, const SelectParams& params) {
    if (params.n_required < 1) throw InvalidInput("select_feasible: n_required < 1");

    FeasibleSet set;
    set.emd_threshold = params.emd_threshold;
    set.ber_bound = params.ber_bound;
    set.ref_snr_db = params.ref_snr_db;

    for (ImpairmentType t : {ImpairmentType::iq, ImpairmentType::dc}) {
        // Weakest candidate first: by BER at the reference SNR, ties by index.
        struct Cand {
            const MapEntry* entry;
            double ref_ber;
        };
        std::vector<Cand> cands;
        for (const MapEntry* e : map.by_type(t))
            cands.push_back({e, map.ber_at(t, e->level_index, params.ref_snr_db)});
        std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.ref_ber != b.ref_ber) return a.ref_ber < b.ref_ber;
            return a.entry->level_index < b.entry->level_index;
        });

        for (const Cand& c : cands) {
            if (static_cast<int>(set.members.size()) >= params.n_required) break;
            if (c.ref_ber > params.ber_bound) continue;
            pattern::Pattern pat = reference_pattern(c.entry->config, params.pattern);
            bool separated = true;
            for (const FeasibleMember& m : set.members) {
                if (pattern::emd(pat, m.pat) <= params.emd_threshold) {
                    separated = false;
                    break;
                }
            }
            if (!separated) continue;
            FeasibleMember m;
            m.type = t;
            m.level_index = c.entry->level_index;
            m.config = c.entry->config;
            m.ref_ber = c.ref_ber;
            m.pat = std::move(pat);
            set.members.push_back(std::move(m));
        }
        if (static_cast<int>(set.members.size()) >= params.n_required) break;
    }

    if (static_cast<int>(set.members.size()) < params.n_required)
        throw InfeasibleError("select_feasible: only " + std::to_string(set.members.size()) +
                              " of " + std::to_string(params.n_required) +
                              " required members are pairwise separated by T=" +
                              std::to_string(params.emd_threshold) + " under ber_bound=" +
                              std::to_string(params.ber_bound));
    return set;
}

namespace {

double predicted_ber(const ImpairmentMap& map, const FeasibleMember& m, double snr_db) {
    return map.ber_at(m.type, m.level_index, snr_db);
}

}  // namespace

Allocation allocate_greedy(const std::vector<RadioProfile>& radios,
                           const FeasibleSet& set, const ImpairmentMap& map,
                           double ber_bound) {
    if (set.size() < radios.size())
        throw InvalidInput("allocate_greedy: fewer feasible members than radios");

    Allocation alloc;
    std::vector<size_t> pending;  // indices into radios
    for (size_t i = 0; i < radios.size(); ++i) {
        if (!map.grid_index_below(radios[i].snr_db)) {
            // SNR below the entire grid: unclassifiable outright.
            alloc.unclassifiable.push_back(radios[i].id);
        } else {
            pending.push_back(i);
        }
    }

    std::vector<char> consumed(set.size(), 0);
    for (ImpairmentType t : {ImpairmentType::iq, ImpairmentType::dc}) {
        // Members of this type, weakest level first.
        std::vector<size_t> members;
        for (size_t m = 0; m < set.size(); ++m)
            if (!consumed[m] && set.members[m].type == t) members.push_back(m);
        std::sort(members.begin(), members.end(), [&](size_t a, size_t b) {
            return set.members[a].level_index < set.members[b].level_index;
        });

        // Radios that tolerate at least something of this type, sorted by
        // c_max ascending (ties by id for determinism).
        struct Entry {
            size_t radio;
            int cmax;
        };
        std::vector<Entry> order;
        std::vector<size_t> still_pending;
        for (size_t i : pending) {
            const std::optional<int> cmax = max_level(map, t, radios[i].snr_db, ber_bound);
            if (cmax) order.push_back({i, *cmax});
            else still_pending.push_back(i);
        }
        std::sort(order.begin(), order.end(), [&](const Entry& a, const Entry& b) {
            if (a.cmax != b.cmax) return a.cmax < b.cmax;
            return radios[a.radio].id < radios[b.radio].id;
        });

        size_t next = 0;  // into members
        for (const Entry& e : order) {
            if (next < members.size() &&
                set.members[members[next]].level_index <= e.cmax) {
                const size_t m = members[next++];
                consumed[m] = 1;
                Assignment a;
                a.radio_id = radios[e.radio].id;
                a.member_index = static_cast<int>(m);
                a.predicted_ber = predicted_ber(map, set.members[m], radios[e.radio].snr_db);
                alloc.assigned.push_back(a);
                alloc.classifiable.push_back(radios[e.radio].id);
            } else {
                // Members only get stronger from here; retry with next type.
                still_pending.push_back(e.radio);
            }
        }
        pending = std::move(still_pending);
        std::sort(pending.begin(), pending.end());
    }

    for (size_t i : pending) alloc.unclassifiable.push_back(radios[i].id);
    std::sort(alloc.unclassifiable.begin(), alloc.unclassifiable.end());
    return alloc;
}

Allocation allocate_random(const std::vector<RadioProfile>& radios,
                           const FeasibleSet& set, const ImpairmentMap& map,
                           uint64_t seed) {
    if (set.size() < radios.size())
        throw InvalidInput("allocate_random: fewer feasible members than radios");
    Rng rng(seed, /*stream=*/0x616c6c6fULL);
    std::vector<size_t> pool(set.size());
    for (size_t m = 0; m < pool.size(); ++m) pool[m] = m;
    // Partial Fisher-Yates: first |radios| slots become the draw.
    for (size_t k = 0; k < radios.size(); ++k) {
        const size_t j = k + static_cast<size_t>(rng.below(pool.size() - k));
        std::swap(pool[k], pool[j]);
    }
    Allocation alloc;
    for (size_t k = 0; k < radios.size(); ++k) {
        Assignment a;
        a.radio_id = radios[k].id;
        a.member_index = static_cast<int>(pool[k]);
        a.predicted_ber = predicted_ber(map, set.members[pool[k]], radios[k].snr_db);
        alloc.assigned.push_back(a);
        alloc.classifiable.push_back(radios[k].id);
    }
    return alloc;
}

double total_ber(const Allocation& alloc) {
    double sum = 0.0;
    for (const Assignment& a : alloc.assigned) sum += a.predicted_ber;
    return sum;
}

namespace {

json config_to_json(const impair::ImpairmentConfig& cfg) {
    return json{{"alpha", cfg.iq.alpha},
                {"theta", cfg.iq.theta},
                {"dc_re", cfg.dc.offset.real()},
                {"dc_im", cfg.dc.offset.imag()},
                {"label", cfg.label}};
}

impair::ImpairmentConfig config_from_json(const json& j) {
    impair::ImpairmentConfig cfg;
    cfg.iq.alpha = j.at("alpha").get<double>();
    cfg.iq.theta = j.at("theta").get<double>();
    cfg.dc.offset = {j.at("dc_re").get<double>(), j.at("dc_im").get<double>()};
    cfg.label = j.at("label").get<std::string>();
    return cfg;
}

}  // namespace

std::string impairment_map_to_json(const ImpairmentMap& map, const std::string& config_hash) {
    json j;
    j["kind"] = "impairment_map";
    j["version"] = 1;
    j["config_hash"] = config_hash;
    j["snr_grid"] = map.snr_grid;
    j["constellation"] = static_cast<int>(map.constellation);
    j["seed"] = map.seed;
    j["bits_per_point"] = map.bits_per_point;
    j["entries"] = json::array();
    for (const MapEntry& e : map.entries) {
        json je = config_to_json(e.config);
        je["type"] = type_name(e.type);
        je["level_index"] = e.level_index;
        je["ber_raw"] = e.ber_raw;
        je["ber"] = e.ber;
        j["entries"].push_back(std::move(je));
    }
    return j.dump(2);
}

ImpairmentMap impairment_map_from_json(const std::string& text, std::string* config_hash) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("impairment map: not valid JSON: ") + e.what());
    }
    try {
        if (j.at("kind").get<std::string>() != "impairment_map")
            throw FormatError("impairment map: wrong document kind");
        if (j.at("version").get<int>() != 1)
            throw VersionError("impairment map: unsupported version");
        if (config_hash) *config_hash = j.at("config_hash").get<std::string>();
        ImpairmentMap map;
        map.snr_grid = j.at("snr_grid").get<std::vector<double>>();
        map.constellation = static_cast<baseband::Constellation>(j.at("constellation").get<int>());
        map.seed = j.at("seed").get<uint64_t>();
        map.bits_per_point = j.at("bits_per_point").get<long long>();
        for (const json& je : j.at("entries")) {
            MapEntry e;
            e.type = je.at("type").get<std::string>() == "dc" ? ImpairmentType::dc
                                                              : ImpairmentType::iq;
            e.level_index = je.at("level_index").get<int>();
            e.config = config_from_json(je);
            e.ber_raw = je.at("ber_raw").get<std::vector<double>>();
            e.ber = je.at("ber").get<std::vector<double>>();
            if (e.ber.size() != map.snr_grid.size() || e.ber_raw.size() != map.snr_grid.size())
                throw ManifestError("impairment map: BER curve length mismatch");
            map.entries.push_back(std::move(e));
        }
        return map;
    } catch (const json::exception& e) {
        throw ManifestError(std::string("impairment map: missing field: ") + e.what());
    }
}

std::string feasible_set_to_json(const FeasibleSet& set, const std::string& config_hash) {
    json j;
    j["kind"] = "feasible_set";
    j["version"] = 1;
    j["config_hash"] = config_hash;
    j["emd_threshold"] = set.emd_threshold;
    j["ber_bound"] = set.ber_bound;
    j["ref_snr_db"] = set.ref_snr_db;
    j["members"] = json::array();
    for (const FeasibleMember& m : set.members) {
        json jm = config_to_json(m.config);
        jm["type"] = type_name(m.type);
        jm["level_index"] = m.level_index;
        jm["ref_ber"] = m.ref_ber;
        json pts = json::array();
        for (const bb::cplx& p : m.pat.points)
            pts.push_back(json::array({p.real(), p.imag()}));
        jm["pattern"] = std::move(pts);
        j["members"].push_back(std::move(jm));
    }
    return j.dump(2);
}

std::string allocation_to_json(const Allocation& alloc, const FeasibleSet& set,
                               const std::vector<RadioProfile>& radios,
                               const std::string& config_hash) {
    auto radio_snr = [&](int id) {
        for (const RadioProfile& r : radios)
            if (r.id == id) return r.snr_db;
        return std::numeric_limits<double>::quiet_NaN();
    };
    json j;
    j["kind"] = "allocation";
    j["version"] = 1;
    j["config_hash"] = config_hash;
    j["assigned"] = json::array();
    for (const Assignment& a : alloc.assigned) {
        const FeasibleMember& m = set.members[static_cast<size_t>(a.member_index)];
        json ja = config_to_json(m.config);
        ja["radio"] = a.radio_id;
        ja["snr_db"] = radio_snr(a.radio_id);
        ja["member_index"] = a.member_index;
        ja["impairment"] = m.config.label;
        ja["type"] = type_name(m.type);
        ja["level_index"] = m.level_index;
        ja["predicted_ber"] = a.predicted_ber;
        j["assigned"].push_back(std::move(ja));
    }
    j["classifiable"] = alloc.classifiable;
    j["unclassifiable"] = alloc.unclassifiable;
    j["total_ber"] = total_ber(alloc);
    return j.dump(2);
}

void write_plan_csv(const std::string& path, const Allocation& alloc,
                    const std::vector<RadioProfile>& radios, const FeasibleSet& set) {
    std::ofstream out(path);
    if (!out) throw FileError("write_plan_csv: cannot open " + path);
    out << "radio,snr_db,impairment,predicted_ber\n";
    out.precision(10);
    auto radio_snr = [&](int id) {
        for (const RadioProfile& r : radios)
            if (r.id == id) return r.snr_db;
        return std::numeric_limits<double>::quiet_NaN();
    };
    for (const Assignment& a : alloc.assigned) {
        const FeasibleMember& m = set.members[static_cast<size_t>(a.member_index)];
        out << a.radio_id << ',' << radio_snr(a.radio_id) << ',' << m.config.label
            << ',' << a.predicted_ber << '\n';
    }
    for (int id : alloc.unclassifiable)
        out << id << ',' << radio_snr(id) << ",unclassifiable,\n";
}

}  // namespace oracle::plan
