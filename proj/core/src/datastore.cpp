#include "oracle/datastore.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "oracle/errors.hpp"

namespace oracle::io {

using json = nlohmann::json;

namespace {

// --- little-endian primitives over an in-memory buffer ---

void put_u16(std::vector<uint8_t>& b, uint16_t v) {
    b.push_back(static_cast<uint8_t>(v));
    b.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_i32(std::vector<uint8_t>& b, int32_t v) { put_u32(b, static_cast<uint32_t>(v)); }
void put_f32(std::vector<uint8_t>& b, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(b, bits);
}

struct Reader {
    const uint8_t* p;
    size_t len;
    size_t pos = 0;

    void need(size_t n) const {
        if (n > len || pos > len - n)  // overflow-safe bound check
            throw TruncatedError("file ends inside a declared field");
    }
    uint8_t u8() { need(1); return p[pos++]; }
    uint16_t u16() { need(2); uint16_t v = static_cast<uint16_t>(p[pos] | (p[pos + 1] << 8)); pos += 2; return v; }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[pos + static_cast<size_t>(i)]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[pos + static_cast<size_t>(i)]) << (8 * i);
        pos += 8;
        return v;
    }
    int32_t i32() { return static_cast<int32_t>(u32()); }
    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open " + path);
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    return data;
}

void write_file(const std::string& path, const std::vector<uint8_t>& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw FileError("short write to " + path);
}

void check_preamble(Reader& r, uint8_t expected_kind) {
    r.need(8);
    if (std::memcmp(r.p, kMagic, 4) != 0)
        throw FormatError("bad magic bytes; not an ORCL file");
    r.pos = 4;
    const uint8_t version = r.u8();
    if (version != kFormatVersion)
        throw VersionError("unsupported format version " + std::to_string(version));
    const uint8_t kind = r.u8();
    if (kind != expected_kind)
        throw FormatError("wrong artifact kind " + std::to_string(kind));
    r.u16();  // reserved
}

// dB values can be -inf (noiseless); JSON has no inf literal.
json db_to_json(double db) {
    if (std::isfinite(db)) return db;
    return std::string("-inf");
}
double db_from_json(const json& j) {
    if (j.is_string()) return -std::numeric_limits<double>::infinity();
    return j.get<double>();
}

}  // namespace

uint32_t crc32(const uint8_t* data, size_t len) {
    static const std::array<uint32_t, 256> table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t c = 0xffffffffu;
    for (size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xffu] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

void save_dataset(const std::string& path, const std::vector<baseband::IqTrace>& traces,
                  const std::string& config_hash) {
    uint64_t total = 0;
    for (const auto& t : traces) total += t.samples.size();

    json meta;
    meta["kind"] = "dataset";
    meta["config_hash"] = config_hash;
    meta["traces"] = json::array();
    uint64_t offset = 0;
    for (const auto& t : traces) {
        meta["traces"].push_back(json{
            {"device_label", t.device_label},
            {"sample_rate_hz", t.sample_rate_hz},
            {"offset", offset},
            {"count", t.samples.size()},
            {"channel",
             json{{"gain_re", t.channel.gain.real()},
                  {"gain_im", t.channel.gain.imag()},
                  {"noise_power_db", db_to_json(t.channel.noise_power_db)},
                  {"seed", t.channel.seed}}},
            {"impairment_label", t.impairment.label},
        });
        offset += t.samples.size();
    }
    const std::string meta_text = meta.dump();

    std::vector<uint8_t> payload;
    payload.reserve(total * 8);
    for (const auto& t : traces)
        for (const auto& s : t.samples) {
            put_f32(payload, static_cast<float>(s.real()));
            put_f32(payload, static_cast<float>(s.imag()));
        }

    std::vector<uint8_t> out;
    out.reserve(28 + traces.size() * 12 + payload.size() + meta_text.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kFormatVersion);
    out.push_back(kKindDataset);
    put_u16(out, 0);
    put_u32(out, static_cast<uint32_t>(traces.size()));
    put_u64(out, total);
    put_u32(out, static_cast<uint32_t>(meta_text.size()));
    put_u32(out, crc32(payload.data(), payload.size()));
    for (const auto& t : traces) {
        put_i32(out, t.device_label);
        put_u64(out, t.samples.size());
    }
    out.insert(out.end(), payload.begin(), payload.end());
    out.insert(out.end(), meta_text.begin(), meta_text.end());
    write_file(path, out);
}

LoadedDataset load_dataset(const std::string& path) {
    const std::vector<uint8_t> data = read_file(path);
    Reader r{data.data(), data.size()};
    check_preamble(r, kKindDataset);

    const uint32_t trace_count = r.u32();
    const uint64_t total = r.u64();
    const uint32_t meta_len = r.u32();
    const uint32_t crc_stored = r.u32();

    struct TableRow {
        int32_t label;
        uint64_t count;
    };
    r.need(static_cast<size_t>(trace_count) * 12);
    std::vector<TableRow> table(trace_count);
    uint64_t table_total = 0;
    for (auto& row : table) {
        row.label = r.i32();
        row.count = r.u64();
        table_total += row.count;
    }
    if (table_total != total)
        throw ManifestError("trace table sums to " + std::to_string(table_total) +
                            " samples, header declares " + std::to_string(total));

    r.need(total * 8 + meta_len);  // truncation check before touching payload
    const uint8_t* payload = data.data() + r.pos;
    const uint32_t crc_actual = crc32(payload, total * 8);
    if (crc_actual != crc_stored) throw ChecksumError("payload CRC32 mismatch");

    json meta;
    try {
        meta = json::parse(data.begin() + static_cast<std::ptrdiff_t>(r.pos + total * 8),
                           data.begin() + static_cast<std::ptrdiff_t>(r.pos + total * 8 + meta_len));
    } catch (const json::exception& e) {
        throw ManifestError(std::string("metadata JSON unreadable: ") + e.what());
    }

    LoadedDataset out;
    try {
        out.config_hash = meta.at("config_hash").get<std::string>();
        const json& jtraces = meta.at("traces");
        if (jtraces.size() != trace_count)
            throw ManifestError("metadata lists a different trace count than the header");
        out.traces.resize(trace_count);
        for (size_t i = 0; i < trace_count; ++i) {
            const json& jt = jtraces[i];
            baseband::IqTrace& t = out.traces[i];
            t.device_label = jt.at("device_label").get<int>();
            if (t.device_label != table[i].label)
                throw ManifestError("device label disagrees between header table and metadata");
            t.sample_rate_hz = jt.at("sample_rate_hz").get<double>();
            t.impairment.label = jt.at("impairment_label").get<std::string>();
            const json& jc = jt.at("channel");
            t.channel.gain = {jc.at("gain_re").get<double>(), jc.at("gain_im").get<double>()};
            t.channel.noise_power_db = db_from_json(jc.at("noise_power_db"));
            t.channel.seed = jc.at("seed").get<uint64_t>();
            const uint64_t count = jt.at("count").get<uint64_t>();
            if (count != table[i].count)
                throw ManifestError("sample count disagrees between header table and metadata");

            t.samples.resize(count);
            Reader pr{payload, total * 8, jt.at("offset").get<uint64_t>() * 8};
            for (uint64_t k = 0; k < count; ++k) {
                const double re = pr.f32();
                const double im = pr.f32();
                t.samples[k] = {re, im};
            }
        }
    } catch (const json::exception& e) {
        throw ManifestError(std::string("metadata field missing or mistyped: ") + e.what());
    }
    return out;
}

void save_model(const std::string& path, const cnn::CnnModel& model,
                const std::string& config_hash) {
    const auto shapes = cnn::tensor_shapes(model.arch);

    json meta;
    meta["kind"] = "cnn_model";
    meta["config_hash"] = config_hash;
    meta["arch"] = json{{"input_w", model.arch.input_w},
                        {"kernel", model.arch.kernel},
                        {"conv1_filters", model.arch.conv1_filters},
                        {"conv2_filters", model.arch.conv2_filters},
                        {"fc1", model.arch.fc1},
                        {"fc2", model.arch.fc2},
                        {"n_classes", model.arch.n_classes}};
    meta["hyper"] = json{{"learning_rate", model.hyper.learning_rate},
                         {"l2_lambda", model.hyper.l2_lambda},
                         {"dropout", model.hyper.dropout},
                         {"beta1", model.hyper.beta1},
                         {"beta2", model.hyper.beta2},
                         {"epsilon", model.hyper.epsilon}};
    meta["tensors"] = json::array();

    std::vector<uint8_t> blob;
    uint64_t offset = 0;
    size_t slot = 0;
    model.params.for_each([&](const std::string& name, const std::vector<float>& v) {
        const auto& [sname, shape] = shapes[slot++];
        (void)sname;
        meta["tensors"].push_back(json{{"name", name},
                                       {"shape", shape},
                                       {"offset", offset},
                                       {"count", v.size()}});
        for (const float x : v) put_f32(blob, x);
        offset += v.size();
    });
    const std::string meta_text = meta.dump();

    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kFormatVersion);
    out.push_back(kKindModel);
    put_u16(out, 0);
    put_u32(out, static_cast<uint32_t>(meta_text.size()));
    put_u64(out, blob.size());
    put_u32(out, crc32(blob.data(), blob.size()));
    out.insert(out.end(), meta_text.begin(), meta_text.end());
    out.insert(out.end(), blob.begin(), blob.end());
    write_file(path, out);
}

LoadedModel load_model(const std::string& path) {
    const std::vector<uint8_t> data = read_file(path);
    Reader r{data.data(), data.size()};
    check_preamble(r, kKindModel);

    const uint32_t meta_len = r.u32();
    const uint64_t blob_bytes = r.u64();
    const uint32_t crc_stored = r.u32();
    r.need(meta_len + blob_bytes);

    json meta;
    try {
        meta = json::parse(data.begin() + static_cast<std::ptrdiff_t>(r.pos),
                           data.begin() + static_cast<std::ptrdiff_t>(r.pos + meta_len));
    } catch (const json::exception& e) {
        throw ManifestError(std::string("model JSON unreadable: ") + e.what());
    }
    const uint8_t* blob = data.data() + r.pos + meta_len;
    if (crc32(blob, blob_bytes) != crc_stored) throw ChecksumError("weight blob CRC32 mismatch");

    LoadedModel out;
    try {
        out.config_hash = meta.at("config_hash").get<std::string>();
        const json& ja = meta.at("arch");
        cnn::Arch arch;
        arch.input_w = ja.at("input_w").get<int>();
        arch.kernel = ja.at("kernel").get<int>();
        arch.conv1_filters = ja.at("conv1_filters").get<int>();
        arch.conv2_filters = ja.at("conv2_filters").get<int>();
        arch.fc1 = ja.at("fc1").get<int>();
        arch.fc2 = ja.at("fc2").get<int>();
        arch.n_classes = ja.at("n_classes").get<int>();
        if (!arch.valid()) throw ManifestError("architecture descriptor is inconsistent");

        const json& jh = meta.at("hyper");
        cnn::Hyper hyper;
        hyper.learning_rate = jh.at("learning_rate").get<double>();
        hyper.l2_lambda = jh.at("l2_lambda").get<double>();
        hyper.dropout = jh.at("dropout").get<double>();
        hyper.beta1 = jh.at("beta1").get<double>();
        hyper.beta2 = jh.at("beta2").get<double>();
        hyper.epsilon = jh.at("epsilon").get<double>();

        out.model.arch = arch;
        out.model.hyper = hyper;
        out.model.params.resize(arch);

        const auto shapes = cnn::tensor_shapes(arch);
        const json& jt = meta.at("tensors");
        if (jt.size() != shapes.size()) throw ManifestError("tensor manifest length mismatch");

        uint64_t expect_offset = 0;
        size_t slot = 0;
        out.model.params.for_each([&](const std::string& name, std::vector<float>& v) {
            const json& entry = jt[slot];
            const auto& [sname, shape] = shapes[slot];
            ++slot;
            if (entry.at("name").get<std::string>() != name || sname != name)
                throw ManifestError("tensor name mismatch for " + name);
            if (entry.at("shape").get<std::vector<int>>() != shape)
                throw ManifestError("tensor shape mismatch for " + name);
            size_t expect_count = 1;
            for (const int d : shape) expect_count *= static_cast<size_t>(d);
            if (entry.at("count").get<size_t>() != expect_count || v.size() != expect_count)
                throw ManifestError("tensor count mismatch for " + name);
            if (entry.at("offset").get<uint64_t>() != expect_offset)
                throw ManifestError("tensor offset mismatch for " + name);
            Reader br{blob, blob_bytes, expect_offset * 4};
            for (auto& x : v) x = br.f32();
            expect_offset += expect_count;
        });
        if (expect_offset * 4 != blob_bytes)
            throw ManifestError("weight blob size disagrees with the manifest");
    } catch (const json::exception& e) {
        throw ManifestError(std::string("model field missing or mistyped: ") + e.what());
    }
    return out;
}

}  // namespace oracle::io
