#include "cass/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cass/errors.hpp"

namespace fs = std::filesystem;

namespace cass {

namespace {

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw DataError("array read: truncated file");
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void put_u64(std::ostream& out, uint64_t v) {
    put_u32(out, static_cast<uint32_t>(v));
    put_u32(out, static_cast<uint32_t>(v >> 32));
}

uint64_t get_u64(std::istream& in) {
    const uint64_t lo = get_u32(in);
    const uint64_t hi = get_u32(in);
    return lo | hi << 32;
}

} // namespace

void write_array(std::ostream& out, const Tensor& t, Dtype dtype) {
    out.write("CARR", 4);
    out.write(dtype == Dtype::f32 ? "f4" : "f8", 2);
    put_u32(out, static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) {
        if (d <= 0) throw ArgumentError("array write: nonpositive dimension");
        put_u32(out, static_cast<uint32_t>(d));
    }
    if (t.v.size() != static_cast<size_t>(Tensor::numel_of(t.shape)))
        throw ArgumentError("array write: shape does not match element count");
    if (dtype == Dtype::f32) {
        for (double x : t.v) put_u32(out, std::bit_cast<uint32_t>(static_cast<float>(x)));
    } else {
        for (double x : t.v) put_u64(out, std::bit_cast<uint64_t>(x));
    }
    if (!out) throw DataError("array write: stream failure");
}

Tensor read_array(std::istream& in, Dtype* dtype) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "CARR", 4) != 0)
        throw DataError("array read: bad magic (not an array blob)");
    char dt[2];
    in.read(dt, 2);
    if (!in) throw DataError("array read: truncated header");
    Dtype d;
    if (dt[0] == 'f' && dt[1] == '4') d = Dtype::f32;
    else if (dt[0] == 'f' && dt[1] == '8') d = Dtype::f64;
    else throw DataError("array read: unknown dtype code");
    if (dtype) *dtype = d;
    const uint32_t rank = get_u32(in);
    if (rank == 0 || rank > 8) throw DataError("array read: implausible rank");
    Tensor t;
    for (uint32_t i = 0; i < rank; ++i) {
        const uint32_t dim = get_u32(in);
        if (dim == 0 || dim > (1u << 28)) throw DataError("array read: implausible dimension");
        t.shape.push_back(static_cast<int>(dim));
    }
    const size_t n = static_cast<size_t>(Tensor::numel_of(t.shape));
    t.v.resize(n);
    if (d == Dtype::f32) {
        for (size_t i = 0; i < n; ++i) t.v[i] = std::bit_cast<float>(get_u32(in));
    } else {
        for (size_t i = 0; i < n; ++i) t.v[i] = std::bit_cast<double>(get_u64(in));
    }
    return t;
}

void write_array_file(const std::string& path, const Tensor& t, Dtype dtype) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_array(out, t, dtype);
    if (!out) throw DataError("write failed on '" + path + "'");
}

Tensor read_array_file(const std::string& path, Dtype* dtype) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_array(in, dtype);
}

const Tensor* NamedArrays::find(const std::string& name) const {
    for (const auto& [n, t] : entries)
        if (n == name) return &t;
    return nullptr;
}

const Tensor& NamedArrays::require(const std::string& name) const {
    const Tensor* t = find(name);
    if (!t) throw DataError("missing array '" + name + "'");
    return *t;
}

void write_named_arrays(const std::string& path, const std::string& magic,
                        const NamedArrays& arrays, Dtype dtype) {
    if (magic.size() != 4) throw ArgumentError("named arrays: magic must be 4 bytes");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out.write(magic.data(), 4);
    put_u32(out, static_cast<uint32_t>(arrays.entries.size()));
    for (const auto& [name, t] : arrays.entries) {
        put_u32(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_array(out, t, dtype);
    }
    if (!out) throw DataError("write failed on '" + path + "'");
}

NamedArrays read_named_arrays(const std::string& path, const std::string& magic) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    char m[4];
    in.read(m, 4);
    if (!in || std::memcmp(m, magic.data(), 4) != 0)
        throw DataError("'" + path + "' is not a " + magic + " file");
    const uint32_t count = get_u32(in);
    if (count > (1u << 20)) throw DataError("'" + path + "': implausible entry count");
    NamedArrays out;
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t len = get_u32(in);
        if (len > (1u << 16)) throw DataError("'" + path + "': implausible name length");
        std::string name(len, '\0');
        in.read(name.data(), len);
        if (!in) throw DataError("'" + path + "': truncated entry name");
        Tensor t = read_array(in);
        out.entries.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

KvFile KvFile::parse_string(const std::string& text) {
    KvFile f;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty() || key.find_first_of(" \t") != std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": bad key");
        f.items_[key] = trim(t.substr(eq + 1));
    }
    return f;
}

KvFile KvFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_string(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string KvFile::serialize() const {
    std::string out;
    for (const auto& [k, v] : items_) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

void KvFile::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << serialize();
    if (!out) throw DataError("write failed on '" + path + "'");
}

bool KvFile::has(const std::string& key) const { return items_.count(key) > 0; }

std::optional<std::string> KvFile::get(const std::string& key) const {
    auto it = items_.find(key);
    if (it == items_.end()) return std::nullopt;
    return it->second;
}

const std::string& KvFile::require(const std::string& key) const {
    auto it = items_.find(key);
    if (it == items_.end()) throw ConfigError("missing key '" + key + "'");
    return it->second;
}

std::string KvFile::get_string(const std::string& key, const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

namespace {

long parse_long(const std::string& key, const std::string& s) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
    return v;
}

double parse_double(const std::string& key, const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty())
        throw ConfigError("key '" + key + "': '" + s + "' is not a number");
    return v;
}

} // namespace

long KvFile::get_int(const std::string& key, long fallback) const {
    auto v = get(key);
    return v ? parse_long(key, *v) : fallback;
}

long KvFile::require_int(const std::string& key) const { return parse_long(key, require(key)); }

double KvFile::get_real(const std::string& key, double fallback) const {
    auto v = get(key);
    return v ? parse_double(key, *v) : fallback;
}

double KvFile::require_real(const std::string& key) const {
    return parse_double(key, require(key));
}

uint64_t KvFile::get_u64(const std::string& key, uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    uint64_t out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size())
        throw ConfigError("key '" + key + "': '" + *v + "' is not an unsigned integer");
    return out;
}

void KvFile::set(const std::string& key, const std::string& value) { items_[key] = value; }
void KvFile::set_int(const std::string& key, long value) { items_[key] = std::to_string(value); }
void KvFile::set_u64(const std::string& key, uint64_t value) {
    items_[key] = std::to_string(value);
}
void KvFile::set_real(const std::string& key, double value) { items_[key] = format_real(value); }

std::vector<std::string> KvFile::get_list(const std::string& key) const {
    const std::string& s = require(key);
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

std::vector<int> KvFile::get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& s : get_list(key)) out.push_back(static_cast<int>(parse_long(key, s)));
    return out;
}

std::vector<double> KvFile::get_real_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : get_list(key)) out.push_back(parse_double(key, s));
    return out;
}

void KvFile::set_list(const std::string& key, const std::vector<std::string>& values) {
    std::string s;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) s += ",";
        s += values[i];
    }
    items_[key] = s;
}

void KvFile::set_int_list(const std::string& key, const std::vector<int>& values) {
    std::vector<std::string> s;
    for (int v : values) s.push_back(std::to_string(v));
    set_list(key, s);
}

void KvFile::set_real_list(const std::string& key, const std::vector<double>& values) {
    std::vector<std::string> s;
    for (double v : values) s.push_back(format_real(v));
    set_list(key, s);
}

std::vector<std::string> KvFile::keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (auto it = items_.lower_bound(prefix); it != items_.end(); ++it) {
        if (it->first.compare(0, prefix.size(), prefix) != 0) break;
        out.push_back(it->first);
    }
    return out;
}

std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string short_hash(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return std::string(buf, 8);
}

// ---------------------------------------------------------------------------

namespace {

std::string record_path(const std::string& dir, size_t i) {
    char name[32];
    std::snprintf(name, sizeof(name), "r%05zu.bin", i);
    return dir + "/records/" + name;
}

Tensor waveform_tensor(const Waveform& w) {
    Tensor t;
    t.shape = {static_cast<int>(w.samples.size())};
    t.v = w.samples;
    return t;
}

} // namespace

void save_dataset(const std::string& dir, const StoredDataset& ds) {
    if (ds.component_names.empty()) throw ArgumentError("dataset save: no component names");
    for (const auto& n : ds.component_names)
        if (n.empty() || n == "mixture")
            throw ArgumentError("dataset save: invalid component name '" + n + "'");
    fs::create_directories(dir + "/records");

    KvFile m;
    m.set("dataset.kind", ds.kind);
    m.set_int("dataset.k", static_cast<long>(ds.component_names.size()));
    m.set_int("dataset.n", static_cast<long>(ds.records.size()));
    m.set_real("dataset.sample_rate", ds.sample_rate);
    m.set_u64("dataset.seed", ds.seed);
    m.set_list("dataset.components", ds.component_names);
    {
        std::vector<int> tr(ds.split.train.begin(), ds.split.train.end());
        std::vector<int> te(ds.split.test.begin(), ds.split.test.end());
        m.set_int_list("split.train", tr);
        m.set_int_list("split.test", te);
    }
    for (size_t i = 0; i < ds.records.size(); ++i) {
        const MixtureExample& r = ds.records[i];
        r.validate();
        if (r.components.size() != ds.component_names.size())
            throw ArgumentError("dataset save: record component count mismatch");
        const std::string p = "record." + std::to_string(i);
        m.set_u64(p + ".seed", r.meta.seed);
        for (const auto& [k, v] : r.meta.values) m.set_real(p + ".meta." + k, v);

        NamedArrays na;
        na.entries.emplace_back("mixture", waveform_tensor(r.mixture));
        for (size_t c = 0; c < r.components.size(); ++c)
            na.entries.emplace_back(ds.component_names[c], waveform_tensor(r.components[c]));
        write_named_arrays(record_path(dir, i), "CREC", na, Dtype::f32);
    }
    m.save(dir + "/manifest.txt");
}

StoredDataset load_dataset(const std::string& dir) {
    const std::string mpath = dir + "/manifest.txt";
    if (!fs::exists(mpath)) throw DataError("no dataset manifest at '" + mpath + "'");
    const KvFile m = KvFile::parse_file(mpath);
    StoredDataset ds;
    ds.kind = m.require("dataset.kind");
    ds.sample_rate = m.require_real("dataset.sample_rate");
    ds.seed = m.get_u64("dataset.seed", 0);
    ds.component_names = m.get_list("dataset.components");
    const long k = m.require_int("dataset.k");
    if (k != static_cast<long>(ds.component_names.size()))
        throw DataError("dataset manifest: component count disagrees with names");
    const long n = m.require_int("dataset.n");
    for (const int idx : m.get_int_list("split.train")) ds.split.train.push_back(idx);
    for (const int idx : m.get_int_list("split.test")) ds.split.test.push_back(idx);

    for (long i = 0; i < n; ++i) {
        const NamedArrays na = read_named_arrays(record_path(dir, static_cast<size_t>(i)), "CREC");
        MixtureExample ex;
        const Tensor& mix = na.require("mixture");
        ex.mixture = Waveform{mix.v, ds.sample_rate};
        for (const auto& name : ds.component_names) {
            const Tensor& c = na.require(name);
            ex.components.push_back(Waveform{c.v, ds.sample_rate});
        }
        const std::string p = "record." + std::to_string(i);
        ex.meta.seed = m.get_u64(p + ".seed", 0);
        const std::string meta_prefix = p + ".meta.";
        for (const auto& key : m.keys_with_prefix(meta_prefix))
            ex.meta.values[key.substr(meta_prefix.size())] = m.require_real(key);
        ex.validate();
        ds.records.push_back(std::move(ex));
    }
    return ds;
}

// ---------------------------------------------------------------------------

void checkpoint_save(CassModel& model, const std::string& dir) {
    if (model.components.empty()) throw ArgumentError("checkpoint save: empty model");
    fs::create_directories(dir);
    KvFile m;
    m.set("model.mode", mode_name(model.mode));
    m.set_int("model.k", static_cast<long>(model.k()));
    std::vector<std::string> names;
    for (const auto& c : model.components) names.push_back(c.name);
    m.set_list("model.components", names);
    m.set_real("weights.alpha", model.weights.alpha);
    m.set_real("weights.beta", model.weights.beta);
    for (const auto& [j, w] : model.weights.cross_weights)
        m.set_real("weights.cross." + std::to_string(j), w);
    const NetworkSpec& s = model.components.front().spec;
    m.set_int("network.input_bins", s.input_bins);
    m.set_int("network.input_frames", s.input_frames);
    m.set_int("network.latent_dim", s.latent_dim);
    m.set_int_list("network.channels", s.channels);
    m.set_int("network.block_count", s.block_count);
    m.set("network.nonlinearity", s.nonlinearity);
    m.set_int("network.discriminator_head", s.discriminator_head ? 1 : 0);
    m.save(dir + "/manifest.txt");

    for (size_t i = 0; i < model.components.size(); ++i) {
        NamedArrays na;
        for (Param* p : model.components[i].all_params())
            na.entries.emplace_back(p->name, p->value);
        write_named_arrays(dir + "/component_" + std::to_string(i) + ".bin", "CCKP", na,
                           Dtype::f64);
    }
}

CassModel checkpoint_load(const std::string& dir) {
    const std::string mpath = dir + "/manifest.txt";
    if (!fs::exists(mpath)) throw DataError("no checkpoint manifest at '" + mpath + "'");
    const KvFile m = KvFile::parse_file(mpath);

    NetworkSpec spec;
    spec.input_bins = static_cast<int>(m.require_int("network.input_bins"));
    spec.input_frames = static_cast<int>(m.require_int("network.input_frames"));
    spec.latent_dim = static_cast<int>(m.require_int("network.latent_dim"));
    spec.channels = m.get_int_list("network.channels");
    spec.block_count = static_cast<int>(m.require_int("network.block_count"));
    spec.nonlinearity = m.get_string("network.nonlinearity", "relu");
    spec.discriminator_head = m.get_int("network.discriminator_head", 1) != 0;

    LossWeights w;
    w.alpha = m.require_real("weights.alpha");
    w.beta = m.require_real("weights.beta");
    for (const auto& key : m.keys_with_prefix("weights.cross."))
        w.cross_weights[std::stoul(key.substr(std::string("weights.cross.").size()))] =
            m.require_real(key);

    const Mode mode = parse_mode(m.require("model.mode"));
    const std::vector<std::string> names = m.get_list("model.components");
    if (static_cast<long>(names.size()) != m.require_int("model.k"))
        throw DataError("checkpoint manifest: component count disagrees with names");

    CassModel model = build_model(names, spec, mode, w, 0);
    checkpoint_load_into(model, dir);
    return model;
}

void checkpoint_load_into(CassModel& model, const std::string& dir) {
    const std::string mpath = dir + "/manifest.txt";
    if (!fs::exists(mpath)) throw DataError("no checkpoint manifest at '" + mpath + "'");
    const KvFile m = KvFile::parse_file(mpath);
    if (m.require("model.mode") != mode_name(model.mode))
        throw DataError("checkpoint mode '" + m.require("model.mode") +
                        "' does not match the model");
    const std::vector<std::string> names = m.get_list("model.components");
    if (names.size() != model.k())
        throw DataError("checkpoint component count does not match the model");
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] != model.components[i].name)
            throw DataError("checkpoint component '" + names[i] + "' does not match the model");
    for (size_t i = 0; i < model.components.size(); ++i) {
        const std::string path = dir + "/component_" + std::to_string(i) + ".bin";
        const NamedArrays na = read_named_arrays(path, "CCKP");
        std::vector<Param*> params = model.components[i].all_params();
        if (na.entries.size() != params.size())
            throw DataError("'" + path + "': parameter count mismatch");
        for (Param* p : params) {
            const Tensor& t = na.require(p->name);
            if (t.shape != p->value.shape)
                throw DataError("'" + path + "': shape mismatch on " + p->name);
            p->value = t;
        }
    }
}

} // namespace cass
