#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cass/model.hpp"
#include "cass/synthgen.hpp"
#include "cass/tensor.hpp"

namespace cass {

// ---------------------------------------------------------------------------
// Binary array layout shared by dataset records, spectrogram dumps and
// checkpoints. Little-endian throughout:
//   magic "CARR" | dtype "f4"/"f8" | rank u32 | dims u32[rank] | payload
// f4 payloads are written from doubles by narrowing; f8 round-trips exactly.
// ---------------------------------------------------------------------------
enum class Dtype { f32, f64 };

void write_array(std::ostream& out, const Tensor& t, Dtype dtype);
Tensor read_array(std::istream& in, Dtype* dtype = nullptr);
void write_array_file(const std::string& path, const Tensor& t, Dtype dtype);
Tensor read_array_file(const std::string& path, Dtype* dtype = nullptr);

// A container of named arrays in one file:
//   magic | count u32 | (name_len u32 | name bytes | array blob) * count
// Entry order is preserved. `magic` is 4 bytes, e.g. "CREC" for dataset
// records and "CCKP" for parameter checkpoints.
struct NamedArrays {
    std::vector<std::pair<std::string, Tensor>> entries;

    const Tensor* find(const std::string& name) const;
    const Tensor& require(const std::string& name) const;
};

void write_named_arrays(const std::string& path, const std::string& magic,
                        const NamedArrays& arrays, Dtype dtype);
NamedArrays read_named_arrays(const std::string& path, const std::string& magic);

// ---------------------------------------------------------------------------
// Line-oriented key-value text. One `key = value` per line; keys are dotted
// paths; '#' starts a comment; blank lines ignored. serialize() emits keys
// sorted so equal content yields equal bytes.
// ---------------------------------------------------------------------------
class KvFile {
  public:
    static KvFile parse_string(const std::string& text);
    static KvFile parse_file(const std::string& path);

    std::string serialize() const;
    void save(const std::string& path) const;

    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    const std::string& require(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    long get_int(const std::string& key, long fallback) const;
    long require_int(const std::string& key) const;
    double get_real(const std::string& key, double fallback) const;
    double require_real(const std::string& key) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;

    void set(const std::string& key, const std::string& value);
    void set_int(const std::string& key, long value);
    void set_u64(const std::string& key, uint64_t value);
    void set_real(const std::string& key, double value);

    // Comma-separated list helpers.
    std::vector<std::string> get_list(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;
    std::vector<double> get_real_list(const std::string& key) const;
    void set_list(const std::string& key, const std::vector<std::string>& values);
    void set_int_list(const std::string& key, const std::vector<int>& values);
    void set_real_list(const std::string& key, const std::vector<double>& values);

    // Keys beginning with `prefix` (dotted), in sorted order.
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;
    const std::map<std::string, std::string>& items() const { return items_; }

  private:
    std::map<std::string, std::string> items_;
};

// Canonical text form of a real number: shortest form that round-trips.
std::string format_real(double v);

// FNV-1a 64-bit hash and the 8-hex-digit short form used in directory names.
uint64_t fnv1a64(const std::string& data);
std::string short_hash(const std::string& data);

// ---------------------------------------------------------------------------
// Dataset directory layout:
//   <dir>/manifest.txt            dataset kind, K, rates, seed, split, meta
//   <dir>/records/r00000.bin ...  one CREC file per record (float32)
// ---------------------------------------------------------------------------
struct StoredDataset {
    std::string kind;
    double sample_rate = 0.0;
    uint64_t seed = 0;
    std::vector<std::string> component_names;
    std::vector<MixtureExample> records;
    DatasetSplit split;
};

void save_dataset(const std::string& dir, const StoredDataset& ds);
StoredDataset load_dataset(const std::string& dir);

// ---------------------------------------------------------------------------
// Checkpoint directory layout:
//   <dir>/manifest.txt        mode, weights, network spec, component names
//   <dir>/component_<i>.bin   CCKP file of float64 parameter tensors
// ---------------------------------------------------------------------------
void checkpoint_save(CassModel& model, const std::string& dir);
CassModel checkpoint_load(const std::string& dir);
// Load parameters into an already-built model; manifest must agree with the
// model's mode, component names and network shape.
void checkpoint_load_into(CassModel& model, const std::string& dir);

} // namespace cass
