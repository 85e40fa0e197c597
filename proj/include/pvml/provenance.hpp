#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace pvml {

/// A typed, canonically encodable tree of provenance values.
///
/// Values are built through the named factories (`ProvValue::str`, ...) so
/// that a string literal never silently becomes a Bool.
class ProvValue {
 public:
  struct Timestamp {
    std::int64_t seconds = 0;
    std::uint32_t nanos = 0;
    bool operator==(const Timestamp&) const = default;
  };
  struct Hash {
    std::string algorithm;
    std::string digest;
    bool operator==(const Hash&) const = default;
  };
  using List = std::vector<ProvValue>;
  using Map = std::map<std::string, ProvValue>;
  struct Obj {
    std::string class_name;
    Map fields;
  };

  enum class Kind { Str, Int, Flt, Bool, Timestamp, Hash, List, Map, Obj };

  ProvValue() : value_(std::string()) {}

  static ProvValue str(std::string s) { return ProvValue(Storage(std::move(s))); }
  static ProvValue integer(std::int64_t v) { return ProvValue(Storage(v)); }
  /// Throws InvalidValue for NaN or infinities.
  static ProvValue real(double v);
  static ProvValue boolean(bool v) { return ProvValue(Storage(v)); }
  static ProvValue timestamp(std::int64_t seconds, std::uint32_t nanos);
  static ProvValue now();
  static ProvValue hash(std::string algorithm, std::string digest) {
    return ProvValue(Storage(Hash{std::move(algorithm), std::move(digest)}));
  }
  static ProvValue list(List items = {}) { return ProvValue(Storage(std::move(items))); }
  static ProvValue map(Map entries = {}) { return ProvValue(Storage(std::move(entries))); }
  /// Throws InvalidValue for an empty class name.
  static ProvValue object(std::string class_name, Map fields);

  Kind kind() const { return static_cast<Kind>(value_.index()); }
  bool is(Kind k) const { return kind() == k; }

  // Typed accessors throw InvalidValue on a kind mismatch.
  const std::string& as_str() const;
  std::int64_t as_int() const;
  double as_flt() const;
  bool as_bool() const;
  const Timestamp& as_timestamp() const;
  const Hash& as_hash() const;
  const List& as_list() const;
  const Map& as_map() const;
  const Obj& as_obj() const;

  /// Structural equality; floats compare by bit pattern.
  friend bool operator==(const ProvValue& a, const ProvValue& b);

 private:
  using Storage = std::variant<std::string, std::int64_t, double, bool, Timestamp,
                               Hash, List, Map, Obj>;
  explicit ProvValue(Storage s) : value_(std::move(s)) {}

  Storage value_;
};

std::string_view kind_name(ProvValue::Kind kind);

// ---------------------------------------------------------------------------
// Object provenance: an Obj whose fields are exactly {"configuration": Map,
// "instance": Map}. Configuration entries are statically known (hyperparameters,
// paths, algorithm names); instance entries are computed during a run.

inline constexpr std::string_view kConfigurationKey = "configuration";
inline constexpr std::string_view kInstanceKey = "instance";

ProvValue make_object_provenance(std::string class_name, ProvValue::Map configuration,
                                 ProvValue::Map instance);
bool is_object_provenance(const ProvValue& v);
const ProvValue::Map& configuration_of(const ProvValue& object_provenance);
const ProvValue::Map& instance_of(const ProvValue& object_provenance);
/// Field lookup in either partition; throws MissingProperty when absent.
const ProvValue& config_field(const ProvValue& object_provenance, std::string_view key);
const ProvValue& instance_field(const ProvValue& object_provenance, std::string_view key);

// ---------------------------------------------------------------------------
// Canonical encoding and hashing.

/// Deterministic byte encoding. Tag bytes Str=0x01 .. Obj=0x09; strings are
/// u32 big-endian length + bytes; Int and Flt bit patterns are 8 bytes
/// big-endian; List and Map carry a u32 big-endian element count; Map
/// entries are emitted in key byte order; Timestamp is i64 seconds + u32
/// nanos; Hash is two strings; Obj is the class name followed by the Map.
std::vector<std::uint8_t> canonical_encode(const ProvValue& v);

/// Keys whose values describe the host or user rather than the computation.
bool is_volatile_key(std::string_view key);

inline constexpr std::string_view kVolatileMarker = "<REDACTED-VOLATILE>";

/// Copy of `v` with every Timestamp and every volatile-keyed entry replaced
/// by Str("<REDACTED-VOLATILE>").
ProvValue mask_volatile(const ProvValue& v);

/// Lowercase hex SHA-256 of the canonical encoding of mask_volatile(v).
std::string provenance_hash(const ProvValue& v);

// ---------------------------------------------------------------------------
// JSON. Each value is {"type": tag, "value": payload}; tags are str, int,
// float, bool, timestamp, hash, list, map, object. Config documents also use
// {"type": "ref", "value": id} for references between records.

std::string serialize_provenance(const ProvValue& v, int indent = -1);
ProvValue parse_provenance(std::string_view text);

// ---------------------------------------------------------------------------
// Configuration extraction.

/// Class name of the Obj that stands for a reference to another record.
inline constexpr std::string_view kRefClass = "@ref";
ProvValue make_ref(const std::string& record_name);
bool is_ref(const ProvValue& v);
const std::string& ref_target(const ProvValue& v);

struct ConfigRecord {
  std::string name;
  std::string class_name;
  ProvValue::Map properties;
  bool operator==(const ConfigRecord&) const = default;
};

/// Depth-first walk collecting the configuration partition of every Obj
/// reachable through configuration fields. Nested Objs are replaced by refs;
/// record names are "<className>-<visit index>". Instance fields are dropped.
std::vector<ConfigRecord> extract_configuration(const ProvValue& root);

/// {"config": [records...]}
std::string serialize_config(const std::vector<ConfigRecord>& records, int indent = 2);
std::vector<ConfigRecord> parse_config(std::string_view text);

/// Lookup view used by the reconstruction registries.
class ConfigView {
 public:
  ConfigView(const ConfigRecord& record, const std::vector<ConfigRecord>& all)
      : record_(&record), all_(&all) {}

  const std::string& class_name() const { return record_->class_name; }
  const ConfigRecord& record() const { return *record_; }
  bool has(std::string_view key) const;
  const ProvValue& get(std::string_view key) const;
  std::string get_str(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::uint64_t get_seed(std::string_view key) const;
  double get_flt(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  /// Follows a ref property to its record.
  ConfigView get_object(std::string_view key) const;
  ConfigView resolve(const ProvValue& ref) const;

 private:
  const ConfigRecord* record_;
  const std::vector<ConfigRecord>* all_;
};

// ---------------------------------------------------------------------------
// Redaction and diffs.

inline constexpr std::string_view kRedactedMarker = "<REDACTED>";

struct Redaction {
  std::string digest;
  ProvValue redacted;
};

/// Replaces every data and trainer leaf with Str("<REDACTED>"), keeping the
/// Obj/List/Map skeleton, and stores Hash("SHA-256", digest) at the root.
Redaction redact(const ProvValue& model_provenance);

struct DiffEntry {
  std::string path;
  std::optional<ProvValue> left;
  std::optional<ProvValue> right;
  bool is_volatile = false;
};

std::vector<DiffEntry> diff_provenance(const ProvValue& a, const ProvValue& b);

// ---------------------------------------------------------------------------
// Host information recorded in model provenance.

inline constexpr std::string_view kLibraryVersion = "0.1.0";
std::string host_os_name();
std::string host_architecture();

}  // namespace pvml
