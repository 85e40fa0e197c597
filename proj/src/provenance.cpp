#include "pvml/provenance.hpp"

#include <sys/utsname.h>

#include <bit>
#include <chrono>
#include <cmath>
#include <set>

#include "json.hpp"
#include "pvml/error.hpp"
#include "pvml/sha256.hpp"

namespace pvml {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// ProvValue

ProvValue ProvValue::real(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidValue, "float provenance value must be finite");
  return ProvValue(Storage(v));
}

ProvValue ProvValue::timestamp(std::int64_t seconds, std::uint32_t nanos) {
  if (nanos >= 1'000'000'000U) throw Error(ErrorCode::InvalidValue, "timestamp nanos out of range");
  return ProvValue(Storage(Timestamp{seconds, nanos}));
}

ProvValue ProvValue::now() {
  const auto since_epoch = std::chrono::system_clock::now().time_since_epoch();
  const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(since_epoch).count();
  const std::int64_t seconds = ns / 1'000'000'000;
  return timestamp(seconds, static_cast<std::uint32_t>(ns - seconds * 1'000'000'000));
}

ProvValue ProvValue::object(std::string class_name, Map fields) {
  if (class_name.empty()) throw Error(ErrorCode::InvalidValue, "object class name must be non-empty");
  return ProvValue(Storage(Obj{std::move(class_name), std::move(fields)}));
}

namespace {

template <typename T>
const T& checked_get(const auto& storage, ProvValue::Kind want, ProvValue::Kind have) {
  if (const auto* p = std::get_if<T>(&storage)) return *p;
  throw Error(ErrorCode::InvalidValue, "expected " + std::string(kind_name(want)) + " but found " +
                                           std::string(kind_name(have)));
}

}  // namespace

const std::string& ProvValue::as_str() const { return checked_get<std::string>(value_, Kind::Str, kind()); }
std::int64_t ProvValue::as_int() const { return checked_get<std::int64_t>(value_, Kind::Int, kind()); }
double ProvValue::as_flt() const { return checked_get<double>(value_, Kind::Flt, kind()); }
bool ProvValue::as_bool() const { return checked_get<bool>(value_, Kind::Bool, kind()); }
const ProvValue::Timestamp& ProvValue::as_timestamp() const {
  return checked_get<Timestamp>(value_, Kind::Timestamp, kind());
}
const ProvValue::Hash& ProvValue::as_hash() const { return checked_get<Hash>(value_, Kind::Hash, kind()); }
const ProvValue::List& ProvValue::as_list() const { return checked_get<List>(value_, Kind::List, kind()); }
const ProvValue::Map& ProvValue::as_map() const { return checked_get<Map>(value_, Kind::Map, kind()); }
const ProvValue::Obj& ProvValue::as_obj() const { return checked_get<Obj>(value_, Kind::Obj, kind()); }

bool operator==(const ProvValue& a, const ProvValue& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ProvValue::Kind::Str: return a.as_str() == b.as_str();
    case ProvValue::Kind::Int: return a.as_int() == b.as_int();
    case ProvValue::Kind::Flt:
      return std::bit_cast<std::uint64_t>(a.as_flt()) == std::bit_cast<std::uint64_t>(b.as_flt());
    case ProvValue::Kind::Bool: return a.as_bool() == b.as_bool();
    case ProvValue::Kind::Timestamp: return a.as_timestamp() == b.as_timestamp();
    case ProvValue::Kind::Hash: return a.as_hash() == b.as_hash();
    case ProvValue::Kind::List: return a.as_list() == b.as_list();
    case ProvValue::Kind::Map: return a.as_map() == b.as_map();
    case ProvValue::Kind::Obj:
      return a.as_obj().class_name == b.as_obj().class_name && a.as_obj().fields == b.as_obj().fields;
  }
  return false;
}

std::string_view kind_name(ProvValue::Kind kind) {
  switch (kind) {
    case ProvValue::Kind::Str: return "str";
    case ProvValue::Kind::Int: return "int";
    case ProvValue::Kind::Flt: return "float";
    case ProvValue::Kind::Bool: return "bool";
    case ProvValue::Kind::Timestamp: return "timestamp";
    case ProvValue::Kind::Hash: return "hash";
    case ProvValue::Kind::List: return "list";
    case ProvValue::Kind::Map: return "map";
    case ProvValue::Kind::Obj: return "object";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Object provenance

ProvValue make_object_provenance(std::string class_name, ProvValue::Map configuration,
                                 ProvValue::Map instance) {
  ProvValue::Map fields;
  fields.emplace(kConfigurationKey, ProvValue::map(std::move(configuration)));
  fields.emplace(kInstanceKey, ProvValue::map(std::move(instance)));
  return ProvValue::object(std::move(class_name), std::move(fields));
}

bool is_object_provenance(const ProvValue& v) {
  if (!v.is(ProvValue::Kind::Obj)) return false;
  const auto& fields = v.as_obj().fields;
  if (fields.size() != 2) return false;
  const auto c = fields.find(std::string(kConfigurationKey));
  const auto i = fields.find(std::string(kInstanceKey));
  return c != fields.end() && i != fields.end() && c->second.is(ProvValue::Kind::Map) &&
         i->second.is(ProvValue::Kind::Map);
}

namespace {

const ProvValue::Map& partition(const ProvValue& v, std::string_view key) {
  if (!is_object_provenance(v)) {
    throw Error(ErrorCode::InvalidValue, "not an object provenance value");
  }
  return v.as_obj().fields.at(std::string(key)).as_map();
}

const ProvValue& partition_field(const ProvValue& v, std::string_view part, std::string_view key) {
  const auto& m = partition(v, part);
  const auto it = m.find(std::string(key));
  if (it == m.end()) {
    throw Error(ErrorCode::MissingProperty,
                v.as_obj().class_name + " has no " + std::string(part) + " field '" + std::string(key) + "'");
  }
  return it->second;
}

}  // namespace

const ProvValue::Map& configuration_of(const ProvValue& v) { return partition(v, kConfigurationKey); }
const ProvValue::Map& instance_of(const ProvValue& v) { return partition(v, kInstanceKey); }
const ProvValue& config_field(const ProvValue& v, std::string_view key) {
  return partition_field(v, kConfigurationKey, key);
}
const ProvValue& instance_field(const ProvValue& v, std::string_view key) {
  return partition_field(v, kInstanceKey, key);
}

// ---------------------------------------------------------------------------
// Canonical encoding

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_string(std::vector<std::uint8_t>& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

void encode_into(std::vector<std::uint8_t>& out, const ProvValue& v);

void encode_map(std::vector<std::uint8_t>& out, const ProvValue::Map& m) {
  out.push_back(0x08);
  put_u32(out, static_cast<std::uint32_t>(m.size()));
  // std::map<std::string> already iterates in byte order.
  for (const auto& [key, value] : m) {
    put_string(out, key);
    encode_into(out, value);
  }
}

void encode_into(std::vector<std::uint8_t>& out, const ProvValue& v) {
  switch (v.kind()) {
    case ProvValue::Kind::Str:
      out.push_back(0x01);
      put_string(out, v.as_str());
      break;
    case ProvValue::Kind::Int:
      out.push_back(0x02);
      put_u64(out, static_cast<std::uint64_t>(v.as_int()));
      break;
    case ProvValue::Kind::Flt:
      out.push_back(0x03);
      put_u64(out, std::bit_cast<std::uint64_t>(v.as_flt()));
      break;
    case ProvValue::Kind::Bool:
      out.push_back(0x04);
      out.push_back(v.as_bool() ? 0x01 : 0x00);
      break;
    case ProvValue::Kind::Timestamp:
      out.push_back(0x05);
      put_u64(out, static_cast<std::uint64_t>(v.as_timestamp().seconds));
      put_u32(out, v.as_timestamp().nanos);
      break;
    case ProvValue::Kind::Hash:
      out.push_back(0x06);
      put_string(out, v.as_hash().algorithm);
      put_string(out, v.as_hash().digest);
      break;
    case ProvValue::Kind::List:
      out.push_back(0x07);
      put_u32(out, static_cast<std::uint32_t>(v.as_list().size()));
      for (const auto& item : v.as_list()) encode_into(out, item);
      break;
    case ProvValue::Kind::Map:
      encode_map(out, v.as_map());
      break;
    case ProvValue::Kind::Obj:
      out.push_back(0x09);
      put_string(out, v.as_obj().class_name);
      encode_map(out, v.as_obj().fields);
      break;
  }
}

}  // namespace

std::vector<std::uint8_t> canonical_encode(const ProvValue& v) {
  std::vector<std::uint8_t> out;
  encode_into(out, v);
  return out;
}

bool is_volatile_key(std::string_view key) {
  return key == "os-name" || key == "architecture" || key == "user-info";
}

namespace {

ProvValue mask_map(const ProvValue::Map& m) {
  ProvValue::Map out;
  for (const auto& [key, value] : m) {
    out.emplace(key, is_volatile_key(key) ? ProvValue::str(std::string(kVolatileMarker))
                                          : mask_volatile(value));
  }
  return ProvValue::map(std::move(out));
}

}  // namespace

ProvValue mask_volatile(const ProvValue& v) {
  switch (v.kind()) {
    case ProvValue::Kind::Timestamp:
      return ProvValue::str(std::string(kVolatileMarker));
    case ProvValue::Kind::List: {
      ProvValue::List out;
      out.reserve(v.as_list().size());
      for (const auto& item : v.as_list()) out.push_back(mask_volatile(item));
      return ProvValue::list(std::move(out));
    }
    case ProvValue::Kind::Map:
      return mask_map(v.as_map());
    case ProvValue::Kind::Obj:
      return ProvValue::object(v.as_obj().class_name, mask_map(v.as_obj().fields).as_map());
    default:
      return v;
  }
}

std::string provenance_hash(const ProvValue& v) {
  return sha256_hex(canonical_encode(mask_volatile(v)));
}

// ---------------------------------------------------------------------------
// JSON

ProvValue make_ref(const std::string& record_name) {
  return ProvValue::object(std::string(kRefClass), {{"name", ProvValue::str(record_name)}});
}

bool is_ref(const ProvValue& v) {
  if (!v.is(ProvValue::Kind::Obj) || v.as_obj().class_name != kRefClass) return false;
  const auto& f = v.as_obj().fields;
  return f.size() == 1 && f.begin()->first == "name" && f.begin()->second.is(ProvValue::Kind::Str);
}

const std::string& ref_target(const ProvValue& v) {
  if (!is_ref(v)) throw Error(ErrorCode::InvalidValue, "value is not a config reference");
  return v.as_obj().fields.begin()->second.as_str();
}

namespace {

json to_json(const ProvValue& v);

json map_to_json(const ProvValue::Map& m) {
  json out = json::object();
  for (const auto& [key, value] : m) out[key] = to_json(value);
  return out;
}

json to_json(const ProvValue& v) {
  json out;
  if (is_ref(v)) {
    out["type"] = "ref";
    out["value"] = ref_target(v);
    return out;
  }
  out["type"] = std::string(kind_name(v.kind()));
  switch (v.kind()) {
    case ProvValue::Kind::Str: out["value"] = v.as_str(); break;
    case ProvValue::Kind::Int: out["value"] = v.as_int(); break;
    case ProvValue::Kind::Flt: out["value"] = v.as_flt(); break;
    case ProvValue::Kind::Bool: out["value"] = v.as_bool(); break;
    case ProvValue::Kind::Timestamp:
      out["value"] = {{"seconds", v.as_timestamp().seconds}, {"nanos", v.as_timestamp().nanos}};
      break;
    case ProvValue::Kind::Hash:
      out["value"] = {{"algorithm", v.as_hash().algorithm}, {"digest", v.as_hash().digest}};
      break;
    case ProvValue::Kind::List: {
      json items = json::array();
      for (const auto& item : v.as_list()) items.push_back(to_json(item));
      out["value"] = std::move(items);
      break;
    }
    case ProvValue::Kind::Map: out["value"] = map_to_json(v.as_map()); break;
    case ProvValue::Kind::Obj:
      out["value"] = {{"className", v.as_obj().class_name}, {"fields", map_to_json(v.as_obj().fields)}};
      break;
  }
  return out;
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::ParseError, what);
}

const json& member(const json& j, const char* key) {
  if (!j.is_object()) malformed(std::string("expected an object containing '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) malformed(std::string("missing '") + key + "'");
  return *it;
}

ProvValue from_json(const json& j);

ProvValue::Map map_from_json(const json& j) {
  if (!j.is_object()) malformed("map payload must be a JSON object");
  ProvValue::Map out;
  for (const auto& [key, value] : j.items()) out.emplace(key, from_json(value));
  return out;
}

ProvValue from_json(const json& j) {
  const json& type = member(j, "type");
  if (!type.is_string()) malformed("'type' must be a string");
  const auto tag = type.get<std::string>();
  const json& value = member(j, "value");
  try {
    if (tag == "str") {
      if (!value.is_string()) malformed("str payload must be a string");
      return ProvValue::str(value.get<std::string>());
    }
    if (tag == "int") {
      if (value.is_number_unsigned() && value.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        malformed("int payload out of range");
      }
      if (!value.is_number_integer()) malformed("int payload must be an integer");
      return ProvValue::integer(value.get<std::int64_t>());
    }
    if (tag == "float") {
      if (!value.is_number()) malformed("float payload must be a number");
      return ProvValue::real(value.get<double>());
    }
    if (tag == "bool") {
      if (!value.is_boolean()) malformed("bool payload must be a boolean");
      return ProvValue::boolean(value.get<bool>());
    }
    if (tag == "timestamp") {
      const auto& s = member(value, "seconds");
      const auto& n = member(value, "nanos");
      if (!s.is_number_integer() || !n.is_number_unsigned()) malformed("timestamp fields must be integers");
      return ProvValue::timestamp(s.get<std::int64_t>(), n.get<std::uint32_t>());
    }
    if (tag == "hash") {
      const auto& a = member(value, "algorithm");
      const auto& d = member(value, "digest");
      if (!a.is_string() || !d.is_string()) malformed("hash fields must be strings");
      return ProvValue::hash(a.get<std::string>(), d.get<std::string>());
    }
    if (tag == "list") {
      if (!value.is_array()) malformed("list payload must be an array");
      ProvValue::List items;
      items.reserve(value.size());
      for (const auto& item : value) items.push_back(from_json(item));
      return ProvValue::list(std::move(items));
    }
    if (tag == "map") return ProvValue::map(map_from_json(value));
    if (tag == "object") {
      const auto& cls = member(value, "className");
      if (!cls.is_string()) malformed("className must be a string");
      return ProvValue::object(cls.get<std::string>(), map_from_json(member(value, "fields")));
    }
    if (tag == "ref") {
      if (!value.is_string()) malformed("ref payload must be a string");
      return make_ref(value.get<std::string>());
    }
  } catch (const json::exception& e) {
    malformed(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidValue) malformed(e.what());
    throw;
  }
  throw Error(ErrorCode::UnknownTag, "unrecognized type tag '" + tag + "'");
}

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Convert the byte offset into a line/column pair.
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + e.what());
  }
}

}  // namespace

std::string serialize_provenance(const ProvValue& v, int indent) {
  try {
    return to_json(v).dump(indent);
  } catch (const nlohmann::json::type_error& e) {
    throw Error(ErrorCode::InvalidValue, std::string("provenance is not representable as JSON: ") + e.what());
  }
}

ProvValue parse_provenance(std::string_view text) { return from_json(parse_json_text(text)); }

// ---------------------------------------------------------------------------
// Configuration extraction

namespace {

class ConfigExtractor {
 public:
  std::vector<ConfigRecord> run(const ProvValue& root) {
    visit(root);
    std::vector<ConfigRecord> out;
    out.reserve(records_.size());
    for (auto& r : records_) out.push_back(std::move(*r));
    return out;
  }

 private:
  std::string visit(const ProvValue& obj) {
    const std::string name = obj.as_obj().class_name + "-" + std::to_string(records_.size());
    const std::size_t slot = records_.size();
    records_.push_back(std::make_unique<ConfigRecord>());
    ProvValue::Map props;
    const auto& source = is_object_provenance(obj) ? configuration_of(obj) : obj.as_obj().fields;
    for (const auto& [key, value] : source) props.emplace(key, replace_objects(value));
    *records_[slot] = ConfigRecord{name, obj.as_obj().class_name, std::move(props)};
    return name;
  }

  ProvValue replace_objects(const ProvValue& v) {
    switch (v.kind()) {
      case ProvValue::Kind::Obj:
        if (is_ref(v)) return v;
        return make_ref(visit(v));
      case ProvValue::Kind::List: {
        ProvValue::List items;
        for (const auto& item : v.as_list()) items.push_back(replace_objects(item));
        return ProvValue::list(std::move(items));
      }
      case ProvValue::Kind::Map: {
        ProvValue::Map entries;
        for (const auto& [key, value] : v.as_map()) entries.emplace(key, replace_objects(value));
        return ProvValue::map(std::move(entries));
      }
      default:
        return v;
    }
  }

  std::vector<std::unique_ptr<ConfigRecord>> records_;
};

}  // namespace

std::vector<ConfigRecord> extract_configuration(const ProvValue& root) {
  if (!root.is(ProvValue::Kind::Obj)) {
    throw Error(ErrorCode::InvalidValue, "configuration extraction needs an object at the root");
  }
  return ConfigExtractor().run(root);
}

std::string serialize_config(const std::vector<ConfigRecord>& records, int indent) {
  json list = json::array();
  for (const auto& r : records) {
    json props = json::object();
    for (const auto& [key, value] : r.properties) props[key] = to_json(value);
    list.push_back({{"name", r.name}, {"className", r.class_name}, {"properties", std::move(props)}});
  }
  json doc;
  doc["config"] = std::move(list);
  return doc.dump(indent);
}

std::vector<ConfigRecord> parse_config(std::string_view text) {
  const json doc = parse_json_text(text);
  const json& list = member(doc, "config");
  if (!list.is_array()) malformed("'config' must be an array");
  std::vector<ConfigRecord> out;
  std::set<std::string> names;
  for (const auto& item : list) {
    const json& name = member(item, "name");
    const json& cls = member(item, "className");
    if (!name.is_string() || !cls.is_string()) malformed("record name and className must be strings");
    ConfigRecord r{name.get<std::string>(), cls.get<std::string>(), {}};
    if (r.class_name.empty()) malformed("record className must be non-empty");
    if (!names.insert(r.name).second) malformed("duplicate record name '" + r.name + "'");
    if (item.contains("properties")) r.properties = map_from_json(item.at("properties"));
    out.push_back(std::move(r));
  }
  return out;
}

bool ConfigView::has(std::string_view key) const {
  return record_->properties.find(std::string(key)) != record_->properties.end();
}

const ProvValue& ConfigView::get(std::string_view key) const {
  const auto it = record_->properties.find(std::string(key));
  if (it == record_->properties.end()) {
    throw Error(ErrorCode::MissingProperty,
                record_->class_name + " record '" + record_->name + "' has no property '" + std::string(key) + "'");
  }
  return it->second;
}

namespace {

template <typename F>
auto typed(const ConfigView& view, std::string_view key, F&& f) {
  try {
    return f(view.get(key));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidValue) throw;
    throw Error(ErrorCode::InvalidConfig, "property '" + std::string(key) + "' of " + view.class_name() + ": " + e.what());
  }
}

}  // namespace

std::string ConfigView::get_str(std::string_view key) const {
  return typed(*this, key, [](const ProvValue& v) { return v.as_str(); });
}
std::int64_t ConfigView::get_int(std::string_view key) const {
  return typed(*this, key, [](const ProvValue& v) { return v.as_int(); });
}
std::uint64_t ConfigView::get_seed(std::string_view key) const {
  return static_cast<std::uint64_t>(get_int(key));
}
double ConfigView::get_flt(std::string_view key) const {
  return typed(*this, key, [](const ProvValue& v) {
    return v.is(ProvValue::Kind::Int) ? static_cast<double>(v.as_int()) : v.as_flt();
  });
}
bool ConfigView::get_bool(std::string_view key) const {
  return typed(*this, key, [](const ProvValue& v) { return v.as_bool(); });
}

ConfigView ConfigView::get_object(std::string_view key) const { return resolve(get(key)); }

ConfigView ConfigView::resolve(const ProvValue& ref) const {
  if (!is_ref(ref)) throw Error(ErrorCode::InvalidConfig, "expected a reference to another config record");
  const auto& target = ref_target(ref);
  for (const auto& r : *all_) {
    if (r.name == target) return ConfigView(r, *all_);
  }
  throw Error(ErrorCode::MissingProperty, "no config record named '" + target + "'");
}

// ---------------------------------------------------------------------------
// Redaction

namespace {

ProvValue skeleton(const ProvValue& v) {
  switch (v.kind()) {
    case ProvValue::Kind::List: {
      ProvValue::List items;
      for (const auto& item : v.as_list()) items.push_back(skeleton(item));
      return ProvValue::list(std::move(items));
    }
    case ProvValue::Kind::Map: {
      ProvValue::Map entries;
      for (const auto& [key, value] : v.as_map()) entries.emplace(key, skeleton(value));
      return ProvValue::map(std::move(entries));
    }
    case ProvValue::Kind::Obj: {
      ProvValue::Map entries;
      for (const auto& [key, value] : v.as_obj().fields) entries.emplace(key, skeleton(value));
      return ProvValue::object(v.as_obj().class_name, std::move(entries));
    }
    default:
      return ProvValue::str(std::string(kRedactedMarker));
  }
}

}  // namespace

Redaction redact(const ProvValue& model_provenance) {
  const std::string digest = provenance_hash(model_provenance);
  if (!is_object_provenance(model_provenance)) {
    return {digest, ProvValue::object(model_provenance.is(ProvValue::Kind::Obj)
                                          ? model_provenance.as_obj().class_name
                                          : std::string("redacted"),
                                      {{"provenance-hash", ProvValue::hash("SHA-256", digest)}})};
  }
  ProvValue::Map configuration;
  for (const auto& [key, value] : configuration_of(model_provenance)) configuration.emplace(key, skeleton(value));
  ProvValue::Map instance;
  for (const auto& [key, value] : instance_of(model_provenance)) {
    const bool keep = key == "timestamp" || key == "os-name" || key == "architecture" || key == "library-version";
    instance.emplace(key, keep ? value : skeleton(value));
  }
  instance["provenance-hash"] = ProvValue::hash("SHA-256", digest);
  return {digest, make_object_provenance(model_provenance.as_obj().class_name, std::move(configuration),
                                         std::move(instance))};
}

// ---------------------------------------------------------------------------
// Diff

namespace {

std::string join(const std::string& path, const std::string& part) {
  return path.empty() ? part : path + "/" + part;
}

void diff_into(std::vector<DiffEntry>& out, const std::string& path, bool vol, const ProvValue& a,
               const ProvValue& b);

void diff_maps(std::vector<DiffEntry>& out, const std::string& path, bool vol, const ProvValue::Map& a,
               const ProvValue::Map& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      const bool v = vol || is_volatile_key(ia->first) || ia->second.is(ProvValue::Kind::Timestamp);
      out.push_back({join(path, ia->first), ia->second, std::nullopt, v});
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      const bool v = vol || is_volatile_key(ib->first) || ib->second.is(ProvValue::Kind::Timestamp);
      out.push_back({join(path, ib->first), std::nullopt, ib->second, v});
      ++ib;
    } else {
      diff_into(out, join(path, ia->first), vol || is_volatile_key(ia->first), ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
}

void diff_into(std::vector<DiffEntry>& out, const std::string& path, bool vol, const ProvValue& a,
               const ProvValue& b) {
  if (a.kind() != b.kind()) {
    out.push_back({path, a, b,
                   vol || a.is(ProvValue::Kind::Timestamp) || b.is(ProvValue::Kind::Timestamp)});
    return;
  }
  switch (a.kind()) {
    case ProvValue::Kind::List: {
      const auto& la = a.as_list();
      const auto& lb = b.as_list();
      const std::size_t n = std::max(la.size(), lb.size());
      for (std::size_t i = 0; i < n; ++i) {
        const auto p = join(path, std::to_string(i));
        if (i >= la.size()) {
          out.push_back({p, std::nullopt, lb[i], vol});
        } else if (i >= lb.size()) {
          out.push_back({p, la[i], std::nullopt, vol});
        } else {
          diff_into(out, p, vol, la[i], lb[i]);
        }
      }
      return;
    }
    case ProvValue::Kind::Map:
      diff_maps(out, path, vol, a.as_map(), b.as_map());
      return;
    case ProvValue::Kind::Obj:
      if (a.as_obj().class_name != b.as_obj().class_name) {
        out.push_back({join(path, "@class"), ProvValue::str(a.as_obj().class_name),
                       ProvValue::str(b.as_obj().class_name), vol});
      }
      diff_maps(out, path, vol, a.as_obj().fields, b.as_obj().fields);
      return;
    default:
      if (!(a == b)) out.push_back({path, a, b, vol || a.is(ProvValue::Kind::Timestamp)});
      return;
  }
}

}  // namespace

std::vector<DiffEntry> diff_provenance(const ProvValue& a, const ProvValue& b) {
  std::vector<DiffEntry> out;
  diff_into(out, "", false, a, b);
  return out;
}

// ---------------------------------------------------------------------------

std::string host_os_name() {
  utsname info{};
  if (uname(&info) != 0) return "unknown";
  return info.sysname;
}

std::string host_architecture() {
  utsname info{};
  if (uname(&info) != 0) return "unknown";
  return info.machine;
}

}  // namespace pvml
