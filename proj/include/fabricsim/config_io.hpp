#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fabricsim/fabric_config.hpp"

namespace fabricsim {

namespace config_detail {

using nlohmann::json;

// Typed, path-aware access to one JSON object. Every key must be consumed;
// finish() reports the first one that was not.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json* find(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  template <class T>
  void number(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number()) throw ConfigError(child(key), "expected a number");
    if constexpr (std::is_integral_v<T>) {
      if (!v->is_number_integer()) throw ConfigError(child(key), "expected an integer");
      if (v->is_number_unsigned()) {
        out = static_cast<T>(v->get<std::uint64_t>());
      } else {
        auto x = v->get<std::int64_t>();
        if (x < 0 && std::is_unsigned_v<T>) throw ConfigError(child(key), "must be non-negative");
        out = static_cast<T>(x);
      }
    } else {
      out = v->get<T>();
    }
  }

  void string(const std::string& key, std::string& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string()) throw ConfigError(child(key), "expected a string");
    out = v->get<std::string>();
  }

  ObjectReader object(const std::string& key) {
    const json* v = find(key);
    static const json empty = json::object();
    return ObjectReader(v ? *v : empty, child(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(child(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class Fn>
auto parse_enum(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

inline void read_switch(ObjectReader r, SwitchParams& s) {
  r.number("input_buffer_bytes", s.input_buffer_bytes);
  r.number("voq_limit_bytes", s.voq_limit_bytes);
  r.number("islip_iterations", s.islip_iterations);
  r.number("crossbar_speedup", s.crossbar_speedup);
  r.finish();
}

inline json write_switch(const SwitchParams& s) {
  return {{"input_buffer_bytes", s.input_buffer_bytes},
          {"voq_limit_bytes", s.voq_limit_bytes},
          {"islip_iterations", s.islip_iterations},
          {"crossbar_speedup", s.crossbar_speedup}};
}

}  // namespace config_detail

// Builds a config from JSON, applying defaults for absent keys. Unknown keys
// and type errors raise ConfigError naming the field; the result is validated.
inline FabricConfig config_from_json(const nlohmann::json& j) {
  using namespace config_detail;
  FabricConfig c;
  ObjectReader root(j, "");
  root.string("name", c.name);

  {
    auto r = root.object("node");
    r.number("accelerators_per_node", c.node.accelerators_per_node);
    r.number("acc_link_gbps", c.node.acc_link_gbps);
    r.number("nic_inter_gbps", c.node.nic_inter_gbps);
    read_switch(r.object("intra_switch"), c.node.intra_switch);
    r.finish();
  }
  {
    auto r = root.object("rlft");
    r.number("radix", c.rlft.radix);
    // Node count defaults to what the radix hosts.
    c.rlft.node_count = c.rlft.radix * c.rlft.radix / 2;
    r.number("node_count", c.rlft.node_count);
    r.finish();
  }
  read_switch(root.object("inter_switch"), c.inter_switch);
  if (const json* a = root.find("arbitration")) {
    if (!a->is_string()) throw ConfigError("arbitration", "expected a string");
    c.arbitration = parse_enum("arbitration", [&] { return parse_arbitration(a->get<std::string>()); });
  }
  {
    auto r = root.object("links");
    r.number("switch_gbps", c.switch_link_gbps);
    r.number("intra_length_m", c.intra_link_length_m);
    r.number("inter_length_m", c.inter_link_length_m);
    r.number("propagation_ns_per_m", c.propagation_ns_per_m);
    r.number("intra_dllp_bytes", c.intra_dllp_bytes);
    r.number("intra_ack_factor", c.intra_ack_factor);
    r.finish();
  }
  {
    auto r = root.object("geometry");
    r.number("intra_header_bytes", c.geometry.intra_header_bytes);
    r.number("intra_payload_bytes", c.geometry.intra_payload_bytes);
    r.number("inter_header_bytes", c.geometry.inter_header_bytes);
    r.number("inter_payload_bytes", c.geometry.inter_payload_bytes);
    r.finish();
  }
  {
    auto r = root.object("load_reference");
    r.number("header_bytes", c.load_reference.header_bytes);
    r.number("payload_bytes", c.load_reference.payload_bytes);
    r.finish();
  }
  {
    auto r = root.object("nic");
    r.number("conversion_delay_ns", c.nic.conversion_delay_ns);
    r.number("flush_timeout_ns", c.nic.flush_timeout_ns);
    std::string packing(to_string(c.nic.packing));
    r.string("packing", packing);
    c.nic.packing = parse_enum(r.child("packing"), [&] { return parse_packing(packing); });
    r.number("input_buffer_bytes", c.nic.input_buffer_bytes);
    r.finish();
  }
  {
    auto r = root.object("pattern");
    std::string name = c.pattern.name;
    r.string("name", name);
    Bytes size = c.pattern.message_bytes;
    r.number("message_bytes", size);
    if (name == "Custom") {
      if (!r.has("inter_fraction"))
        throw ConfigError(r.child("inter_fraction"), "required for a Custom pattern");
      double f = 0;
      r.number("inter_fraction", f);
      c.pattern = TrafficPattern::custom(f, size);
    } else {
      c.pattern = parse_enum(r.child("name"), [&] { return TrafficPattern::named(name, size); });
      if (r.has("inter_fraction")) {
        double f = 0;
        r.number("inter_fraction", f);
        if (f != c.pattern.inter_fraction)
          throw ConfigError(r.child("inter_fraction"), "does not match pattern " + name);
      }
    }
    r.finish();
  }
  if (const json* s = root.find("sweep")) {
    if (!s->is_array()) throw ConfigError("sweep", "expected an array");
    c.sweep.clear();
    for (std::size_t i = 0; i < s->size(); ++i) {
      ObjectReader r((*s)[i], "sweep[" + std::to_string(i) + "]");
      LoadPoint p;
      if (!r.has("load")) throw ConfigError(r.child("load"), "required");
      r.number("load", p.load);
      double us = p.duration.us();
      r.number("duration_us", us);
      p.duration = SimTime::from_us(us);
      r.finish();
      c.sweep.push_back(p);
    }
  }
  root.number("seed", c.seed.seed);
  root.number("warmup_fraction", c.warmup_fraction);
  root.finish();
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const FabricConfig& c) {
  using namespace config_detail;
  json sweep = json::array();
  for (const auto& p : c.sweep) sweep.push_back({{"load", p.load}, {"duration_us", p.duration.us()}});
  return {
      {"name", c.name},
      {"node",
       {{"accelerators_per_node", c.node.accelerators_per_node},
        {"acc_link_gbps", c.node.acc_link_gbps},
        {"nic_inter_gbps", c.node.nic_inter_gbps},
        {"intra_switch", write_switch(c.node.intra_switch)}}},
      {"rlft", {{"radix", c.rlft.radix}, {"node_count", c.rlft.node_count}}},
      {"inter_switch", write_switch(c.inter_switch)},
      {"arbitration", std::string(to_string(c.arbitration))},
      {"links",
       {{"switch_gbps", c.switch_link_gbps},
        {"intra_length_m", c.intra_link_length_m},
        {"inter_length_m", c.inter_link_length_m},
        {"propagation_ns_per_m", c.propagation_ns_per_m},
        {"intra_dllp_bytes", c.intra_dllp_bytes},
        {"intra_ack_factor", c.intra_ack_factor}}},
      {"geometry",
       {{"intra_header_bytes", c.geometry.intra_header_bytes},
        {"intra_payload_bytes", c.geometry.intra_payload_bytes},
        {"inter_header_bytes", c.geometry.inter_header_bytes},
        {"inter_payload_bytes", c.geometry.inter_payload_bytes}}},
      {"load_reference",
       {{"header_bytes", c.load_reference.header_bytes},
        {"payload_bytes", c.load_reference.payload_bytes}}},
      {"nic",
       {{"conversion_delay_ns", c.nic.conversion_delay_ns},
        {"flush_timeout_ns", c.nic.flush_timeout_ns},
        {"packing", std::string(to_string(c.nic.packing))},
        {"input_buffer_bytes", c.nic.input_buffer_bytes}}},
      {"pattern",
       {{"name", c.pattern.name},
        {"inter_fraction", c.pattern.inter_fraction},
        {"message_bytes", c.pattern.message_bytes}}},
      {"sweep", sweep},
      {"seed", c.seed.seed},
      {"warmup_fraction", c.warmup_fraction},
  };
}

inline FabricConfig parse_config(const std::string& text, const std::string& origin = "<string>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", origin + ": malformed JSON: " + e.what());
  }
  return config_from_json(j);
}

inline FabricConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

inline std::string dump_config(const FabricConfig& c) { return config_to_json(c).dump(2) + "\n"; }

}  // namespace fabricsim
