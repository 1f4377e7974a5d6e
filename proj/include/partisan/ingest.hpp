#pragma once

// Vote event acquisition: EVM log decoding, fixture files, the DAO registry
// and fork ground-truth lists.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "partisan/address.hpp"
#include "partisan/error.hpp"
#include "partisan/keccak.hpp"

namespace partisan {

using json = nlohmann::json;

struct VoteEvent {
  Address voter;
  std::uint64_t proposal_id = 0;
  std::int64_t support = 0;  // raw on-chain value
  std::uint64_t block_number = 0;
  std::uint64_t log_index = 0;

  bool operator==(const VoteEvent&) const = default;
};

/// Chain order, with the remaining fields as a tie-break so that sorting is
/// total and independent of input order.
inline bool chain_order(const VoteEvent& a, const VoteEvent& b) {
  return std::tie(a.block_number, a.log_index, a.voter, a.proposal_id, a.support) <
         std::tie(b.block_number, b.log_index, b.voter, b.proposal_id, b.support);
}

struct DaoRegistryEntry {
  std::string name;
  std::string chain;
  Address governance_contract;
  std::uint64_t deploy_block = 0;
  std::uint64_t end_block = 0;
  std::vector<std::string> event_signatures;
};

struct ForkGroundTruth {
  std::string fork_label;
  std::set<Address> addresses;

  bool contains(const Address& a) const { return addresses.count(a) != 0; }
};

// ---------------------------------------------------------------------------
// ABI event signatures

struct AbiParam {
  std::string type;
  bool indexed = false;
  bool dynamic() const { return type == "string" || type == "bytes" || type.ends_with("[]"); }
};

/// A parsed event signature such as `VoteCast(address,uint256,uint8,uint256,string)`.
/// Parameters may carry an `indexed` annotation
/// (`VoteCast(address indexed,uint256,...)`); it is stripped before hashing.
/// Without annotations, the number of indexed parameters is inferred from
/// the log's topic count and taken as the leading parameters.
class EventSignature {
 public:
  static EventSignature parse(std::string_view text) {
    EventSignature sig;
    auto open = text.find('(');
    auto close = text.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open || open == 0)
      throw MalformedData("bad event signature '" + std::string(text) + "'");
    sig.name_ = trim(text.substr(0, open));
    std::string_view body = text.substr(open + 1, close - open - 1);
    if (!trim(body).empty()) {
      std::size_t start = 0;
      while (true) {
        auto comma = body.find(',', start);
        auto piece = trim(body.substr(start, comma == std::string_view::npos ? body.size() - start : comma - start));
        sig.params_.push_back(parse_param(piece, text));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    }
    sig.annotated_ = std::any_of(sig.params_.begin(), sig.params_.end(), [](const AbiParam& p) { return p.indexed; });

    for (std::size_t i = 0; i < sig.params_.size(); ++i) {
      const auto& t = sig.params_[i].type;
      if (!sig.voter_ && t == "address") sig.voter_ = i;
      else if (!sig.support_ && (t == "uint8" || t == "bool")) sig.support_ = i;
      else if (!sig.proposal_ && t.starts_with("uint") && t != "uint8") sig.proposal_ = i;
    }
    if (!sig.voter_ || !sig.proposal_ || !sig.support_)
      throw MalformedData("signature '" + std::string(text) + "' lacks voter/proposal/support fields");

    sig.canonical_ = sig.name_ + "(";
    for (std::size_t i = 0; i < sig.params_.size(); ++i) {
      if (i) sig.canonical_ += ",";
      sig.canonical_ += sig.params_[i].type;
    }
    sig.canonical_ += ")";
    sig.topic_ = keccak256(sig.canonical_);
    return sig;
  }

  const std::string& canonical() const { return canonical_; }
  const Hash256& topic() const { return topic_; }
  const std::vector<AbiParam>& params() const { return params_; }
  bool annotated() const { return annotated_; }
  std::size_t voter_index() const { return *voter_; }
  std::size_t proposal_index() const { return *proposal_; }
  std::size_t support_index() const { return *support_; }

  /// Indexed flags for a log with `topic_count` topics.
  std::vector<bool> indexed_layout(std::size_t topic_count) const {
    std::vector<bool> out(params_.size(), false);
    if (annotated_) {
      for (std::size_t i = 0; i < params_.size(); ++i) out[i] = params_[i].indexed;
    } else {
      std::size_t n = topic_count == 0 ? 0 : std::min(topic_count - 1, params_.size());
      for (std::size_t i = 0; i < n; ++i) out[i] = true;
    }
    return out;
  }

 private:
  static std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
  }

  static AbiParam parse_param(const std::string& piece, std::string_view whole) {
    std::istringstream in(piece);
    AbiParam p;
    std::string word;
    in >> p.type;
    while (in >> word) {
      if (word == "indexed") p.indexed = true;  // any other word is a parameter name
    }
    if (p.type == "uint") p.type = "uint256";
    if (p.type == "int") p.type = "int256";
    bool ok = p.type == "address" || p.type == "bool" || p.type == "string" || p.type == "bytes" ||
              p.type.starts_with("uint") || p.type.starts_with("int") || p.type.starts_with("bytes") ||
              p.type.ends_with("[]");
    if (!ok || (p.type.find('[') != std::string::npos && !p.type.ends_with("[]")))
      throw MalformedData("unsupported ABI type '" + p.type + "' in '" + std::string(whole) + "'");
    return p;
  }

  std::string name_;
  std::string canonical_;
  std::vector<AbiParam> params_;
  Hash256 topic_{};
  bool annotated_ = false;
  std::optional<std::size_t> voter_, proposal_, support_;
};

/// One log record as returned by `eth_getLogs`.
struct RawLog {
  Address address;
  std::vector<Hash256> topics;
  std::vector<std::uint8_t> data;
  std::uint64_t block_number = 0;
  std::uint64_t log_index = 0;
};

namespace detail {

inline std::vector<std::uint8_t> parse_hex_bytes(std::string_view s) {
  s = strip_0x(s);
  if (s.size() % 2) throw MalformedData("odd-length hex string");
  std::vector<std::uint8_t> out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(s[2 * i]), lo = hex_value(s[2 * i + 1]);
    if (hi < 0 || lo < 0) throw MalformedData("invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return out;
}

inline std::uint64_t parse_hex_quantity(std::string_view s) {
  s = strip_0x(s);
  if (s.empty() || s.size() > 16) throw MalformedData("bad hex quantity");
  std::uint64_t v = 0;
  for (char c : s) {
    int d = hex_value(c);
    if (d < 0) throw MalformedData("bad hex quantity");
    v = v * 16 + static_cast<std::uint64_t>(d);
  }
  return v;
}

inline std::string hex_quantity(std::uint64_t v) {
  std::ostringstream out;
  out << "0x" << std::hex << v;
  return out.str();
}

inline std::string log_id(std::uint64_t block, std::uint64_t index) {
  return "log at block " + std::to_string(block) + " index " + std::to_string(index);
}

/// Reads a 32-byte word as an unsigned integer that must fit in 64 bits.
inline std::optional<std::uint64_t> word_to_u64(const std::uint8_t* word) {
  for (int i = 0; i < 24; ++i)
    if (word[i] != 0) return std::nullopt;
  std::uint64_t v = 0;
  for (int i = 24; i < 32; ++i) v = (v << 8) | word[i];
  return v;
}

inline void put_u64_word(std::uint8_t* word, std::uint64_t v) {
  std::fill(word, word + 32, 0);
  for (int i = 31; i >= 24; --i, v >>= 8) word[i] = static_cast<std::uint8_t>(v & 0xFF);
}

}  // namespace detail

inline RawLog raw_log_from_json(const json& j) {
  RawLog log;
  log.address = Address::parse(j.at("address").get<std::string>());
  for (const auto& t : j.at("topics")) {
    auto bytes = detail::parse_hex_bytes(t.get<std::string>());
    if (bytes.size() != 32) throw MalformedData("topic is not 32 bytes");
    Hash256 h{};
    std::copy(bytes.begin(), bytes.end(), h.begin());
    log.topics.push_back(h);
  }
  log.data = detail::parse_hex_bytes(j.value("data", std::string("0x")));
  log.block_number = detail::parse_hex_quantity(j.at("blockNumber").get<std::string>());
  log.log_index = detail::parse_hex_quantity(j.at("logIndex").get<std::string>());
  return log;
}

inline json raw_log_to_json(const RawLog& log) {
  json topics = json::array();
  for (const auto& t : log.topics) topics.push_back(to_hex(t));
  return json{{"address", log.address.hex()},
              {"topics", topics},
              {"data", to_hex(log.data)},
              {"blockNumber", detail::hex_quantity(log.block_number)},
              {"logIndex", detail::hex_quantity(log.log_index)}};
}

/// Decodes one vote log. The voter is read from its topic when indexed and
/// from the data head otherwise; the same holds for proposal id and support.
inline VoteEvent decode_vote_event(const RawLog& log, const EventSignature& sig) {
  const auto where = detail::log_id(log.block_number, log.log_index);
  if (log.topics.empty() || log.topics.front() != sig.topic())
    throw SignatureMismatch(where + ": first topic does not match " + sig.canonical());

  const auto layout = sig.indexed_layout(log.topics.size());
  const std::size_t n_indexed = static_cast<std::size_t>(std::count(layout.begin(), layout.end(), true));
  if (n_indexed != log.topics.size() - 1)
    throw MalformedData(where + ": topic count does not match indexed parameters");
  std::size_t n_data = sig.params().size() - n_indexed;
  if (log.data.size() < 32 * n_data) throw MalformedData(where + ": data segment too short");

  // Locate each parameter's 32-byte word.
  std::vector<const std::uint8_t*> words(sig.params().size());
  std::size_t topic_pos = 1, head_pos = 0;
  for (std::size_t i = 0; i < sig.params().size(); ++i) {
    if (layout[i]) {
      words[i] = log.topics[topic_pos++].data();
    } else {
      words[i] = log.data.data() + 32 * head_pos++;
      if (sig.params()[i].dynamic()) {
        auto offset = detail::word_to_u64(words[i]);
        if (!offset || *offset % 32 || *offset + 32 > log.data.size())
          throw MalformedData(where + ": dynamic offset out of range");
        auto length = detail::word_to_u64(log.data.data() + *offset);
        std::uint64_t elem = sig.params()[i].type.ends_with("[]") ? 32 : 1;
        if (!length || *length > (log.data.size() - *offset - 32) / elem)
          throw MalformedData(where + ": dynamic length out of range");
      }
    }
  }

  VoteEvent ev;
  const std::uint8_t* voter_word = words[sig.voter_index()];
  for (int i = 0; i < 12; ++i)
    if (voter_word[i] != 0) throw MalformedData(where + ": voter word has dirty high bytes");
  Address::Bytes vb{};
  std::copy(voter_word + 12, voter_word + 32, vb.begin());
  ev.voter = Address(vb);

  auto proposal = detail::word_to_u64(words[sig.proposal_index()]);
  if (!proposal || *proposal == 0) throw MalformedData(where + ": proposal id is zero or exceeds 64 bits");
  ev.proposal_id = *proposal;

  auto support = detail::word_to_u64(words[sig.support_index()]);
  const auto& support_type = sig.params()[sig.support_index()].type;
  if (!support || (support_type == "bool" && *support > 1) || (support_type == "uint8" && *support > 255))
    throw MalformedData(where + ": support value out of range for " + support_type);
  ev.support = static_cast<std::int64_t>(*support);

  ev.block_number = log.block_number;
  ev.log_index = log.log_index;
  return ev;
}

inline VoteEvent decode_vote_event(const RawLog& log, std::string_view signature) {
  return decode_vote_event(log, EventSignature::parse(signature));
}

/// Builds a synthetic log for `ev`: indexed parameters follow the
/// annotations (none without them), other value fields are zero and dynamic fields empty.
inline RawLog encode_vote_event(const VoteEvent& ev, const EventSignature& sig, const Address& contract = {}) {
  std::vector<bool> layout(sig.params().size(), false);
  // Unannotated signatures encode every parameter in data, which the decoder
  // reads back as "no indexed parameters" from the single topic.
  if (sig.annotated())
    for (std::size_t i = 0; i < layout.size(); ++i) layout[i] = sig.params()[i].indexed;
  RawLog log;
  log.address = contract;
  log.block_number = ev.block_number;
  log.log_index = ev.log_index;
  log.topics.push_back(sig.topic());

  auto value_word = [&](std::size_t i) {
    Hash256 w{};
    if (i == sig.voter_index()) std::copy(ev.voter.bytes().begin(), ev.voter.bytes().end(), w.begin() + 12);
    else if (i == sig.proposal_index()) detail::put_u64_word(w.data(), ev.proposal_id);
    else if (i == sig.support_index()) detail::put_u64_word(w.data(), static_cast<std::uint64_t>(ev.support));
    return w;
  };

  std::size_t n_data = 0;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i]) log.topics.push_back(value_word(i));
    else ++n_data;
  }
  std::vector<std::uint8_t> head, tail;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i]) continue;
    Hash256 w{};
    if (sig.params()[i].dynamic()) {
      detail::put_u64_word(w.data(), 32 * n_data + tail.size());
      tail.insert(tail.end(), 32, 0);  // zero length
    } else {
      w = value_word(i);
    }
    head.insert(head.end(), w.begin(), w.end());
  }
  log.data = head;
  log.data.insert(log.data.end(), tail.begin(), tail.end());
  return log;
}

// ---------------------------------------------------------------------------
// Fixtures

struct DuplicateKeyWarning {
  Address voter;
  std::uint64_t proposal_id = 0;
  std::uint64_t superseded_block = 0;
  std::uint64_t superseded_log_index = 0;
};

struct FixtureLoad {
  std::vector<VoteEvent> events;
  std::vector<DuplicateKeyWarning> duplicates;
};

/// Sorts by chain order and collapses duplicate (voter, proposal) pairs,
/// keeping the last occurrence.
inline FixtureLoad normalize_events(std::vector<VoteEvent> events) {
  std::sort(events.begin(), events.end(), chain_order);
  std::map<std::pair<Address, std::uint64_t>, std::size_t> last;
  for (std::size_t i = 0; i < events.size(); ++i) last[{events[i].voter, events[i].proposal_id}] = i;
  FixtureLoad out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (last[{e.voter, e.proposal_id}] == i) out.events.push_back(e);
    else out.duplicates.push_back({e.voter, e.proposal_id, e.block_number, e.log_index});
  }
  return out;
}

inline FixtureLoad parse_fixture(std::istream& in) {
  std::vector<VoteEvent> events;
  std::string line;
  std::size_t line_no = 0;
  auto uint_field = [](const json& obj, const char* key, std::size_t ln) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw ParseError(ln, std::string("field '") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    try {
      if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
      VoteEvent ev;
      auto voter = Address::try_parse(obj.at("voter").get<std::string>());
      if (!voter) throw ParseError(line_no, "invalid voter address");
      ev.voter = *voter;
      ev.proposal_id = uint_field(obj, "proposal_id", line_no);
      if (ev.proposal_id == 0) throw ParseError(line_no, "proposal_id must be >= 1");
      if (!obj.at("support").is_number_integer()) throw ParseError(line_no, "support must be an integer");
      ev.support = obj.at("support").get<std::int64_t>();
      ev.block_number = uint_field(obj, "block_number", line_no);
      ev.log_index = uint_field(obj, "log_index", line_no);
      events.push_back(ev);
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return normalize_events(std::move(events));
}

inline FixtureLoad load_fixture_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open fixture '" + path + "'");
  return parse_fixture(in);
}

inline std::vector<VoteEvent> load_fixture(const std::string& path) { return load_fixture_report(path).events; }

inline json vote_event_to_json(const VoteEvent& e) {
  return json{{"voter", e.voter.hex()},
              {"proposal_id", e.proposal_id},
              {"support", e.support},
              {"block_number", e.block_number},
              {"log_index", e.log_index}};
}

inline void write_fixture(std::ostream& out, const std::vector<VoteEvent>& events) {
  for (const auto& e : events) out << vote_event_to_json(e).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Registry

inline DaoRegistryEntry registry_entry_from_json(const json& j) {
  DaoRegistryEntry e;
  try {
    e.name = j.at("name").get<std::string>();
    e.chain = j.value("chain", std::string("ethereum"));
    e.governance_contract = Address::parse(j.at("governance_contract").get<std::string>());
    e.deploy_block = j.at("deploy_block").get<std::uint64_t>();
    e.end_block = j.at("end_block").get<std::uint64_t>();
    e.event_signatures = j.at("event_signatures").get<std::vector<std::string>>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("registry entry: ") + ex.what());
  }
  if (e.deploy_block > e.end_block) throw ConfigError("registry entry '" + e.name + "': deploy_block > end_block");
  if (e.event_signatures.empty()) throw ConfigError("registry entry '" + e.name + "': no event signatures");
  for (const auto& s : e.event_signatures) EventSignature::parse(s);
  return e;
}

inline json registry_entry_to_json(const DaoRegistryEntry& e) {
  return json{{"name", e.name},
              {"chain", e.chain},
              {"governance_contract", e.governance_contract.hex()},
              {"deploy_block", e.deploy_block},
              {"end_block", e.end_block},
              {"event_signatures", e.event_signatures}};
}

/// Registry document: `{"daos": [ {entry}, ... ]}`.
inline std::vector<DaoRegistryEntry> parse_registry(const json& doc) {
  std::vector<DaoRegistryEntry> out;
  if (!doc.contains("daos") || !doc["daos"].is_array()) throw ConfigError("registry must contain a 'daos' array");
  for (const auto& j : doc["daos"]) out.push_back(registry_entry_from_json(j));
  return out;
}

/// Built-in registry. Only the Nouns governor is pinned; other DAOs are
/// added through a registry file.
inline std::vector<DaoRegistryEntry> bundled_registry() {
  DaoRegistryEntry nouns;
  nouns.name = "nouns";
  nouns.chain = "ethereum";
  nouns.governance_contract = Address::parse("0x6f3E6272A167e8AcCb32072d08E0957F9c79223d");
  nouns.deploy_block = 12985453;
  nouns.end_block = 18144239;  // first fork
  nouns.event_signatures = {"VoteCast(address indexed,uint256,uint8,uint256,string)"};

  DaoRegistryEntry planted;
  planted.name = "planted";
  planted.chain = "synthetic";
  planted.governance_contract = Address::parse("0x00000000000000000000000000000000000000d0");
  planted.deploy_block = 1;
  planted.end_block = 1000000;
  planted.event_signatures = {"VoteCast(address indexed,uint256,uint8,uint256,string)"};
  return {nouns, planted};
}

inline const DaoRegistryEntry* find_registry_entry(const std::vector<DaoRegistryEntry>& reg, const std::string& name) {
  for (const auto& e : reg)
    if (e.name == name) return &e;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Ground truth

inline ForkGroundTruth parse_ground_truth(std::istream& in, std::string label = "fork") {
  ForkGroundTruth gt;
  gt.fork_label = std::move(label);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    auto addr = Address::try_parse(std::string_view(line).substr(b, e - b + 1));
    if (!addr) throw ParseError(line_no, "invalid address '" + line.substr(b, e - b + 1) + "'");
    gt.addresses.insert(*addr);
  }
  if (gt.addresses.empty()) throw EmptySet("ground truth contains no addresses");
  return gt;
}

inline ForkGroundTruth load_ground_truth(const std::string& path, std::string label = "fork") {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth '" + path + "'");
  return parse_ground_truth(in, std::move(label));
}

}  // namespace partisan
