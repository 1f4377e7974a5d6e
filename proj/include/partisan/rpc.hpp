#pragma once

// eth_getLogs client. Transport is pluggable: the CLI supplies an HTTPS
// transport, tests use ReplayTransport over a recorded trace.

#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "partisan/ingest.hpp"

namespace partisan {

class Transport {
 public:
  virtual ~Transport() = default;
  /// Performs one JSON-RPC call and returns its `result`. Implementations
  /// throw TransportError for retryable failures and RangeTooLarge when the
  /// provider rejects a block range.
  virtual json call(const std::string& method, const json& params) = 0;
};

/// Maps a JSON-RPC `error` object to the library's error types.
[[noreturn]] inline void throw_rpc_error(const json& error) {
  const auto code = error.value("code", 0);
  auto message = error.value("message", std::string());
  std::string lower = message;
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (code == -32005 || lower.find("range") != std::string::npos || lower.find("limit") != std::string::npos ||
      lower.find("too many") != std::string::npos)
    throw RangeTooLarge("provider rejected range: " + message);
  throw TransportError("rpc error " + std::to_string(code) + ": " + message);
}

struct BlockRange {
  std::uint64_t from = 0;
  std::uint64_t to = 0;
};

struct FetchOptions {
  std::uint64_t chunk_size = 2000;
  int max_retries = 4;
  std::chrono::milliseconds backoff{250};
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

namespace detail {

inline json get_logs_with_retry(Transport& transport, const json& filter, const FetchOptions& opt) {
  for (int attempt = 0;; ++attempt) {
    try {
      return transport.call("eth_getLogs", json::array({filter}));
    } catch (const TransportError&) {
      if (attempt >= opt.max_retries) throw;
      opt.sleep(opt.backoff * (1 << attempt));
    }
  }
}

inline void fetch_range(Transport& transport, const DaoRegistryEntry& entry, const json& topic_filter,
                        std::uint64_t lo, std::uint64_t hi, const FetchOptions& opt, std::vector<RawLog>& out) {
  json filter{{"address", entry.governance_contract.hex()},
              {"fromBlock", hex_quantity(lo)},
              {"toBlock", hex_quantity(hi)},
              {"topics", json::array({topic_filter})}};
  json result;
  try {
    result = get_logs_with_retry(transport, filter, opt);
  } catch (const RangeTooLarge&) {
    if (lo == hi) throw;
    std::uint64_t mid = lo + (hi - lo) / 2;
    fetch_range(transport, entry, topic_filter, lo, mid, opt, out);
    fetch_range(transport, entry, topic_filter, mid + 1, hi, opt, out);
    return;
  }
  if (!result.is_array()) throw TransportError("eth_getLogs result is not an array");
  for (const auto& j : result) out.push_back(raw_log_from_json(j));
}

}  // namespace detail

/// Fetches and decodes every vote log of `entry` in `range` (inclusive),
/// chunked by `opt.chunk_size` blocks. Ranges the provider rejects are
/// bisected. The result is in chain order and does not depend on the
/// chunk size.
inline std::vector<VoteEvent> fetch_logs(Transport& transport, const DaoRegistryEntry& entry, BlockRange range,
                                         const FetchOptions& opt = {}) {
  if (range.from > range.to) throw PreconditionError("block range start exceeds end");
  if (range.from < entry.deploy_block || range.to > entry.end_block)
    throw PreconditionError("block range outside [deploy_block, end_block] of '" + entry.name + "'");
  if (opt.chunk_size == 0) throw PreconditionError("chunk size must be positive");

  std::map<Hash256, EventSignature> by_topic;
  json topic_filter = json::array();
  for (const auto& s : entry.event_signatures) {
    auto sig = EventSignature::parse(s);
    topic_filter.push_back(to_hex(sig.topic()));
    by_topic.emplace(sig.topic(), sig);
  }

  std::vector<RawLog> logs;
  for (std::uint64_t lo = range.from;; lo += opt.chunk_size) {
    std::uint64_t hi = range.to - lo < opt.chunk_size - 1 ? range.to : lo + opt.chunk_size - 1;
    detail::fetch_range(transport, entry, topic_filter, lo, hi, opt, logs);
    if (hi == range.to) break;
  }

  std::vector<VoteEvent> events;
  events.reserve(logs.size());
  for (const auto& log : logs) {
    if (log.address != entry.governance_contract || log.topics.empty()) continue;
    auto it = by_topic.find(log.topics.front());
    if (it == by_topic.end()) continue;
    events.push_back(decode_vote_event(log, it->second));
  }
  std::sort(events.begin(), events.end(), chain_order);
  return events;
}

/// Answers eth_getLogs from a recorded list of logs (RPC JSON form).
/// Optionally rejects queries returning more than `max_results` logs and
/// fails the first `transient_failures` calls, to exercise bisection and
/// retry paths.
class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(json trace, std::size_t max_results = 0, int transient_failures = 0)
      : trace_(std::move(trace)), max_results_(max_results), failures_left_(transient_failures) {}

  json call(const std::string& method, const json& params) override {
    ++calls_;
    if (failures_left_ > 0) {
      --failures_left_;
      throw TransportError("simulated transient failure");
    }
    if (method != "eth_getLogs") throw TransportError("unsupported method " + method);
    const auto& f = params.at(0);
    auto from = detail::parse_hex_quantity(f.at("fromBlock").get<std::string>());
    auto to = detail::parse_hex_quantity(f.at("toBlock").get<std::string>());
    auto address = Address::parse(f.at("address").get<std::string>());
    std::vector<std::string> topics;
    if (f.contains("topics") && !f["topics"].empty()) topics = f["topics"][0].get<std::vector<std::string>>();

    json out = json::array();
    for (const auto& log : trace_) {
      auto block = detail::parse_hex_quantity(log.at("blockNumber").get<std::string>());
      if (block < from || block > to) continue;
      if (Address::parse(log.at("address").get<std::string>()) != address) continue;
      auto t0 = log.at("topics").at(0).get<std::string>();
      if (!topics.empty() && std::find(topics.begin(), topics.end(), t0) == topics.end()) continue;
      out.push_back(log);
    }
    if (max_results_ && out.size() > max_results_)
      throw_rpc_error(json{{"code", -32005}, {"message", "query returned more than limit results"}});
    return out;
  }

  int calls() const { return calls_; }

 private:
  json trace_;
  std::size_t max_results_;
  int failures_left_;
  int calls_ = 0;
};

}  // namespace partisan
