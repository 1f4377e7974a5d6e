#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "partisan/ingest.hpp"
#include "partisan/rng.hpp"
#include "test_util.hpp"

using namespace partisan;

namespace {

constexpr const char* kBravo = "VoteCast(address,uint256,uint8,uint256,string)";
constexpr const char* kAlpha = "VoteCast(address,uint256,bool,uint256)";

Hash256 hash_from_hex(const std::string& hex) {
  auto bytes = detail::parse_hex_bytes(hex);
  Hash256 h{};
  std::copy(bytes.begin(), bytes.end(), h.begin());
  return h;
}

}  // namespace

// Reference digests computed with pycryptodome's Keccak-256.
TEST(Keccak, KnownDigests) {
  EXPECT_EQ(to_hex(keccak256("")), "0xc5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
  EXPECT_EQ(to_hex(keccak256("abc")), "0x4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
  EXPECT_EQ(to_hex(keccak256(kBravo)), "0xb8e138887d0aa13bab447e82de9d5c1777041ecd21ca36ba824ff1e6c07ddda4");
  EXPECT_EQ(to_hex(keccak256(kAlpha)), "0x877856338e13f63d0c36822ff0ef736b80934cd90574a3a5bc9262c39d217c46");
}

TEST(Keccak, RateBoundaries) {
  EXPECT_EQ(to_hex(keccak256(std::string(135, 'a'))),
            "0x34367dc248bbd832f4e3e69dfaac2f92638bd0bbd18f2912ba4ef454919cf446");
  EXPECT_EQ(to_hex(keccak256(std::string(136, 'a'))),
            "0xa6c4d403279fe3e0af03729caada8374b5ca54d8065329a3ebcaeb4b60aa386e");
  EXPECT_EQ(to_hex(keccak256(std::string(137, 'a'))),
            "0xd869f639c7046b4929fc92a4d988a8b22c55fbadb802c0c66ebcd484f1915f39");
  EXPECT_EQ(to_hex(keccak256(std::string(300, 'a'))),
            "0x5b7e0e47a96f32a88b4f14ca177982790807c40e1a105742ba0fc1babe1ef826");
}

TEST(Address, ParsingIsCaseInsensitive) {
  auto a = Address::parse("0x6f3E6272A167e8AcCb32072d08E0957F9c79223d");
  EXPECT_EQ(a.hex(), "0x6f3e6272a167e8accb32072d08e0957f9c79223d");
  EXPECT_EQ(a, Address::parse("6F3E6272A167E8ACCB32072D08E0957F9C79223D"));
  EXPECT_FALSE(Address::try_parse("0x1234"));
  EXPECT_FALSE(Address::try_parse("0xzz3E6272A167e8AcCb32072d08E0957F9c79223d"));
}

TEST(EventSignature, CanonicalFormStripsAnnotations) {
  auto sig = EventSignature::parse("VoteCast(address indexed voter, uint proposalId, uint8 support, uint256 votes, string reason)");
  EXPECT_EQ(sig.canonical(), kBravo);
  EXPECT_TRUE(sig.annotated());
  EXPECT_EQ(to_hex(sig.topic()), "0xb8e138887d0aa13bab447e82de9d5c1777041ecd21ca36ba824ff1e6c07ddda4");
  EXPECT_EQ(sig.voter_index(), 0u);
  EXPECT_EQ(sig.proposal_index(), 1u);
  EXPECT_EQ(sig.support_index(), 2u);
}

TEST(EventSignature, RejectsUnusableSignatures) {
  EXPECT_THROW(EventSignature::parse("VoteCast"), MalformedData);
  EXPECT_THROW(EventSignature::parse("Transfer(address,address,uint256)"), MalformedData);
  EXPECT_THROW(EventSignature::parse("VoteCast(address,uint256,uint8,tuple)"), MalformedData);
}

// Hand ABI encoding: voter 0xaa..aa indexed; data = (7, 1, 3, offset 0x80, "ok").
TEST(DecodeVoteEvent, HandEncodedBravoLog) {
  RawLog log;
  log.address = Address::parse("0x6f3E6272A167e8AcCb32072d08E0957F9c79223d");
  log.topics = {hash_from_hex("b8e138887d0aa13bab447e82de9d5c1777041ecd21ca36ba824ff1e6c07ddda4"),
                hash_from_hex("000000000000000000000000aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa")};
  log.data = detail::parse_hex_bytes(
      "0000000000000000000000000000000000000000000000000000000000000007"
      "0000000000000000000000000000000000000000000000000000000000000001"
      "0000000000000000000000000000000000000000000000000000000000000003"
      "0000000000000000000000000000000000000000000000000000000000000080"
      "0000000000000000000000000000000000000000000000000000000000000002"
      "6f6b000000000000000000000000000000000000000000000000000000000000");
  log.block_number = 12985460;
  log.log_index = 4;
  auto ev = decode_vote_event(log, kBravo);
  EXPECT_EQ(ev.voter.hex(), "0xaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa");
  EXPECT_EQ(ev.proposal_id, 7u);
  EXPECT_EQ(ev.support, 1);
  EXPECT_EQ(ev.block_number, 12985460u);
  EXPECT_EQ(ev.log_index, 4u);

  // Same log through the JSON-RPC representation.
  EXPECT_EQ(decode_vote_event(raw_log_from_json(raw_log_to_json(log)), kBravo), ev);
}

TEST(DecodeVoteEvent, TopicMismatch) {
  auto sig = EventSignature::parse(kBravo);
  auto log = encode_vote_event({testutil::addr(1), 3, 1, 10, 0}, sig);
  log.topics[0][5] ^= 0xFF;
  try {
    decode_vote_event(log, sig);
    FAIL();
  } catch (const SignatureMismatch& e) {
    EXPECT_NE(std::string(e.what()).find("block 10 index 0"), std::string::npos);
  }
}

TEST(DecodeVoteEvent, MalformedData) {
  auto sig = EventSignature::parse("VoteCast(address indexed,uint256,uint8,uint256,string)");
  auto good = encode_vote_event({testutil::addr(1), 3, 1, 10, 2}, sig);

  auto short_log = good;
  short_log.data.resize(64);
  EXPECT_THROW(decode_vote_event(short_log, sig), MalformedData);

  auto bad_offset = good;
  bad_offset.data[3 * 32 + 31] = 0xF0;  // string offset past the end
  EXPECT_THROW(decode_vote_event(bad_offset, sig), MalformedData);

  auto dirty_voter = good;
  dirty_voter.topics[1][0] = 1;
  EXPECT_THROW(decode_vote_event(dirty_voter, sig), MalformedData);

  auto zero_proposal = encode_vote_event({testutil::addr(1), 3, 1, 10, 2}, sig);
  std::fill(zero_proposal.data.begin(), zero_proposal.data.begin() + 32, 0);
  EXPECT_THROW(decode_vote_event(zero_proposal, sig), MalformedData);
}

TEST(DecodeVoteEvent, UnindexedVoterInData) {
  auto sig = EventSignature::parse(kAlpha);
  VoteEvent ev{testutil::addr(9, 0x11), 42, 0, 5, 1};
  auto log = encode_vote_event(ev, sig);
  EXPECT_EQ(log.topics.size(), 1u);
  EXPECT_EQ(log.data.size(), 4u * 32);
  EXPECT_EQ(decode_vote_event(log, sig), ev);
}

TEST(DecodeVoteEvent, RoundTripProperty) {
  Rng rng(7);
  for (const char* text : {kBravo, kAlpha, "VoteCast(address indexed,uint256,uint8,uint256,string)"}) {
    auto sig = EventSignature::parse(text);
    const bool boolean = sig.params()[sig.support_index()].type == "bool";
    for (int t = 0; t < 200; ++t) {
      Address::Bytes b{};
      for (auto& x : b) x = static_cast<std::uint8_t>(rng.below(256));
      VoteEvent ev{Address(b), 1 + rng.below(1u << 30), static_cast<std::int64_t>(rng.below(boolean ? 2 : 256)),
                   rng.below(std::uint64_t{1} << 40), rng.below(1000)};
      ASSERT_EQ(decode_vote_event(encode_vote_event(ev, sig), sig), ev);
    }
  }
}

TEST(Registry, BundledNounsEntry) {
  auto reg = bundled_registry();
  const auto* nouns = find_registry_entry(reg, "nouns");
  ASSERT_NE(nouns, nullptr);
  EXPECT_EQ(nouns->governance_contract.hex(), "0x6f3e6272a167e8accb32072d08e0957f9c79223d");
  EXPECT_EQ(nouns->deploy_block, 12985453u);
  EXPECT_EQ(nouns->end_block, 18144239u);
  EXPECT_EQ(EventSignature::parse(nouns->event_signatures.front()).canonical(), kBravo);
}

TEST(Registry, DocumentRoundTripAndValidation) {
  auto reg = bundled_registry();
  json doc{{"daos", json::array()}};
  for (const auto& e : reg) doc["daos"].push_back(registry_entry_to_json(e));
  auto back = parse_registry(doc);
  ASSERT_EQ(back.size(), reg.size());
  EXPECT_EQ(back[0].deploy_block, reg[0].deploy_block);
  EXPECT_EQ(back[0].event_signatures, reg[0].event_signatures);

  auto bad = doc;
  bad["daos"][0]["deploy_block"] = 20000000;
  EXPECT_THROW(parse_registry(bad), ConfigError);
  bad = doc;
  bad["daos"][0]["event_signatures"] = json::array();
  EXPECT_THROW(parse_registry(bad), ConfigError);
  EXPECT_THROW(parse_registry(json::object()), ConfigError);
}

TEST(Fixture, EmptyFile) {
  std::istringstream in("");
  auto load = parse_fixture(in);
  EXPECT_TRUE(load.events.empty());
  EXPECT_TRUE(load.duplicates.empty());
}

TEST(Fixture, DuplicateKeepsLastInChainOrder) {
  const std::string a = "0x00000000000000000000000000000000000000a1";
  const std::string b = "0x00000000000000000000000000000000000000b2";
  // Line order differs from chain order: the block-30 vote is the last write.
  std::istringstream in(
      "{\"voter\":\"" + a + "\",\"proposal_id\":1,\"support\":0,\"block_number\":30,\"log_index\":0}\n" +
      "{\"voter\":\"" + b + "\",\"proposal_id\":1,\"support\":1,\"block_number\":20,\"log_index\":5,\"extra\":true}\n" +
      "{\"voter\":\"" + a.substr(0, 2) + "00000000000000000000000000000000000000A1" +
      "\",\"proposal_id\":1,\"support\":1,\"block_number\":10,\"log_index\":0}\n");
  auto load = parse_fixture(in);
  ASSERT_EQ(load.events.size(), 2u);
  EXPECT_EQ(load.events[0].voter.hex(), b);
  EXPECT_EQ(load.events[1].voter.hex(), a);
  EXPECT_EQ(load.events[1].support, 0);
  ASSERT_EQ(load.duplicates.size(), 1u);
  EXPECT_EQ(load.duplicates[0].superseded_block, 10u);
}

TEST(Fixture, ParseErrorsCarryLineNumbers) {
  std::istringstream in(
      "{\"voter\":\"0x00000000000000000000000000000000000000a1\",\"proposal_id\":1,\"support\":0,\"block_number\":3,\"log_index\":0}\n"
      "\n"
      "{\"voter\":\"0x00000000000000000000000000000000000000a1\",\"proposal_id\":0,\"support\":0,\"block_number\":3,\"log_index\":0}\n");
  try {
    parse_fixture(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream garbage("not json\n");
  EXPECT_THROW(parse_fixture(garbage), ParseError);
  std::istringstream missing("{\"voter\":\"0x00000000000000000000000000000000000000a1\"}\n");
  EXPECT_THROW(parse_fixture(missing), ParseError);
}

TEST(Fixture, OrderIndependenceProperty) {
  Rng rng(3);
  std::vector<VoteEvent> events;
  for (int i = 0; i < 80; ++i)
    events.push_back({testutil::addr(static_cast<int>(rng.below(6))), 1 + rng.below(5),
                      static_cast<std::int64_t>(rng.below(3)), rng.below(20), rng.below(4)});
  std::ostringstream out;
  write_fixture(out, events);
  std::vector<std::string> lines;
  std::istringstream split(out.str());
  for (std::string l; std::getline(split, l);) lines.push_back(l);

  std::string first;
  std::mt19937 perm(11);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(lines.begin(), lines.end(), perm);
    std::string joined;
    for (const auto& l : lines) joined += l + "\n";
    std::istringstream in(joined);
    std::ostringstream norm;
    write_fixture(norm, parse_fixture(in).events);
    if (t == 0) first = norm.str();
    ASSERT_EQ(norm.str(), first);
  }
}

TEST(GroundTruth, FifteenAddresses) {
  std::ostringstream text;
  for (int i = 0; i < 15; ++i) text << testutil::addr(i, 0x42).hex() << "\n";
  std::istringstream in(text.str());
  EXPECT_EQ(parse_ground_truth(in).addresses.size(), 15u);
}

TEST(GroundTruth, CaseNormalizedCommentsAndBlanks) {
  std::istringstream in(
      "# fork participants\n"
      "\n"
      "0x6f3E6272A167e8AcCb32072d08E0957F9c79223d   # mixed case\n"
      "  0x6F3E6272A167E8ACCB32072D08E0957F9C79223D\n"
      "0x00000000000000000000000000000000000000a1\n");
  auto gt = parse_ground_truth(in, "fork-1");
  EXPECT_EQ(gt.fork_label, "fork-1");
  EXPECT_EQ(gt.addresses.size(), 2u);
  EXPECT_TRUE(gt.contains(Address::parse("0x6f3e6272a167e8accb32072d08e0957f9c79223d")));
}

TEST(GroundTruth, Errors) {
  std::istringstream bad("0x00000000000000000000000000000000000000a1\nnot-an-address\n");
  try {
    parse_ground_truth(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream empty("# nothing\n\n");
  EXPECT_THROW(parse_ground_truth(empty), EmptySet);
  EXPECT_THROW(load_ground_truth("/nonexistent/path"), IoError);
}
