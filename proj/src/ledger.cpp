#include "crowdverify/ledger.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <sstream>

namespace crowdverify {

namespace {

constexpr std::uint8_t kVoteKind = 1;
constexpr std::uint8_t kAttestationKind = 2;
constexpr int kSeverityMin = 1;
constexpr int kSeverityMax = 5;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v)); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v)); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void bytes(ByteView b) {
    u32(static_cast<std::uint32_t>(b.size()));
    out_.insert(out_.end(), b.begin(), b.end());
  }
  void str(std::string_view s) {
    bytes(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }
  void raw(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  Bytes take() { return std::move(out_); }

 private:
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le<std::uint8_t>()); }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(le<std::uint32_t>()); }
  std::int64_t i64() { return static_cast<std::int64_t>(le<std::uint64_t>()); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  Bytes bytes() {
    const std::uint32_t n = u32();
    need(n);
    Bytes b(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return b;
  }
  std::string str() {
    Bytes b = bytes();
    return std::string(b.begin(), b.end());
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw LedgerError(LedgerErrc::malformed_record, "truncated payload");
  }
  template <typename U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }

  ByteView in_;
  std::size_t pos_ = 0;
};

void write_vote_fields(Writer& w, const VoteRecord& v) {
  w.f64(v.claimed_location.x);
  w.f64(v.claimed_location.y);
  w.f64(v.claimed_location.z);
  w.i64(v.timestamp);
  w.str(to_string(v.label));
  w.i32(v.severity);
  w.u64(v.nonce);
  w.bytes(v.author);
}

void write_attestation_fields(Writer& w, const AttestationRecord& a) {
  w.bytes(a.target_vote_id);
  w.str(to_string(a.flag));
  w.str(to_string(a.tier));
  w.bytes(a.verifier);
  w.i64(a.timestamp);
}

Hash256 to_hash(const Bytes& b) {
  if (b.size() != 32) throw LedgerError(LedgerErrc::malformed_record, "hash field must be 32 bytes");
  Hash256 h{};
  std::copy(b.begin(), b.end(), h.begin());
  return h;
}

template <typename Parse>
auto parse_enum(Parse&& parse, const std::string& s) {
  try {
    return parse(s);
  } catch (const std::invalid_argument& e) {
    throw LedgerError(LedgerErrc::malformed_record, e.what());
  }
}

constexpr std::string_view kLabelNames[] = {"medical",  "power",         "access",
                                            "trapped",  "gas_leak",      "comm_blackout",
                                            "suspicious_activity"};

bool finite(const Point3& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

nlohmann::json payload_to_json(const Payload& p) {
  if (const auto* v = std::get_if<VoteRecord>(&p)) {
    return {{"type", "vote"},
            {"vote_id", to_hex(v->vote_id)},
            {"claimed_location", {v->claimed_location.x, v->claimed_location.y, v->claimed_location.z}},
            {"timestamp", v->timestamp},
            {"label", to_string(v->label)},
            {"severity", v->severity},
            {"nonce", v->nonce},
            {"author", to_hex(v->author)},
            {"signature", to_hex(v->signature)}};
  }
  const auto& a = std::get<AttestationRecord>(p);
  return {{"type", "attestation"},
          {"target_vote_id", to_hex(a.target_vote_id)},
          {"flag", to_string(a.flag)},
          {"tier", to_string(a.tier)},
          {"verifier", to_hex(a.verifier)},
          {"timestamp", a.timestamp},
          {"signature", to_hex(a.signature)}};
}

Payload payload_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "vote") {
    VoteRecord v;
    v.vote_id = hash_from_hex(j.at("vote_id").get<std::string>());
    const auto& loc = j.at("claimed_location");
    if (!loc.is_array() || loc.size() != 3) throw std::invalid_argument("claimed_location must be [x,y,z]");
    v.claimed_location = {loc[0].get<double>(), loc[1].get<double>(), loc[2].get<double>()};
    v.timestamp = j.at("timestamp").get<std::int64_t>();
    v.label = parse_label(j.at("label").get<std::string>());
    v.severity = j.at("severity").get<int>();
    v.nonce = j.at("nonce").get<std::uint64_t>();
    v.author = from_hex(j.at("author").get<std::string>());
    v.signature = from_hex(j.at("signature").get<std::string>());
    if (j.size() != 9) throw std::invalid_argument("unexpected keys in vote payload");
    return v;
  }
  if (type == "attestation") {
    AttestationRecord a;
    a.target_vote_id = hash_from_hex(j.at("target_vote_id").get<std::string>());
    a.flag = parse_flag(j.at("flag").get<std::string>());
    a.tier = parse_tier(j.at("tier").get<std::string>());
    a.verifier = from_hex(j.at("verifier").get<std::string>());
    a.timestamp = j.at("timestamp").get<std::int64_t>();
    a.signature = from_hex(j.at("signature").get<std::string>());
    if (j.size() != 7) throw std::invalid_argument("unexpected keys in attestation payload");
    return a;
  }
  throw std::invalid_argument("unknown payload type '" + type + "'");
}

}  // namespace

std::string_view to_string(Role r) {
  switch (r) {
    case Role::user: return "user";
    case Role::verifier: return "verifier";
    case Role::agency: return "agency";
  }
  return "?";
}

std::string_view to_string(SemanticLabel l) { return kLabelNames[static_cast<std::size_t>(l)]; }

std::string_view to_string(Flag f) {
  switch (f) {
    case Flag::verified: return "verified";
    case Flag::unverified: return "unverified";
    case Flag::unknown: return "unknown";
  }
  return "?";
}

std::string_view to_string(Tier t) { return t == Tier::optical ? "optical" : "rf"; }

Role parse_role(std::string_view s) {
  if (s == "user") return Role::user;
  if (s == "verifier") return Role::verifier;
  if (s == "agency") return Role::agency;
  throw std::invalid_argument("unknown role '" + std::string(s) + "'");
}

SemanticLabel parse_label(std::string_view s) {
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (kLabelNames[i] == s) return static_cast<SemanticLabel>(i);
  }
  throw std::invalid_argument("unknown semantic label '" + std::string(s) + "'");
}

Flag parse_flag(std::string_view s) {
  if (s == "verified") return Flag::verified;
  if (s == "unverified") return Flag::unverified;
  if (s == "unknown") return Flag::unknown;
  throw std::invalid_argument("unknown flag '" + std::string(s) + "'");
}

Tier parse_tier(std::string_view s) {
  if (s == "optical") return Tier::optical;
  if (s == "rf") return Tier::rf;
  throw std::invalid_argument("unknown tier '" + std::string(s) + "'");
}

std::string_view to_string(LedgerErrc e) {
  switch (e) {
    case LedgerErrc::bad_signature: return "bad-signature";
    case LedgerErrc::replayed_nonce: return "replayed-nonce";
    case LedgerErrc::stale_timestamp: return "stale-timestamp";
    case LedgerErrc::malformed_record: return "malformed-record";
    case LedgerErrc::unknown_vote: return "unknown-vote";
    case LedgerErrc::wrong_role: return "wrong-role";
  }
  return "?";
}

LedgerError::LedgerError(LedgerErrc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

Bytes vote_signing_bytes(const VoteRecord& v) {
  Writer w;
  w.u8(kVoteKind);
  write_vote_fields(w, v);
  return w.take();
}

Bytes attestation_signing_bytes(const AttestationRecord& a) {
  Writer w;
  w.u8(kAttestationKind);
  write_attestation_fields(w, a);
  return w.take();
}

Bytes canonical_payload(const Payload& p) {
  Writer w;
  if (const auto* v = std::get_if<VoteRecord>(&p)) {
    w.u8(kVoteKind);
    w.bytes(v->vote_id);
    write_vote_fields(w, *v);
    w.bytes(v->signature);
  } else {
    const auto& a = std::get<AttestationRecord>(p);
    w.u8(kAttestationKind);
    write_attestation_fields(w, a);
    w.bytes(a.signature);
  }
  return w.take();
}

Payload decode_payload(ByteView bytes) {
  Reader r(bytes);
  const std::uint8_t kind = r.u8();
  Payload out;
  if (kind == kVoteKind) {
    VoteRecord v;
    v.vote_id = to_hash(r.bytes());
    v.claimed_location.x = r.f64();
    v.claimed_location.y = r.f64();
    v.claimed_location.z = r.f64();
    v.timestamp = r.i64();
    v.label = parse_enum(parse_label, r.str());
    v.severity = r.i32();
    v.nonce = r.u64();
    v.author = r.bytes();
    v.signature = r.bytes();
    out = std::move(v);
  } else if (kind == kAttestationKind) {
    AttestationRecord a;
    a.target_vote_id = to_hash(r.bytes());
    a.flag = parse_enum(parse_flag, r.str());
    a.tier = parse_enum(parse_tier, r.str());
    a.verifier = r.bytes();
    a.timestamp = r.i64();
    a.signature = r.bytes();
    out = std::move(a);
  } else {
    throw LedgerError(LedgerErrc::malformed_record, "unknown payload kind " + std::to_string(kind));
  }
  if (!r.done()) throw LedgerError(LedgerErrc::malformed_record, "trailing bytes after payload");
  return out;
}

Hash256 compute_vote_id(const VoteRecord& v) { return sha256(vote_signing_bytes(v)); }

VoteRecord make_vote(const SignatureScheme& scheme, const KeyPair& author, const Point3& claimed,
                     std::int64_t timestamp, SemanticLabel label, int severity, std::uint64_t nonce) {
  VoteRecord v;
  v.claimed_location = claimed;
  v.timestamp = timestamp;
  v.label = label;
  v.severity = severity;
  v.nonce = nonce;
  v.author = author.public_key;
  const Bytes msg = vote_signing_bytes(v);
  v.vote_id = sha256(msg);
  v.signature = scheme.sign(author, msg);
  return v;
}

AttestationRecord make_attestation(const SignatureScheme& scheme, const KeyPair& verifier, const Hash256& vote_id,
                                   Flag flag, Tier tier, std::int64_t timestamp) {
  AttestationRecord a;
  a.target_vote_id = vote_id;
  a.flag = flag;
  a.tier = tier;
  a.verifier = verifier.public_key;
  a.timestamp = timestamp;
  a.signature = scheme.sign(verifier, attestation_signing_bytes(a));
  return a;
}

bool verify_vote_signature(const SignatureScheme& scheme, const VoteRecord& v) {
  return scheme.verify(v.author, vote_signing_bytes(v), v.signature);
}

bool verify_attestation_signature(const SignatureScheme& scheme, const AttestationRecord& a) {
  return scheme.verify(a.verifier, attestation_signing_bytes(a), a.signature);
}

Hash256 compute_entry_hash(const Hash256& prev_hash, ByteView payload) {
  Bytes buf;
  buf.reserve(prev_hash.size() + payload.size());
  buf.insert(buf.end(), prev_hash.begin(), prev_hash.end());
  buf.insert(buf.end(), payload.begin(), payload.end());
  return sha256(buf);
}

Ledger::Ledger(const SignatureScheme& scheme, LedgerConfig config) : scheme_(scheme), config_(config) {}

void Ledger::register_identity(const Identity& id) {
  if (id.public_key.empty()) throw std::invalid_argument("identity public key must be non-empty");
  std::unique_lock lock(mutex_);
  if (!identities_.emplace(id.public_key, id.role).second) {
    throw std::invalid_argument("identity already registered: " + to_hex(id.public_key));
  }
}

std::optional<Role> Ledger::role_of(ByteView public_key) const {
  std::shared_lock lock(mutex_);
  auto it = identities_.find(Bytes(public_key.begin(), public_key.end()));
  if (it == identities_.end()) return std::nullopt;
  return it->second;
}

void Ledger::set_clock(std::int64_t now_ms) {
  std::unique_lock lock(mutex_);
  clock_ms_ = now_ms;
}

std::int64_t Ledger::clock() const {
  std::shared_lock lock(mutex_);
  return clock_ms_;
}

std::uint64_t Ledger::append(Payload payload) {
  LedgerEntry e;
  e.index = entries_.size();
  e.prev_hash = entries_.empty() ? Hash256{} : entries_.back().entry_hash;
  e.payload = canonical_payload(payload);
  e.entry_hash = compute_entry_hash(e.prev_hash, e.payload);
  entries_.push_back(std::move(e));
  decoded_.push_back(std::move(payload));
  return entries_.back().index;
}

std::uint64_t Ledger::submit_vote(const VoteRecord& vote) {
  if (vote.author.empty()) throw LedgerError(LedgerErrc::malformed_record, "vote has no author key");
  if (vote.signature.empty()) throw LedgerError(LedgerErrc::malformed_record, "vote is unsigned");
  if (vote.severity < kSeverityMin || vote.severity > kSeverityMax) {
    throw LedgerError(LedgerErrc::malformed_record, "severity " + std::to_string(vote.severity) + " outside 1..5");
  }
  if (!finite(vote.claimed_location)) throw LedgerError(LedgerErrc::malformed_record, "non-finite location");
  if (vote.vote_id != compute_vote_id(vote)) {
    throw LedgerError(LedgerErrc::malformed_record, "vote_id does not match content");
  }
  if (!verify_vote_signature(scheme_, vote)) {
    throw LedgerError(LedgerErrc::bad_signature, "vote " + to_hex(vote.vote_id));
  }

  std::unique_lock lock(mutex_);
  if (used_nonces_.count({vote.author, vote.nonce}) != 0) {
    throw LedgerError(LedgerErrc::replayed_nonce, "nonce " + std::to_string(vote.nonce) + " already used by author");
  }
  const std::int64_t skew = vote.timestamp > clock_ms_ ? vote.timestamp - clock_ms_ : clock_ms_ - vote.timestamp;
  if (skew > config_.freshness_window_ms || skew < 0) {
    throw LedgerError(LedgerErrc::stale_timestamp,
                      "timestamp " + std::to_string(vote.timestamp) + " outside freshness window");
  }
  used_nonces_.emplace(vote.author, vote.nonce);
  const std::uint64_t idx = append(vote);
  vote_index_.emplace(vote.vote_id, idx);
  return idx;
}

std::uint64_t Ledger::submit_attestation(const AttestationRecord& att) {
  if (att.verifier.empty()) throw LedgerError(LedgerErrc::malformed_record, "attestation has no verifier key");
  {
    std::shared_lock lock(mutex_);
    auto it = identities_.find(att.verifier);
    if (it == identities_.end() || it->second != Role::verifier) {
      throw LedgerError(LedgerErrc::wrong_role, "key " + to_hex(att.verifier) + " is not a registered verifier");
    }
  }
  if (!verify_attestation_signature(scheme_, att)) {
    throw LedgerError(LedgerErrc::bad_signature, "attestation for vote " + to_hex(att.target_vote_id));
  }
  std::unique_lock lock(mutex_);
  if (vote_index_.count(att.target_vote_id) == 0) {
    throw LedgerError(LedgerErrc::unknown_vote, "vote " + to_hex(att.target_vote_id) + " is not on the ledger");
  }
  const std::uint64_t idx = append(att);
  attestations_of_[att.target_vote_id].push_back(idx);
  return idx;
}

std::size_t Ledger::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<LedgerEntry> Ledger::entries() const {
  std::shared_lock lock(mutex_);
  return entries_;
}

bool Ledger::has_vote(const Hash256& vote_id) const {
  std::shared_lock lock(mutex_);
  return vote_index_.count(vote_id) != 0;
}

std::vector<VoteView> Ledger::query_votes(const Rect& region, const TimeWindow& window) const {
  std::shared_lock lock(mutex_);
  std::vector<VoteView> out;
  for (const auto& [id, idx] : vote_index_) {
    const auto& v = std::get<VoteRecord>(decoded_[idx]);
    if (!region.contains(Point2{v.claimed_location.x, v.claimed_location.y})) continue;
    if (v.timestamp < window.from || v.timestamp > window.to) continue;
    VoteView view{idx, v, {}};
    if (auto it = attestations_of_.find(id); it != attestations_of_.end()) {
      for (std::uint64_t a : it->second) view.attestations.push_back(std::get<AttestationRecord>(decoded_[a]));
    }
    out.push_back(std::move(view));
  }
  std::sort(out.begin(), out.end(), [](const VoteView& a, const VoteView& b) { return a.index < b.index; });
  return out;
}

VerifyResult verify_chain(std::span<const LedgerEntry> entries) {
  Hash256 prev{};
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.index != i || e.prev_hash != prev || e.entry_hash != compute_entry_hash(e.prev_hash, e.payload)) {
      return VerifyResult::corrupt_at(i);
    }
    try {
      if (canonical_payload(decode_payload(e.payload)) != e.payload) return VerifyResult::corrupt_at(i);
    } catch (const LedgerError&) {
      return VerifyResult::corrupt_at(i);
    }
    prev = e.entry_hash;
  }
  return VerifyResult::good();
}

VerifyResult verify_chain(const Ledger& ledger) {
  const auto entries = ledger.entries();
  return verify_chain(entries);
}

std::vector<VoteView> collect_votes(std::span<const LedgerEntry> entries, const Rect* region,
                                    const TimeWindow& window) {
  std::vector<VoteView> out;
  std::map<Hash256, std::size_t> position;
  for (const auto& e : entries) {
    Payload p = e.decoded();
    if (auto* v = std::get_if<VoteRecord>(&p)) {
      if (region && !region->contains(Point2{v->claimed_location.x, v->claimed_location.y})) continue;
      if (v->timestamp < window.from || v->timestamp > window.to) continue;
      position.emplace(v->vote_id, out.size());
      out.push_back(VoteView{e.index, std::move(*v), {}});
    } else {
      auto& a = std::get<AttestationRecord>(p);
      if (auto it = position.find(a.target_vote_id); it != position.end()) {
        out[it->second].attestations.push_back(std::move(a));
      }
    }
  }
  return out;
}

Bytes serialize_ledger(std::span<const LedgerEntry> entries) {
  Writer w;
  for (const auto& e : entries) {
    w.u64(e.index);
    w.raw(e.prev_hash);
    w.bytes(e.payload);
    w.raw(e.entry_hash);
  }
  return w.take();
}

ParsedLedger deserialize_ledger(ByteView bytes) {
  ParsedLedger out;
  Reader r(bytes);
  while (!r.done()) {
    try {
      LedgerEntry e;
      e.index = r.u64();
      for (auto& b : e.prev_hash) b = r.u8();
      e.payload = r.bytes();
      for (auto& b : e.entry_hash) b = r.u8();
      out.entries.push_back(std::move(e));
    } catch (const LedgerError&) {
      out.failed_at = out.entries.size();
      break;
    }
  }
  return out;
}

namespace {

VerifyResult merge_parse_failure(VerifyResult chain, std::optional<std::uint64_t> failed_at) {
  if (!failed_at) return chain;
  if (chain.ok || chain.corrupt_index > *failed_at) return VerifyResult::corrupt_at(*failed_at);
  return chain;
}

}  // namespace

VerifyResult verify_serialized(ByteView bytes) {
  auto parsed = deserialize_ledger(bytes);
  return merge_parse_failure(verify_chain(parsed.entries), parsed.failed_at);
}

nlohmann::json entry_to_json(const LedgerEntry& e) {
  return {{"index", e.index},
          {"prev_hash", to_hex(e.prev_hash)},
          {"payload", payload_to_json(e.decoded())},
          {"entry_hash", to_hex(e.entry_hash)}};
}

LedgerEntry entry_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.size() != 4) throw std::invalid_argument("ledger entry must have exactly 4 keys");
  LedgerEntry e;
  e.index = j.at("index").get<std::uint64_t>();
  e.prev_hash = hash_from_hex(j.at("prev_hash").get<std::string>());
  e.payload = canonical_payload(payload_from_json(j.at("payload")));
  e.entry_hash = hash_from_hex(j.at("entry_hash").get<std::string>());
  return e;
}

std::string to_ndjson(std::span<const LedgerEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    out += entry_to_json(e).dump();
    out += '\n';
  }
  return out;
}

ParsedNdjson parse_ndjson(std::string_view text) {
  ParsedNdjson out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty() || line == "\r") continue;
    try {
      out.entries.push_back(entry_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception&) {
      out.failed_at = out.entries.size();
      break;
    }
  }
  return out;
}

VerifyResult verify_ndjson(std::string_view text) {
  auto parsed = parse_ndjson(text);
  return merge_parse_failure(verify_chain(parsed.entries), parsed.failed_at);
}

}  // namespace crowdverify
