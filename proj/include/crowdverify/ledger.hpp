#pragma once

// Append-only hash-chained ledger of signed votes and verifier attestations.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "crowdverify/crypto.hpp"
#include "crowdverify/geometry.hpp"

namespace crowdverify {

enum class Role { user, verifier, agency };

struct Identity {
  Bytes public_key;
  Role role = Role::user;
};

enum class SemanticLabel { medical, power, access, trapped, gas_leak, comm_blackout, suspicious_activity };
inline constexpr std::size_t kLabelCount = 7;
inline constexpr SemanticLabel kAllLabels[kLabelCount] = {
    SemanticLabel::medical,       SemanticLabel::power,         SemanticLabel::access,
    SemanticLabel::trapped,       SemanticLabel::gas_leak,      SemanticLabel::comm_blackout,
    SemanticLabel::suspicious_activity};

enum class Flag { verified, unverified, unknown };
enum class Tier { optical, rf };

std::string_view to_string(Role r);
std::string_view to_string(SemanticLabel l);
std::string_view to_string(Flag f);
std::string_view to_string(Tier t);
Role parse_role(std::string_view s);
SemanticLabel parse_label(std::string_view s);
Flag parse_flag(std::string_view s);
Tier parse_tier(std::string_view s);

struct VoteRecord {
  Hash256 vote_id{};
  Point3 claimed_location;
  std::int64_t timestamp = 0;  // ms since epoch
  SemanticLabel label = SemanticLabel::medical;
  int severity = 1;  // 1..5
  std::uint64_t nonce = 0;
  Bytes author;  // public key
  Bytes signature;

  friend bool operator==(const VoteRecord&, const VoteRecord&) = default;
};

struct AttestationRecord {
  Hash256 target_vote_id{};
  Flag flag = Flag::unknown;
  Tier tier = Tier::optical;
  Bytes verifier;  // public key
  std::int64_t timestamp = 0;
  Bytes signature;

  friend bool operator==(const AttestationRecord&, const AttestationRecord&) = default;
};

using Payload = std::variant<VoteRecord, AttestationRecord>;

/// Canonical encodings: length-prefixed byte fields, little-endian
/// fixed-width integers, IEEE-754 bit patterns for coordinates.
Bytes vote_signing_bytes(const VoteRecord& v);
Bytes attestation_signing_bytes(const AttestationRecord& a);
Bytes canonical_payload(const Payload& p);
/// Throws LedgerError(malformed_record) on truncated or trailing input.
Payload decode_payload(ByteView bytes);

Hash256 compute_vote_id(const VoteRecord& v);

VoteRecord make_vote(const SignatureScheme& scheme, const KeyPair& author, const Point3& claimed,
                     std::int64_t timestamp, SemanticLabel label, int severity, std::uint64_t nonce);
AttestationRecord make_attestation(const SignatureScheme& scheme, const KeyPair& verifier, const Hash256& vote_id,
                                   Flag flag, Tier tier, std::int64_t timestamp);

bool verify_vote_signature(const SignatureScheme& scheme, const VoteRecord& v);
bool verify_attestation_signature(const SignatureScheme& scheme, const AttestationRecord& a);

struct LedgerEntry {
  std::uint64_t index = 0;
  Hash256 prev_hash{};
  Bytes payload;  // canonical bytes
  Hash256 entry_hash{};

  Payload decoded() const { return decode_payload(payload); }
  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

Hash256 compute_entry_hash(const Hash256& prev_hash, ByteView payload);

enum class LedgerErrc { bad_signature, replayed_nonce, stale_timestamp, malformed_record, unknown_vote, wrong_role };
std::string_view to_string(LedgerErrc e);

class LedgerError : public std::runtime_error {
 public:
  LedgerError(LedgerErrc code, const std::string& detail);
  LedgerErrc code() const { return code_; }

 private:
  LedgerErrc code_;
};

struct LedgerConfig {
  std::int64_t freshness_window_ms = 300'000;
};

struct TimeWindow {
  std::int64_t from = std::numeric_limits<std::int64_t>::min();  // inclusive
  std::int64_t to = std::numeric_limits<std::int64_t>::max();   // inclusive
};

struct VoteView {
  std::uint64_t index = 0;
  VoteRecord vote;
  std::vector<AttestationRecord> attestations;  // ledger order
};

/// Single-appender ledger. Readers take a shared lock and always see a
/// complete prefix.
class Ledger {
 public:
  explicit Ledger(const SignatureScheme& scheme = default_signature_scheme(), LedgerConfig config = {});
  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  /// Registers a key/role pair; public keys must be unique.
  void register_identity(const Identity& id);
  std::optional<Role> role_of(ByteView public_key) const;

  void set_clock(std::int64_t now_ms);
  std::int64_t clock() const;

  std::uint64_t submit_vote(const VoteRecord& vote);
  std::uint64_t submit_attestation(const AttestationRecord& att);

  std::size_t size() const;
  std::vector<LedgerEntry> entries() const;
  bool has_vote(const Hash256& vote_id) const;

  std::vector<VoteView> query_votes(const Rect& region, const TimeWindow& window) const;

  const SignatureScheme& scheme() const { return scheme_; }

 private:
  std::uint64_t append(Payload payload);

  const SignatureScheme& scheme_;
  LedgerConfig config_;
  mutable std::shared_mutex mutex_;
  std::int64_t clock_ms_ = 0;
  std::vector<LedgerEntry> entries_;
  std::vector<Payload> decoded_;
  std::map<Bytes, Role> identities_;
  std::set<std::pair<Bytes, std::uint64_t>> used_nonces_;
  std::map<Hash256, std::uint64_t> vote_index_;
  std::map<Hash256, std::vector<std::uint64_t>> attestations_of_;
};

struct VerifyResult {
  bool ok = true;
  std::uint64_t corrupt_index = 0;

  static VerifyResult good() { return {}; }
  static VerifyResult corrupt_at(std::uint64_t i) { return {false, i}; }
};

/// Recomputes every entry hash and prev-hash link; reports the first break.
VerifyResult verify_chain(std::span<const LedgerEntry> entries);
VerifyResult verify_chain(const Ledger& ledger);

/// Groups votes with their attestations, in ledger order, for any entry list.
std::vector<VoteView> collect_votes(std::span<const LedgerEntry> entries, const Rect* region = nullptr,
                                    const TimeWindow& window = {});

// Binary framing: per entry u64 index, 32-byte prev hash, u32 payload
// length, payload, 32-byte entry hash.
Bytes serialize_ledger(std::span<const LedgerEntry> entries);

struct ParsedLedger {
  std::vector<LedgerEntry> entries;
  std::optional<std::uint64_t> failed_at;  // entry position where framing broke
};
ParsedLedger deserialize_ledger(ByteView bytes);

/// Parse + verify; framing damage is reported as corruption at that entry.
VerifyResult verify_serialized(ByteView bytes);

nlohmann::json entry_to_json(const LedgerEntry& e);
LedgerEntry entry_from_json(const nlohmann::json& j);
std::string to_ndjson(std::span<const LedgerEntry> entries);

struct ParsedNdjson {
  std::vector<LedgerEntry> entries;
  std::optional<std::uint64_t> failed_at;  // line (entry position) that failed to parse
};
ParsedNdjson parse_ndjson(std::string_view text);
VerifyResult verify_ndjson(std::string_view text);

}  // namespace crowdverify
