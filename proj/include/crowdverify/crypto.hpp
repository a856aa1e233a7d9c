#pragma once

// Hashing and digital signatures behind a small abstract contract.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crowdverify {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Hash256 = std::array<std::uint8_t, 32>;

Hash256 sha256(ByteView data);

std::string to_hex(ByteView data);
/// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);
Hash256 hash_from_hex(std::string_view hex);

struct KeyPair {
  Bytes public_key;
  Bytes secret_key;
};

/// sign(private, bytes) -> sig; verify(public, bytes, sig) -> bool.
class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual KeyPair keypair_from_seed(ByteView seed) const = 0;
  virtual Bytes sign(const KeyPair& key, ByteView message) const = 0;
  virtual bool verify(ByteView public_key, ByteView message, ByteView signature) const = 0;
};

/// Deterministic Ed25519 (libsodium). Seeds must be 32 bytes.
class Ed25519Scheme final : public SignatureScheme {
 public:
  Ed25519Scheme();
  KeyPair keypair_from_seed(ByteView seed) const override;
  Bytes sign(const KeyPair& key, ByteView message) const override;
  bool verify(ByteView public_key, ByteView message, ByteView signature) const override;
};

const SignatureScheme& default_signature_scheme();

}  // namespace crowdverify
