#include "crowdverify/crypto.hpp"

#include <mutex>
#include <stdexcept>

#include <sodium.h>

namespace crowdverify {

namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
  });
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Hash256 sha256(ByteView data) {
  ensure_sodium();
  Hash256 out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

std::string to_hex(ByteView data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (auto b : data) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xf]);
  }
  return s;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex character");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

Hash256 hash_from_hex(std::string_view hex) {
  Bytes b = from_hex(hex);
  if (b.size() != 32) throw std::invalid_argument("hash must be 32 bytes");
  Hash256 h{};
  std::copy(b.begin(), b.end(), h.begin());
  return h;
}

Ed25519Scheme::Ed25519Scheme() { ensure_sodium(); }

KeyPair Ed25519Scheme::keypair_from_seed(ByteView seed) const {
  if (seed.size() != crypto_sign_SEEDBYTES) throw std::invalid_argument("Ed25519 seed must be 32 bytes");
  KeyPair kp;
  kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
  kp.secret_key.resize(crypto_sign_SECRETKEYBYTES);
  crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
  return kp;
}

Bytes Ed25519Scheme::sign(const KeyPair& key, ByteView message) const {
  if (key.secret_key.size() != crypto_sign_SECRETKEYBYTES) throw std::invalid_argument("bad Ed25519 secret key");
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), key.secret_key.data());
  return sig;
}

bool Ed25519Scheme::verify(ByteView public_key, ByteView message, ByteView signature) const {
  if (public_key.size() != crypto_sign_PUBLICKEYBYTES || signature.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), public_key.data()) == 0;
}

const SignatureScheme& default_signature_scheme() {
  static const Ed25519Scheme scheme;
  return scheme;
}

}  // namespace crowdverify
