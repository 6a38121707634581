#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forensicross/error.hpp"

namespace forensicross {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

Bytes to_bytes(std::string_view s);
std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

/// 256-bit SHA-256 digest.
struct Digest {
  static constexpr std::size_t kSize = 32;
  std::array<std::uint8_t, kSize> bytes{};

  static Digest zero() { return {}; }
  static Digest from_hex(std::string_view hex);
  std::string hex() const;
  ByteView view() const { return {bytes.data(), bytes.size()}; }

  auto operator<=>(const Digest&) const = default;
};

Digest hash(ByteView data);
inline Digest hash(std::string_view s) {
  return hash(ByteView{reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

struct PublicKey {
  Bytes bytes;
  std::string hex() const { return to_hex(bytes); }
  auto operator<=>(const PublicKey&) const = default;
};

struct Signature {
  Bytes bytes;
  std::string hex() const { return to_hex(bytes); }
  auto operator<=>(const Signature&) const = default;
};

/// Ed25519 key pair. `private_key` is the 64-byte libsodium secret key
/// (seed followed by public key).
struct KeyPair {
  PublicKey public_key;
  Bytes private_key;

  static KeyPair from_seed(const Digest& seed);
  static KeyPair generate();
};

/// Deterministic key pair for a named simulation identity.
KeyPair derive_keypair(std::uint64_t seed, std::string_view name);

Signature sign(ByteView message, const KeyPair& key);
/// Throws Error(MalformedKey) when `public_key` is not a 32-byte key.
/// A signature of the wrong length simply fails verification.
bool verify(ByteView message, const Signature& sig, const PublicKey& public_key);

/// Canonical length-prefixed big-endian serialization. Every hashed or
/// signed structure goes through this writer field by field.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& bytes(ByteView v);  // u32 length prefix
  ByteWriter& str(std::string_view v);
  ByteWriter& digest(const Digest& d);  // fixed width, no prefix
  ByteWriter& raw(ByteView v);
  template <typename Range, typename Fn>
  ByteWriter& list(const Range& items, Fn&& write_one) {
    u32(static_cast<std::uint32_t>(std::size(items)));
    for (const auto& item : items) write_one(*this, item);
    return *this;
  }

  const Bytes& data() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  /// Element count of a following sequence; throws DecodeError when the
  /// remaining input cannot hold that many elements of `min_element_size`.
  std::uint32_t count(std::size_t min_element_size = 4);
  Bytes bytes();
  std::string str();
  Digest digest();
  bool done() const { return pos_ == data_.size(); }
  /// Throws DecodeError unless every byte was consumed.
  void expect_done() const;

 private:
  ByteView take(std::size_t n);

  ByteView data_;
  std::size_t pos_ = 0;
};

/// Binary Merkle tree over an ordered leaf list. Odd-width levels are
/// padded by duplicating their last node; parents are hash(left || right).
class MerkleTree {
 public:
  explicit MerkleTree(std::vector<Digest> leaves);

  const Digest& root() const { return levels_.back().front(); }
  const std::vector<Digest>& leaves() const { return levels_.front(); }
  const std::vector<std::vector<Digest>>& levels() const { return levels_; }

 private:
  std::vector<std::vector<Digest>> levels_;
};

/// Throws Error(EmptyLeafList) for an empty list.
Digest merkle_root(std::span<const Digest> leaves);

}  // namespace forensicross
