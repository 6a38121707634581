#include "forensicross/crypto.hpp"

#include <sodium.h>

#include <mutex>

namespace forensicross {

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

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::DecodeError, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::DecodeError, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Digest Digest::from_hex(std::string_view hex) {
  Bytes raw = forensicross::from_hex(hex);
  if (raw.size() != kSize) throw Error(Errc::DecodeError, "digest must be 32 bytes");
  Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

std::string Digest::hex() const { return to_hex(view()); }

Digest hash(ByteView data) {
  ensure_sodium();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
  return d;
}

KeyPair KeyPair::from_seed(const Digest& seed) {
  ensure_sodium();
  KeyPair kp;
  kp.public_key.bytes.resize(crypto_sign_PUBLICKEYBYTES);
  kp.private_key.resize(crypto_sign_SECRETKEYBYTES);
  crypto_sign_seed_keypair(kp.public_key.bytes.data(), kp.private_key.data(), seed.bytes.data());
  return kp;
}

KeyPair KeyPair::generate() {
  ensure_sodium();
  Digest seed;
  randombytes_buf(seed.bytes.data(), seed.bytes.size());
  return from_seed(seed);
}

KeyPair derive_keypair(std::uint64_t seed, std::string_view name) {
  return KeyPair::from_seed(hash(ByteWriter{}.str("forensicross-key").u64(seed).str(name).data()));
}

Signature sign(ByteView message, const KeyPair& key) {
  ensure_sodium();
  if (key.private_key.size() != crypto_sign_SECRETKEYBYTES ||
      key.public_key.bytes.size() != crypto_sign_PUBLICKEYBYTES) {
    throw Error(Errc::MalformedKey, "signing key has wrong length");
  }
  Signature sig;
  sig.bytes.resize(crypto_sign_BYTES);
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                       key.private_key.data());
  return sig;
}

bool verify(ByteView message, const Signature& sig, const PublicKey& public_key) {
  ensure_sodium();
  if (public_key.bytes.size() != crypto_sign_PUBLICKEYBYTES) {
    throw Error(Errc::MalformedKey, "public key must be 32 bytes");
  }
  if (sig.bytes.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                     public_key.bytes.data()) == 0;
}

// ---------------------------------------------------------------------------

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  buf_.push_back(v);
  return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

ByteWriter& ByteWriter::bytes(ByteView v) {
  u32(static_cast<std::uint32_t>(v.size()));
  return raw(v);
}

ByteWriter& ByteWriter::str(std::string_view v) {
  return bytes(ByteView{reinterpret_cast<const std::uint8_t*>(v.data()), v.size()});
}

ByteWriter& ByteWriter::digest(const Digest& d) { return raw(d.view()); }

ByteWriter& ByteWriter::raw(ByteView v) {
  buf_.insert(buf_.end(), v.begin(), v.end());
  return *this;
}

ByteView ByteReader::take(std::size_t n) {
  if (data_.size() - pos_ < n) throw Error(Errc::DecodeError, "truncated input");
  ByteView out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  std::uint32_t v = 0;
  for (auto b : take(4)) v = (v << 8) | b;
  return v;
}

std::uint64_t ByteReader::u64() {
  std::uint64_t v = 0;
  for (auto b : take(8)) v = (v << 8) | b;
  return v;
}

std::uint32_t ByteReader::count(std::size_t min_element_size) {
  const auto n = u32();
  if (min_element_size > 0 && (data_.size() - pos_) / min_element_size < n) {
    throw Error(Errc::DecodeError, "element count exceeds input");
  }
  return n;
}

Bytes ByteReader::bytes() {
  auto n = u32();
  auto v = take(n);
  return Bytes(v.begin(), v.end());
}

std::string ByteReader::str() {
  auto v = bytes();
  return std::string(v.begin(), v.end());
}

Digest ByteReader::digest() {
  Digest d;
  auto v = take(Digest::kSize);
  std::copy(v.begin(), v.end(), d.bytes.begin());
  return d;
}

void ByteReader::expect_done() const {
  if (!done()) throw Error(Errc::DecodeError, "trailing bytes");
}

// ---------------------------------------------------------------------------

MerkleTree::MerkleTree(std::vector<Digest> leaves) {
  if (leaves.empty()) throw Error(Errc::EmptyLeafList, "a Merkle tree needs at least one leaf");
  levels_.push_back(std::move(leaves));
  while (levels_.back().size() > 1) {
    const auto& level = levels_.back();
    std::vector<Digest> parents;
    parents.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      const Digest& left = level[i];
      const Digest& right = i + 1 < level.size() ? level[i + 1] : level[i];
      std::array<std::uint8_t, 2 * Digest::kSize> buf;
      std::copy(left.bytes.begin(), left.bytes.end(), buf.begin());
      std::copy(right.bytes.begin(), right.bytes.end(), buf.begin() + Digest::kSize);
      parents.push_back(hash(ByteView{buf.data(), buf.size()}));
    }
    levels_.push_back(std::move(parents));
  }
}

Digest merkle_root(std::span<const Digest> leaves) {
  return MerkleTree(std::vector<Digest>(leaves.begin(), leaves.end())).root();
}

}  // namespace forensicross
