#include "btcsync/address.hpp"

#include <algorithm>
#include <vector>

namespace btcsync {

namespace {

std::uint8_t p2pkh_version(NetworkKind n) { return n == NetworkKind::kMainnet ? 0x00 : 0x6f; }
std::uint8_t p2sh_version(NetworkKind n) { return n == NetworkKind::kMainnet ? 0x05 : 0xc4; }

std::string_view bech32_hrp(NetworkKind n) {
  switch (n) {
    case NetworkKind::kMainnet: return "bc";
    case NetworkKind::kTestnet: return "tb";
    case NetworkKind::kRegtest: return "bcrt";
  }
  return "bc";
}

std::uint32_t bech32_polymod(const std::vector<std::uint8_t>& values) {
  static constexpr std::uint32_t kGen[5] = {0x3b6a57b2, 0x26508e6d, 0x1ea119fa, 0x3d4233dd,
                                            0x2a1462b3};
  std::uint32_t chk = 1;
  for (auto v : values) {
    const std::uint32_t top = chk >> 25;
    chk = ((chk & 0x1ffffff) << 5) ^ v;
    for (int i = 0; i < 5; ++i)
      if ((top >> i) & 1) chk ^= kGen[i];
  }
  return chk;
}

std::vector<std::uint8_t> to_base32(ByteSpan data) {
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (auto b : data) {
    acc = (acc << 8) | b;
    bits += 8;
    while (bits >= 5) {
      bits -= 5;
      out.push_back((acc >> bits) & 31);
    }
  }
  if (bits > 0) out.push_back((acc << (5 - bits)) & 31);
  return out;
}

bool matches(ByteSpan s, std::initializer_list<int> pattern) {
  // -1 marks the 20-byte hash slot.
  std::size_t i = 0;
  for (int p : pattern) {
    if (p == -1) {
      i += 20;
      continue;
    }
    if (i >= s.size() || s[i] != p) return false;
    ++i;
  }
  return i == s.size();
}

}  // namespace

std::string base58check_encode(ByteSpan payload) {
  static constexpr char kAlphabet[] =
      "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
  Bytes data(payload.begin(), payload.end());
  const auto check = sha256d(payload);
  data.insert(data.end(), check.bytes().begin(), check.bytes().begin() + 4);

  std::vector<std::uint8_t> digits;  // base58, little-endian
  for (auto byte : data) {
    int carry = byte;
    for (auto& d : digits) {
      carry += d * 256;
      d = static_cast<std::uint8_t>(carry % 58);
      carry /= 58;
    }
    while (carry > 0) {
      digits.push_back(static_cast<std::uint8_t>(carry % 58));
      carry /= 58;
    }
  }
  std::string out;
  for (auto byte : data) {
    if (byte != 0) break;
    out.push_back('1');
  }
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) out.push_back(kAlphabet[*it]);
  return out;
}

std::string bech32_segwit_encode(std::string_view hrp, ByteSpan program) {
  static constexpr char kCharset[] = "qpzry9x8gf2tvdw0s3jn54khce6mua7l";
  std::vector<std::uint8_t> data{0};  // witness version 0
  auto prog5 = to_base32(program);
  data.insert(data.end(), prog5.begin(), prog5.end());

  std::vector<std::uint8_t> values;
  for (char c : hrp) values.push_back(static_cast<std::uint8_t>(c) >> 5);
  values.push_back(0);
  for (char c : hrp) values.push_back(static_cast<std::uint8_t>(c) & 31);
  values.insert(values.end(), data.begin(), data.end());
  values.insert(values.end(), 6, 0);
  const std::uint32_t mod = bech32_polymod(values) ^ 1;

  std::string out(hrp);
  out.push_back('1');
  for (auto d : data) out.push_back(kCharset[d]);
  for (int i = 0; i < 6; ++i) out.push_back(kCharset[(mod >> (5 * (5 - i))) & 31]);
  return out;
}

std::string address_of_script(ByteSpan s, NetworkKind network) {
  if (matches(s, {0x76, 0xa9, 0x14, -1, 0x88, 0xac})) {
    Bytes payload{p2pkh_version(network)};
    payload.insert(payload.end(), s.begin() + 3, s.begin() + 23);
    return base58check_encode(payload);
  }
  if (matches(s, {0xa9, 0x14, -1, 0x87})) {
    Bytes payload{p2sh_version(network)};
    payload.insert(payload.end(), s.begin() + 2, s.begin() + 22);
    return base58check_encode(payload);
  }
  if (matches(s, {0x00, 0x14, -1})) {
    return bech32_segwit_encode(bech32_hrp(network), s.subspan(2, 20));
  }
  return "script:" + sha256d(s).to_hex();
}

Bytes p2pkh_script(const Hash160& key_hash) {
  Bytes s;
  s.reserve(25);
  s.assign({0x76, 0xa9, 0x14});
  s.insert(s.end(), key_hash.begin(), key_hash.end());
  s.push_back(0x88);
  s.push_back(0xac);
  return s;
}

Bytes p2sh_script(const Hash160& script_hash) {
  Bytes s;
  s.reserve(23);
  s.assign({0xa9, 0x14});
  s.insert(s.end(), script_hash.begin(), script_hash.end());
  s.push_back(0x87);
  return s;
}

Bytes p2wpkh_script(const Hash160& key_hash) {
  Bytes s;
  s.reserve(22);
  s.assign({0x00, 0x14});
  s.insert(s.end(), key_hash.begin(), key_hash.end());
  return s;
}

}  // namespace btcsync
