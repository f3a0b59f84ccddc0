#include "svsca/snowv.hpp"

#include <stdexcept>

namespace svsca::snowv {

namespace {

const uint8_t kAesSbox[256] = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b,
    0xfe, 0xd7, 0xab, 0x76, 0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0,
    0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0, 0xb7, 0xfd, 0x93, 0x26,
    0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2,
    0xeb, 0x27, 0xb2, 0x75, 0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0,
    0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84, 0x53, 0xd1, 0x00, 0xed,
    0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f,
    0x50, 0x3c, 0x9f, 0xa8, 0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5,
    0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2, 0xcd, 0x0c, 0x13, 0xec,
    0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14,
    0xde, 0x5e, 0x0b, 0xdb, 0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c,
    0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79, 0xe7, 0xc8, 0x37, 0x6d,
    0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f,
    0x4b, 0xbd, 0x8b, 0x8a, 0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e,
    0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e, 0xe1, 0xf8, 0x98, 0x11,
    0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f,
    0xb0, 0x54, 0xbb, 0x16};

inline uint8_t xtime(uint8_t x) {
  return static_cast<uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0x00));
}

inline int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument("invalid hex digit");
}

}  // namespace

const std::array<uint8_t, 16> kSigma = {0, 4, 8,  12, 1, 5, 9,  13,
                                        2, 6, 10, 14, 3, 7, 11, 15};

Block128 Block128::from_hex(const std::string& hex) {
  if (hex.size() != 32) throw std::invalid_argument("Block128 hex must be 32 chars");
  Block128 b;
  for (int i = 0; i < 16; ++i)
    b.bytes[i] = static_cast<uint8_t>((hex_nibble(hex[2 * i]) << 4) |
                                      hex_nibble(hex[2 * i + 1]));
  return b;
}

std::string Block128::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string s(32, '0');
  for (int i = 0; i < 16; ++i) {
    s[2 * i] = digits[bytes[i] >> 4];
    s[2 * i + 1] = digits[bytes[i] & 0xf];
  }
  return s;
}

KeyMaterial KeyMaterial::from_bytes(const std::vector<uint8_t>& key,
                                    const std::vector<uint8_t>& iv) {
  if (key.size() != 32)
    throw std::invalid_argument("key must be 32 bytes, got " +
                                std::to_string(key.size()));
  if (iv.size() != 16)
    throw std::invalid_argument("iv must be 16 bytes, got " +
                                std::to_string(iv.size()));
  KeyMaterial km;
  std::copy(key.begin(), key.end(), km.key.begin());
  std::copy(iv.begin(), iv.end(), km.iv.begin());
  return km;
}

KeyMaterial KeyMaterial::from_hex(const std::string& key_hex,
                                  const std::string& iv_hex) {
  auto parse = [](const std::string& h) {
    if (h.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
    std::vector<uint8_t> out(h.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
      out[i] = static_cast<uint8_t>((hex_nibble(h[2 * i]) << 4) |
                                    hex_nibble(h[2 * i + 1]));
    return out;
  };
  return from_bytes(parse(key_hex), parse(iv_hex));
}

StepWords lfsr_step(CipherState& st) {
  StepWords w;
  w.u = static_cast<GfWord>(mul_x(st.a[0], GfConstants::alpha) ^ st.a[1] ^
                            mul_x_inv(st.a[8], GfConstants::alpha_inv) ^ st.b[0]);
  w.v = static_cast<GfWord>(mul_x(st.b[0], GfConstants::beta) ^ st.b[3] ^
                            mul_x_inv(st.b[8], GfConstants::beta_inv) ^ st.a[0]);
  for (int j = 0; j < 15; ++j) {
    st.a[j] = st.a[j + 1];
    st.b[j] = st.b[j + 1];
  }
  st.a[15] = w.u;
  st.b[15] = w.v;
  return w;
}

std::array<StepWords, 8> lfsr_update8(CipherState& st) {
  std::array<StepWords, 8> out;
  for (auto& w : out) w = lfsr_step(st);
  return out;
}

Block128 tap_t1(const CipherState& st) {
  Block128 t;
  for (int i = 0; i < 8; ++i) {
    t.bytes[2 * i] = static_cast<uint8_t>(st.b[8 + i]);
    t.bytes[2 * i + 1] = static_cast<uint8_t>(st.b[8 + i] >> 8);
  }
  return t;
}

Block128 tap_t2(const CipherState& st) {
  Block128 t;
  for (int i = 0; i < 8; ++i) {
    t.bytes[2 * i] = static_cast<uint8_t>(st.a[i]);
    t.bytes[2 * i + 1] = static_cast<uint8_t>(st.a[i] >> 8);
  }
  return t;
}

Block128 sigma_permute(const Block128& in) {
  Block128 out;
  for (int i = 0; i < 16; ++i) out.bytes[i] = in.bytes[kSigma[i]];
  return out;
}

Block128 aes_round_zero_key(const Block128& in) {
  // Byte i holds state cell s[i%4][i/4] (FIPS-197 column-major order).
  std::array<uint8_t, 16> s;
  for (int i = 0; i < 16; ++i) s[i] = kAesSbox[in.bytes[i]];

  // ShiftRows: row r rotates left by r.
  std::array<uint8_t, 16> t;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) t[4 * c + r] = s[4 * ((c + r) & 3) + r];

  // MixColumns; the zero round key makes AddRoundKey a no-op.
  Block128 out;
  for (int c = 0; c < 4; ++c) {
    uint8_t a0 = t[4 * c + 0], a1 = t[4 * c + 1], a2 = t[4 * c + 2],
            a3 = t[4 * c + 3];
    out.bytes[4 * c + 0] = static_cast<uint8_t>(xtime(a0) ^ xtime(a1) ^ a1 ^ a2 ^ a3);
    out.bytes[4 * c + 1] = static_cast<uint8_t>(a0 ^ xtime(a1) ^ xtime(a2) ^ a2 ^ a3);
    out.bytes[4 * c + 2] = static_cast<uint8_t>(a0 ^ a1 ^ xtime(a2) ^ xtime(a3) ^ a3);
    out.bytes[4 * c + 3] = static_cast<uint8_t>(xtime(a0) ^ a0 ^ a1 ^ a2 ^ xtime(a3));
  }
  return out;
}

Block128 add32x4(const Block128& x, const Block128& y) {
  Block128 out;
  for (int lane = 0; lane < 4; ++lane) {
    uint32_t xa = 0, ya = 0;
    for (int i = 3; i >= 0; --i) {
      xa = (xa << 8) | x.bytes[4 * lane + i];
      ya = (ya << 8) | y.bytes[4 * lane + i];
    }
    uint32_t sum = xa + ya;
    for (int i = 0; i < 4; ++i) out.bytes[4 * lane + i] = static_cast<uint8_t>(sum >> (8 * i));
  }
  return out;
}

Block128 fsm_update_and_output(CipherState& st, const Block128& t1,
                               const Block128& t2) {
  Block128 z = add32x4(st.r1, t1) ^ st.r2;
  Block128 tmp = add32x4(st.r2, st.r3 ^ t2);
  Block128 new_r3 = aes_round_zero_key(st.r2);
  Block128 new_r2 = aes_round_zero_key(st.r1);
  st.r1 = sigma_permute(tmp);
  st.r2 = new_r2;
  st.r3 = new_r3;
  return z;
}

Block128 keystream_block(CipherState& st) {
  // Taps and output come from the current state; the eight LFSR steps
  // then run so the next FSM update sees fresh taps.
  Block128 z = fsm_update_and_output(st, tap_t1(st), tap_t2(st));
  lfsr_update8(st);
  return z;
}

CipherState init(const KeyMaterial& km, bool stop_after_load) {
  CipherState st;
  for (int i = 0; i < 8; ++i) {
    st.a[i] = km.iv_word(i);
    st.a[8 + i] = km.key_word(i);
    st.b[i] = 0;
    st.b[8 + i] = km.key_word(8 + i);
  }
  if (stop_after_load) return st;

  for (int round = 0; round < 16; ++round) {
    Block128 z = keystream_block(st);
    for (int j = 0; j < 8; ++j)
      st.a[8 + j] ^= static_cast<GfWord>(z.bytes[2 * j] | (z.bytes[2 * j + 1] << 8));
    if (round == 14)
      for (int i = 0; i < 16; ++i) st.r1.bytes[i] ^= km.key[i];
    if (round == 15)
      for (int i = 0; i < 16; ++i) st.r1.bytes[i] ^= km.key[16 + i];
  }
  return st;
}

std::vector<uint8_t> keystream_bytes(CipherState& st, size_t blocks) {
  std::vector<uint8_t> out;
  out.reserve(blocks * 16);
  for (size_t i = 0; i < blocks; ++i) {
    Block128 z = keystream_block(st);
    out.insert(out.end(), z.bytes.begin(), z.bytes.end());
  }
  return out;
}

}  // namespace svsca::snowv
