#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace svsca::snowv {

// An element of GF(2^16). The two LFSRs live over this field.
using GfWord = uint16_t;

// Feedback constants: alpha/beta are roots of the generating polynomials
// g_A, g_B; the *_inv constants realize multiplication by their inverses.
struct GfConstants {
  static constexpr GfWord alpha = 0x990f;
  static constexpr GfWord alpha_inv = 0xcc87;
  static constexpr GfWord beta = 0xc963;
  static constexpr GfWord beta_inv = 0xe4b1;
};

// 128-bit block, least significant byte at index 0.
struct Block128 {
  std::array<uint8_t, 16> bytes{};

  friend bool operator==(const Block128&, const Block128&) = default;
  friend Block128 operator^(const Block128& x, const Block128& y) {
    Block128 r;
    for (int i = 0; i < 16; ++i) r.bytes[i] = x.bytes[i] ^ y.bytes[i];
    return r;
  }

  static Block128 from_hex(const std::string& hex);
  std::string to_hex() const;
};

// 256-bit key (k15..k0 as 16-bit words, byte pair 2i/2i+1 little endian)
// and 128-bit IV (iv7..iv0 likewise).
struct KeyMaterial {
  std::array<uint8_t, 32> key{};
  std::array<uint8_t, 16> iv{};

  GfWord key_word(int i) const {
    return static_cast<GfWord>(key[2 * i] | (key[2 * i + 1] << 8));
  }
  GfWord iv_word(int i) const {
    return static_cast<GfWord>(iv[2 * i] | (iv[2 * i + 1] << 8));
  }

  // Throws std::invalid_argument unless key is 32 bytes and iv 16 bytes.
  static KeyMaterial from_bytes(const std::vector<uint8_t>& key,
                                const std::vector<uint8_t>& iv);
  static KeyMaterial from_hex(const std::string& key_hex,
                              const std::string& iv_hex);
};

// Feedback words produced by one LFSR step (the values entering a[15]
// and b[15]); these are exactly the intermediates the simulator leaks.
struct StepWords {
  GfWord u = 0;
  GfWord v = 0;
};

// Full mutable cipher state: two 16-word LFSRs and the three FSM registers.
struct CipherState {
  std::array<GfWord, 16> a{};
  std::array<GfWord, 16> b{};
  Block128 r1, r2, r3;
};

// v * alpha (or beta): shift left, conditional XOR of c on the outgoing bit.
inline GfWord mul_x(GfWord v, GfWord c) {
  return static_cast<GfWord>((v & 0x8000) ? ((v << 1) ^ c) : (v << 1));
}

// v * alpha^-1 (or beta^-1): shift right, conditional XOR of d.
inline GfWord mul_x_inv(GfWord v, GfWord d) {
  return static_cast<GfWord>((v & 0x0001) ? ((v >> 1) ^ d) : (v >> 1));
}

// One step of both feedback recurrences; shifts the registers down one
// position and installs (u, v) at the top. Returns the feedback words.
StepWords lfsr_step(CipherState& st);

// Eight steps; returns the per-step feedback words in order.
std::array<StepWords, 8> lfsr_update8(CipherState& st);

// Taps assembled after an update: T1 = (b15..b8), T2 = (a7..a0),
// with b8 / a0 as the least significant words.
Block128 tap_t1(const CipherState& st);
Block128 tap_t2(const CipherState& st);

// Byte permutation of the FSM update; output byte i is input byte sigma[i].
Block128 sigma_permute(const Block128& in);
extern const std::array<uint8_t, 16> kSigma;

// One AES encryption round (SubBytes, ShiftRows, MixColumns) with the
// all-zero round key, FIPS-197 conventions on the byte layout.
Block128 aes_round_zero_key(const Block128& in);

// Four independent additions mod 2^32 on little-endian lanes.
Block128 add32x4(const Block128& x, const Block128& y);

// Keystream output plus FSM state transition. Call with the taps of a
// freshly advanced LFSR. Returns z = (R1 boxplus T1) XOR R2.
Block128 fsm_update_and_output(CipherState& st, const Block128& t1,
                               const Block128& t2);

// One full keystream block: 8 LFSR steps, output, FSM update.
Block128 keystream_block(CipherState& st);

// Load key/IV into the LFSRs (A: iv then k0..k7, B: zeros then k8..k15,
// FSM cleared) and, unless stop_after_load, run the 16 initialization
// rounds that feed each keystream block back into a[8..15] and XOR the
// two key halves into R1 after rounds 15 and 16.
CipherState init(const KeyMaterial& km, bool stop_after_load = false);

// Convenience: n blocks of keystream from an initialized state.
std::vector<uint8_t> keystream_bytes(CipherState& st, size_t blocks);

}  // namespace svsca::snowv
