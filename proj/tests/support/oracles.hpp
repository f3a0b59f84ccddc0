#pragma once

// Independent reference implementations used only as test oracles.
// Everything here is written from the primary definitions (polynomial
// arithmetic, field inversion, binomial sums) rather than from the
// shift-and-xor / table-driven forms used by the library, so agreement
// between the two is meaningful.

#include <array>
#include <cstdint>
#include <vector>

namespace oracle {

// Multiplication in GF(2^16) with reduction polynomial x^16 + poly_low.
uint16_t gf16_mul(uint16_t a, uint16_t b, uint16_t poly_low);
uint16_t gf16_pow(uint16_t base, uint32_t exp, uint16_t poly_low);

// Multiplication in GF(2^8) mod x^8+x^4+x^3+x+1 (0x11b).
uint8_t gf8_mul(uint8_t a, uint8_t b);

// AES S-box entry computed from field inversion + affine transform.
uint8_t aes_sbox(uint8_t x);

// One zero-key AES encryption round, independent transcription.
std::array<uint8_t, 16> aes_round(const std::array<uint8_t, 16>& in);

// Second transcription of the whole cipher, 32-bit-lane FSM.
struct SnowVRef {
  uint16_t A[16], B[16];
  uint32_t R1[4], R2[4], R3[4];

  void keyiv_setup(const uint8_t* key32, const uint8_t* iv16);
  void load_only(const uint8_t* key32, const uint8_t* iv16);
  void lfsr_update();
  void keystream(uint8_t* z16);
};

// Majority-vote tail probability by direct term recurrence in long
// double: sum_{k=ceil(n/2)}^{n} C(n,k) p^k (1-p)^(n-k).
long double binomial_majority(long double p, int n);

}  // namespace oracle
