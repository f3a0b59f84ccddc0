#include "svsca/snowv.hpp"

#include <cstring>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "support/oracles.hpp"

using namespace svsca::snowv;

namespace {

KeyMaterial random_km(std::mt19937_64& gen) {
  KeyMaterial km;
  for (auto& b : km.key) b = static_cast<uint8_t>(gen());
  for (auto& b : km.iv) b = static_cast<uint8_t>(gen());
  return km;
}

}  // namespace

TEST_CASE("mul_x basic values") {
  CHECK(mul_x(0x0000, GfConstants::alpha) == 0x0000);
  CHECK(mul_x(0x0001, GfConstants::alpha) == 0x0002);
  CHECK(mul_x(0x8000, GfConstants::alpha) == 0x990f);
  // Against polynomial multiplication by x reduced by g_A.
  CHECK(mul_x(0x8000, GfConstants::alpha) == oracle::gf16_mul(0x8000, 2, 0x990f));
}

TEST_CASE("mul_x_inv basic values") {
  CHECK(mul_x_inv(0x0000, GfConstants::alpha_inv) == 0x0000);
  CHECK(mul_x_inv(0x0002, GfConstants::alpha_inv) == 0x0001);
  CHECK(mul_x_inv(0x0001, GfConstants::alpha_inv) == 0xcc87);
}

TEST_CASE("mul_x matches field multiplication exhaustively") {
  for (uint32_t v = 0; v < 65536; ++v) {
    CHECK(mul_x(static_cast<GfWord>(v), GfConstants::alpha) ==
          oracle::gf16_mul(static_cast<uint16_t>(v), 2, 0x990f));
    CHECK(mul_x(static_cast<GfWord>(v), GfConstants::beta) ==
          oracle::gf16_mul(static_cast<uint16_t>(v), 2, 0xc963));
  }
}

TEST_CASE("mul_x_inv matches multiplication by the field inverse of x") {
  uint16_t inv_a = oracle::gf16_pow(2, 65534, 0x990f);
  uint16_t inv_b = oracle::gf16_pow(2, 65534, 0xc963);
  // Sanity: x * x^-1 = 1 in both fields.
  CHECK(oracle::gf16_mul(2, inv_a, 0x990f) == 1);
  CHECK(oracle::gf16_mul(2, inv_b, 0xc963) == 1);
  for (uint32_t v = 0; v < 65536; ++v) {
    CHECK(mul_x_inv(static_cast<GfWord>(v), GfConstants::alpha_inv) ==
          oracle::gf16_mul(static_cast<uint16_t>(v), inv_a, 0x990f));
    CHECK(mul_x_inv(static_cast<GfWord>(v), GfConstants::beta_inv) ==
          oracle::gf16_mul(static_cast<uint16_t>(v), inv_b, 0xc963));
  }
}

TEST_CASE("mul_x / mul_x_inv are inverse bijections, exhaustively") {
  for (uint32_t v = 0; v < 65536; ++v) {
    GfWord w = static_cast<GfWord>(v);
    CHECK(mul_x_inv(mul_x(w, GfConstants::alpha), GfConstants::alpha_inv) == w);
    CHECK(mul_x(mul_x_inv(w, GfConstants::alpha_inv), GfConstants::alpha) == w);
    CHECK(mul_x_inv(mul_x(w, GfConstants::beta), GfConstants::beta_inv) == w);
    CHECK(mul_x(mul_x_inv(w, GfConstants::beta_inv), GfConstants::beta) == w);
  }
}

TEST_CASE("lfsr_step on degenerate states") {
  CipherState zero;
  auto w = lfsr_step(zero);
  CHECK(w.u == 0);
  CHECK(w.v == 0);
  CHECK(zero.a == std::array<GfWord, 16>{});
  CHECK(zero.b == std::array<GfWord, 16>{});

  CipherState st;
  st.a[8] = 0x0001;
  auto w2 = lfsr_step(st);
  CHECK(w2.u == 0xcc87);
  CHECK(w2.v == 0x0000);
}

TEST_CASE("lfsr_step agrees with a literal transcription of the recurrences") {
  std::mt19937_64 gen(123);
  for (int trial = 0; trial < 200; ++trial) {
    CipherState st;
    for (auto& x : st.a) x = static_cast<GfWord>(gen());
    for (auto& x : st.b) x = static_cast<GfWord>(gen());
    CipherState before = st;
    auto w = lfsr_step(st);

    uint16_t u = static_cast<uint16_t>(
        oracle::gf16_mul(before.a[0], 2, 0x990f) ^ before.a[1] ^
        oracle::gf16_mul(before.a[8], oracle::gf16_pow(2, 65534, 0x990f), 0x990f) ^
        before.b[0]);
    uint16_t v = static_cast<uint16_t>(
        oracle::gf16_mul(before.b[0], 2, 0xc963) ^ before.b[3] ^
        oracle::gf16_mul(before.b[8], oracle::gf16_pow(2, 65534, 0xc963), 0xc963) ^
        before.a[0]);
    CHECK(w.u == u);
    CHECK(w.v == v);
    for (int j = 0; j < 15; ++j) {
      CHECK(st.a[j] == before.a[j + 1]);
      CHECK(st.b[j] == before.b[j + 1]);
    }
    CHECK(st.a[15] == u);
    CHECK(st.b[15] == v);
  }
}

TEST_CASE("lfsr_update8 composition and zero behaviour") {
  CipherState zero;
  auto ws = lfsr_update8(zero);
  for (const auto& w : ws) {
    CHECK(w.u == 0);
    CHECK(w.v == 0);
  }

  std::mt19937_64 gen(7);
  CipherState st;
  for (auto& x : st.a) x = static_cast<GfWord>(gen());
  for (auto& x : st.b) x = static_cast<GfWord>(gen());
  CipherState st2 = st;
  lfsr_update8(st);
  for (int i = 0; i < 8; ++i) lfsr_step(st2);
  CHECK(st.a == st2.a);
  CHECK(st.b == st2.b);
}

TEST_CASE("replaying recorded feedback words reproduces the state") {
  std::mt19937_64 gen(11);
  CipherState st;
  for (auto& x : st.a) x = static_cast<GfWord>(gen());
  for (auto& x : st.b) x = static_cast<GfWord>(gen());
  CipherState fresh = st;

  std::vector<StepWords> rec;
  for (int i = 0; i < 16; ++i) rec.push_back(lfsr_step(st));

  for (const auto& w : rec) {
    for (int j = 0; j < 15; ++j) {
      fresh.a[j] = fresh.a[j + 1];
      fresh.b[j] = fresh.b[j + 1];
    }
    fresh.a[15] = w.u;
    fresh.b[15] = w.v;
  }
  CHECK(fresh.a == st.a);
  CHECK(fresh.b == st.b);
}

TEST_CASE("tap packing puts the low word first") {
  CipherState st;
  for (int i = 0; i < 8; ++i) st.a[i] = static_cast<GfWord>(i + 1);
  Block128 t2 = tap_t2(st);
  const uint8_t expect[16] = {1, 0, 2, 0, 3, 0, 4, 0, 5, 0, 6, 0, 7, 0, 8, 0};
  CHECK(std::memcmp(t2.bytes.data(), expect, 16) == 0);

  for (int i = 0; i < 8; ++i) st.b[8 + i] = static_cast<GfWord>(0xff00 | i);
  Block128 t1 = tap_t1(st);
  for (int i = 0; i < 8; ++i) {
    CHECK(t1.bytes[2 * i] == i);
    CHECK(t1.bytes[2 * i + 1] == 0xff);
  }
}

TEST_CASE("sigma permutation table and involution") {
  Block128 in;
  for (int i = 0; i < 16; ++i) in.bytes[i] = static_cast<uint8_t>(i);
  Block128 out = sigma_permute(in);
  const uint8_t expect[16] = {0, 4, 8, 12, 1, 5, 9, 13, 2, 6, 10, 14, 3, 7, 11, 15};
  CHECK(std::memcmp(out.bytes.data(), expect, 16) == 0);

  // Involution: applying twice is the identity.
  std::mt19937_64 gen(3);
  for (int t = 0; t < 50; ++t) {
    Block128 b;
    for (auto& x : b.bytes) x = static_cast<uint8_t>(gen());
    CHECK(sigma_permute(sigma_permute(b)) == b);
  }

  Block128 constant;
  constant.bytes.fill(0xAB);
  CHECK(sigma_permute(constant) == constant);

  // Bijection on positions.
  std::array<bool, 16> seen{};
  for (int i = 0; i < 16; ++i) seen[kSigma[i]] = true;
  for (bool s : seen) CHECK(s);
}

TEST_CASE("aes round on the zero block") {
  Block128 zero;
  Block128 out = aes_round_zero_key(zero);
  for (auto b : out.bytes) CHECK(b == 0x63);
}

TEST_CASE("aes round matches the FIPS-197 walkthrough") {
  // Round-1 state of the FIPS-197 appendix B trace; with a zero round
  // key the round output is the post-MixColumns state.
  Block128 in = Block128::from_hex("193de3bea0f4e22b9ac68d2ae9f84808");
  Block128 expect = Block128::from_hex("046681e5e0cb199a48f8d37a2806264c");
  CHECK(aes_round_zero_key(in) == expect);
}

TEST_CASE("aes round matches the field-arithmetic oracle") {
  std::mt19937_64 gen(17);
  for (int t = 0; t < 200; ++t) {
    Block128 b;
    for (auto& x : b.bytes) x = static_cast<uint8_t>(gen());
    std::array<uint8_t, 16> in;
    std::copy(b.bytes.begin(), b.bytes.end(), in.begin());
    auto ref = oracle::aes_round(in);
    Block128 out = aes_round_zero_key(b);
    CHECK(std::memcmp(out.bytes.data(), ref.data(), 16) == 0);
  }
}

TEST_CASE("aes round is nonlinear") {
  Block128 x = Block128::from_hex("000102030405060708090a0b0c0d0e0f");
  Block128 y = Block128::from_hex("5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a");
  Block128 zero;
  Block128 combo = aes_round_zero_key(x) ^ aes_round_zero_key(y) ^
                   aes_round_zero_key(x ^ y) ^ aes_round_zero_key(zero);
  CHECK(combo != zero);
}

TEST_CASE("add32x4 lane arithmetic") {
  std::mt19937_64 gen(23);
  Block128 zero;
  for (int t = 0; t < 100; ++t) {
    Block128 x;
    for (auto& b : x.bytes) b = static_cast<uint8_t>(gen());
    CHECK(add32x4(x, zero) == x);
  }

  Block128 ff, one;
  for (int i = 0; i < 4; ++i) ff.bytes[i] = 0xff;
  one.bytes[0] = 1;
  Block128 sum = add32x4(ff, one);
  for (int i = 0; i < 16; ++i) CHECK(sum.bytes[i] == 0);

  // Against plain 32-bit lane addition.
  for (int t = 0; t < 200; ++t) {
    Block128 x, y;
    for (auto& b : x.bytes) b = static_cast<uint8_t>(gen());
    for (auto& b : y.bytes) b = static_cast<uint8_t>(gen());
    Block128 s = add32x4(x, y);
    for (int lane = 0; lane < 4; ++lane) {
      uint32_t xa, ya, sa;
      std::memcpy(&xa, &x.bytes[4 * lane], 4);
      std::memcpy(&ya, &y.bytes[4 * lane], 4);
      std::memcpy(&sa, &s.bytes[4 * lane], 4);
      CHECK(sa == xa + ya);
    }
  }
}

TEST_CASE("add32x4 lanes never interact") {
  std::mt19937_64 gen(29);
  for (int t = 0; t < 50; ++t) {
    Block128 x, y;
    for (auto& b : x.bytes) b = static_cast<uint8_t>(gen());
    for (auto& b : y.bytes) b = static_cast<uint8_t>(gen());
    Block128 base = add32x4(x, y);
    int bit = static_cast<int>(gen() % 128);
    Block128 x2 = x;
    x2.bytes[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
    Block128 mod = add32x4(x2, y);
    int lane = bit / 32;
    for (int l = 0; l < 4; ++l) {
      bool same = std::memcmp(&base.bytes[4 * l], &mod.bytes[4 * l], 4) == 0;
      if (l != lane) CHECK(same);
    }
  }
}

TEST_CASE("fsm update from the all-zero configuration") {
  CipherState st;
  Block128 zero;
  Block128 z = fsm_update_and_output(st, zero, zero);
  CHECK(z == zero);
  CHECK(st.r1 == zero);  // sigma of zero
  for (auto b : st.r2.bytes) CHECK(b == 0x63);
  for (auto b : st.r3.bytes) CHECK(b == 0x63);
}

TEST_CASE("init loads the registers per the key/iv layout") {
  KeyMaterial zero;
  CipherState st = init(zero, /*stop_after_load=*/true);
  CHECK(st.a == std::array<GfWord, 16>{});
  CHECK(st.b == std::array<GfWord, 16>{});
  CHECK(st.r1 == Block128{});

  KeyMaterial km;
  for (int i = 0; i < 32; ++i) km.key[i] = static_cast<uint8_t>(i);
  for (int i = 0; i < 16; ++i) km.iv[i] = static_cast<uint8_t>(i);
  CipherState st2 = init(km, true);
  CHECK(st2.a[8] == 0x0100);
  CHECK(st2.a[0] == 0x0100);
  CHECK(st2.a[15] == 0x0f0e);
  CHECK(st2.b[8] == 0x1110);
  CHECK(st2.b[15] == 0x1f1e);
  for (int i = 0; i < 8; ++i) CHECK(st2.b[i] == 0);
  CHECK(st2.r1 == Block128{});
  CHECK(st2.r2 == Block128{});
  CHECK(st2.r3 == Block128{});
}

TEST_CASE("key material length validation") {
  std::vector<uint8_t> key(31), iv(16);
  CHECK_THROWS_AS(KeyMaterial::from_bytes(key, iv), std::invalid_argument);
  key.resize(32);
  iv.resize(15);
  CHECK_THROWS_AS(KeyMaterial::from_bytes(key, iv), std::invalid_argument);
  iv.resize(16);
  CHECK_NOTHROW(KeyMaterial::from_bytes(key, iv));
}

TEST_CASE("keystream known-answer vectors") {
  // Keystream-mode vectors for the SNOW-V specification (Ekdahl et al.,
  // IACR ToSC 2019(3)); the zero-input stream begins 69 ca 6d af ...
  struct Vector {
    const char* key;
    const char* iv;
    const char* z0;
    const char* z1;
  };
  const Vector vectors[] = {
      {"0000000000000000000000000000000000000000000000000000000000000000",
       "00000000000000000000000000000000",
       "69ca6daf9ae3b72db134a85a837e419d",
       "ec08aad39d7b0f009b60b28c534300ed"},
      {"ffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff",
       "ffffffffffffffffffffffffffffffff",
       "307609fb101012544bc175e317fb25ff",
       "330d0de25af6aad10505b89b1e09a8ec"},
      {"000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
       "202122232425262728292a2b2c2d2e2f",
       "04307445ac44a536712c73115b453d32",
       "81655eed0a704ab8221a3abdf18731ed"},
  };
  for (const auto& vec : vectors) {
    KeyMaterial km = KeyMaterial::from_hex(vec.key, vec.iv);
    CipherState st = init(km);
    CHECK(keystream_block(st).to_hex() == vec.z0);
    CHECK(keystream_block(st).to_hex() == vec.z1);
  }
}

TEST_CASE("keystream agrees with the independent transcription") {
  std::mt19937_64 gen(31337);
  for (int trial = 0; trial < 40; ++trial) {
    KeyMaterial km = random_km(gen);
    CipherState st = init(km);
    oracle::SnowVRef ref;
    ref.keyiv_setup(km.key.data(), km.iv.data());
    for (int block = 0; block < 4; ++block) {
      Block128 z = keystream_block(st);
      uint8_t zr[16];
      ref.keystream(zr);
      CHECK(std::memcmp(z.bytes.data(), zr, 16) == 0);
    }
  }
}

TEST_CASE("load-only state agrees with the independent transcription") {
  std::mt19937_64 gen(404);
  for (int trial = 0; trial < 20; ++trial) {
    KeyMaterial km = random_km(gen);
    CipherState st = init(km, true);
    oracle::SnowVRef ref;
    ref.load_only(km.key.data(), km.iv.data());
    for (int i = 0; i < 16; ++i) {
      CHECK(st.a[i] == ref.A[i]);
      CHECK(st.b[i] == ref.B[i]);
    }
  }
}
