#include <doctest.h>

#include <cmath>
#include <set>

#include "walsh/rng.hpp"

using walsh::Philox4x32;
using walsh::Stream;
using walsh::StreamTag;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) ==
        Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                             {0xffffffffu, 0xffffffffu}) ==
        Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                             {0xa4093822u, 0x299f31d0u}) ==
        Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct per path and tag") {
  Stream a(42, 7, StreamTag::driving_noise), b(42, 7, StreamTag::driving_noise);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u32() == b.next_u32());

  std::set<std::uint32_t> firsts;
  for (std::uint64_t path = 0; path < 50; ++path)
    for (auto tag : {StreamTag::driving_noise, StreamTag::ray_choice, StreamTag::bridge})
      firsts.insert(Stream(42, path, tag).next_u32());
  CHECK(firsts.size() == 150);
  CHECK(Stream(1, 0, StreamTag::aux).next_u32() != Stream(2, 0, StreamTag::aux).next_u32());
}

TEST_CASE("uniforms lie in the open unit interval, normals have unit variance") {
  Stream s(3, 0, StreamTag::aux);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(sum2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}
