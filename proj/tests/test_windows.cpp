#include <doctest.h>

#include "pomdp_ope/windows.hpp"

using namespace pomdp_ope;

TEST_CASE("window config validation") {
  CHECK_THROWS_AS((WindowConfig{-1, 1, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((WindowConfig{1, 1, 1}.validate()), ConfigError);  // m_h must exceed m
  CHECK_THROWS_AS((WindowConfig{0, 1, 0}.validate()), ConfigError);
  CHECK_NOTHROW((WindowConfig{0, 1, 1}.validate()));
}

TEST_CASE("pair window codec round trip") {
  PairWindowCodec codec(3, 2, 2);
  CHECK(codec.size() == 36);
  for (std::int64_t i = 0; i < codec.size(); ++i) CHECK(codec.encode(codec.decode(i)) == i);

  // oldest pair is the most significant digit
  PairWindow w{{2, 1}, {0, 0}};
  CHECK(codec.encode(w) == (2 * 2 + 1) * 6 + 0);
}

TEST_CASE("pair window shift drops the oldest pair") {
  PairWindowCodec codec(3, 2, 2);
  PairWindow w{{2, 1}, {1, 0}};
  std::int64_t shifted = codec.shift(codec.encode(w), 0, 1);
  CHECK(codec.decode(shifted) == PairWindow{{1, 0}, {0, 1}});
}

TEST_CASE("empty window has a single index") {
  PairWindowCodec codec(4, 3, 0);
  CHECK(codec.size() == 1);
  CHECK(codec.encode({}) == 0);
  CHECK(codec.shift(0, 2, 1) == 0);
}

TEST_CASE("suffix extracts the last pairs") {
  PairWindowCodec codec(2, 2, 3);
  PairWindow w{{1, 0}, {0, 1}, {1, 1}};
  PairWindowCodec z_codec(2, 2, 1);
  CHECK(codec.suffix(codec.encode(w), 1) == z_codec.encode({{1, 1}}));
  CHECK(codec.suffix(codec.encode(w), 0) == 0);
}

TEST_CASE("future codec round trip and shapes") {
  FutureCodec codec(3, 2, 2);
  CHECK(codec.size() == 9 * 2);
  for (std::int64_t i = 0; i < codec.size(); ++i) {
    Future f = codec.decode(i);
    CHECK(f.obs.size() == 2);
    CHECK(f.acts.size() == 1);
    CHECK(codec.encode(f) == i);
  }
  Future bad;
  bad.obs = {0, 1};
  bad.acts = {5};
  CHECK_THROWS_AS(codec.encode(bad), ArgumentError);
}

TEST_CASE("window spaces index arithmetic") {
  WindowSpaces spaces(3, 4, 2, WindowConfig{1, 2, 2});
  CHECK(spaces.z.size() == 8);
  CHECK(spaces.h.size() == 64);
  CHECK(spaces.f.size() == 32);
  CHECK(spaces.fbar_size() == 8 * 32);
  CHECK(spaces.sbar_size() == 24);
  // z of h: last pair
  PairWindow h{{3, 1}, {2, 0}};
  CHECK(spaces.z_of_h(spaces.h.encode(h)) == spaces.z.encode({{2, 0}}));
}

TEST_CASE("capacity guard trips on huge windows") {
  CHECK_THROWS_AS(PairWindowCodec(100, 100, 8), CapacityError);
}
