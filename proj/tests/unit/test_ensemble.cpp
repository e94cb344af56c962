#include <doctest.h>

#include <cmath>

#include "conewalk/ensemble.hpp"
#include "conewalk/error.hpp"
#include "conewalk/rng.hpp"

using namespace conewalk;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("matrix validation") {
  CHECK_NOTHROW(NonNegMatrix::validate({{1, 0}, {0, 1}}));
  CHECK(code_of([] { NonNegMatrix::validate({{1, 0}, {2, 0}}); }) == ErrorCode::ZeroColumn);
  CHECK(code_of([] { NonNegMatrix::validate({{1, -0.5}, {0, 1}}); }) == ErrorCode::NegativeEntry);
  CHECK(code_of([] { NonNegMatrix::validate({{1, 0, 0}, {0, 1}}); }) == ErrorCode::NonSquare);
  CHECK(code_of([] { NonNegMatrix::validate({}); }) == ErrorCode::NonSquare);
  try {
    NonNegMatrix::validate({{1, 0}, {2, 0}});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("column 1") != std::string::npos);
  }
  try {
    NonNegMatrix::validate({{1, -0.5}, {0, 1}});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
}

TEST_CASE("ensemble construction rejects bad probabilities") {
  const auto a = NonNegMatrix::validate({{1, 0}, {0, 1}});
  const auto b = NonNegMatrix::validate({{1, 1}, {1, 1}});
  CHECK_THROWS_AS(MatrixEnsemble({a, b}, {1.0, 0.0}), Error);
  CHECK_THROWS_AS(MatrixEnsemble({a, b}, {0.6, 0.6}), Error);
  CHECK_THROWS_AS(MatrixEnsemble({a}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(MatrixEnsemble({}, {}), Error);
  CHECK_THROWS_AS(MatrixEnsemble({a, NonNegMatrix::identity(3)}, {0.5, 0.5}), Error);
  CHECK_NOTHROW(MatrixEnsemble({a, b}, {0.5, 0.5}));
}

TEST_CASE("sampling") {
  const auto a = NonNegMatrix::validate({{1, 0}, {0, 1}});
  const auto b = NonNegMatrix::validate({{1, 1}, {1, 1}});
  SUBCASE("single matrix always index 0") {
    MatrixEnsemble e({b}, {1.0});
    RngStream r(1);
    for (int i = 0; i < 1000; ++i) REQUIRE(e.sample_index(r) == 0);
  }
  SUBCASE("fair pair frequency") {
    MatrixEnsemble e({a, b}, {0.5, 0.5});
    RngStream r(2);
    std::size_t zeros = 0;
    const std::size_t n = 1'000'000;
    for (std::size_t i = 0; i < n; ++i) zeros += e.sample_index(r) == 0;
    CHECK(std::abs(static_cast<double>(zeros) / n - 0.5) < 0.002);
  }
  SUBCASE("repeatable draws") {
    MatrixEnsemble e({a, b}, {0.3, 0.7});
    RngStream r1(3), r2(3);
    for (int i = 0; i < 1000; ++i) REQUIRE(sample_matrix(e, r1).index == e.sample_index(r2));
  }
}

TEST_CASE("projective action examples") {
  const ConeVector e1 = ConeVector::unit({1, 0});
  SUBCASE("identity") {
    const ConeVector x = ConeVector::unit({0.3, 0.7});
    const auto st = act_projective(NonNegMatrix::identity(2), x);
    CHECK(st.x[0] == doctest::Approx(x[0]).epsilon(1e-15));
    CHECK(st.x[1] == doctest::Approx(x[1]).epsilon(1e-15));
    CHECK(std::abs(st.increment) < 1e-15);
  }
  SUBCASE("all-ones matrix") {
    const auto st = act_projective(NonNegMatrix::validate({{1, 1}, {1, 1}}), e1);
    CHECK(std::abs(st.x[0] - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(st.x[1] - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(st.increment - 0.34657359027997264) < 1e-15);
  }
  SUBCASE("[[2,1],[1,1]]") {
    const auto st = act_projective(NonNegMatrix::validate({{2, 1}, {1, 1}}), e1);
    CHECK(std::abs(st.x[0] - 2 / std::sqrt(5.0)) < 1e-15);
    CHECK(std::abs(st.x[1] - 1 / std::sqrt(5.0)) < 1e-15);
    CHECK(std::abs(st.increment - 0.80471895621705014) < 1e-15);
  }
  SUBCASE("underflow") {
    const auto tiny = NonNegMatrix::validate({{1e-310, 1e-310}, {1e-310, 1e-310}});
    CHECK(code_of([&] { act_projective(tiny, e1); }) == ErrorCode::NumericalUnderflow);
  }
}

TEST_CASE("cone vectors") {
  CHECK_THROWS_AS(ConeVector::unit({0, 0}), Error);
  CHECK_THROWS_AS(ConeVector::unit({1, -1}), Error);
  CHECK_THROWS_AS(ConeVector::unit({}), Error);
  CHECK(ConeVector::unit({3, 4}).norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ConeVector::raw({3, 4}).norm() == doctest::Approx(5.0).epsilon(1e-15));
}
