#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chicap/errors.hpp"
#include "chicap/random.hpp"
#include "chicap/records.hpp"

using namespace chicap;
using records::Json;

TEST_CASE("matrix literals round-trip") {
  const Matrix m = random_state(3, 2, 1).matrix();
  const Matrix back = records::parse_matrix(Json::parse(records::to_json(m).dump()));
  CHECK(max_abs(back - m) == 0.0);
  const Matrix real = records::parse_matrix(Json::parse("[[1, 0], [0, [0.5, -1]]]"));
  CHECK(real(1, 1) == Complex(0.5, -1.0));
}

TEST_CASE("malformed matrices are rejected") {
  CHECK_THROWS_AS(records::parse_matrix(Json::parse("[]")), InvalidInput);
  CHECK_THROWS_AS(records::parse_matrix(Json::parse("[[1, 2], [3]]")), InvalidInput);
  CHECK_THROWS_AS(records::parse_matrix(Json::parse("[[[1, 2, 3]]]")), InvalidInput);
  CHECK_THROWS_AS(records::parse_matrix(Json::parse("[[\"x\"]]")), InvalidInput);
}

TEST_CASE("channel records") {
  const KrausChannel n = records::parse_channel(Json::parse(R"({"family": "noiseless", "params": {"d": 3}})"));
  CHECK(n.din() == 3);
  const KrausChannel d = records::parse_channel(Json::parse(R"({"family": "depolarizing", "params": {"p": 0.2, "d": 2}})"));
  CHECK(max_abs(d.map().apply(identity(2)) - identity(2)) < 1e-14);
  const KrausChannel r1 =
      records::parse_channel(Json::parse(R"({"family": "random", "params": {"din": 2, "dout": 2, "rank": 2, "seed": 4}})"));
  const KrausChannel r2 = random_channel(2, 2, 2, 4);
  CHECK(max_abs(r1.kraus()[0] - r2.kraus()[0]) == 0.0);
  const KrausChannel eb = records::parse_channel(
      Json::parse(R"({"family": "random_entanglement_breaking", "params": {"din": 2, "dout": 2, "outcomes": 3}})"));
  CHECK(eb.is_entanglement_breaking());
  Json k;
  k["kraus"] = {records::to_json(identity(2))};
  CHECK(records::parse_channel(k).dout() == 2);
  CHECK_THROWS_AS(records::parse_channel(Json::parse(R"({"family": "nope"})")), InvalidInput);
  CHECK_THROWS_AS(records::parse_channel(Json::parse(R"({"kraus": [[[0.5, 0], [0, 0.5]]]})")), InvalidInput);
  CHECK_THROWS_AS(records::parse_channel(Json::parse(R"({"family": "noiseless", "params": {"d": 0}})")), InvalidInput);
}

TEST_CASE("block channel records") {
  const Json j = Json::parse(R"({"blocks": [{"weight": 0.3, "channel": {"family": "noiseless", "params": {"d": 2}}},
                                            {"weight": 0.7, "channel": {"family": "completely_depolarizing", "params": {"d": 2}}}]})");
  CHECK(records::is_block_record(j));
  CHECK(records::parse_block_channel(j).size() == 2);
  CHECK(records::parse_block_channel(Json::parse(R"({"family": "erasure", "params": {"q": 0.4, "d": 2}})")).size() == 2);
}

TEST_CASE("constraint records") {
  CHECK(records::parse_constraint(Json::parse(R"({"type": "full"})"), 2).is_full());
  const ConstraintSet lin =
      records::parse_constraint(Json::parse(R"({"type": "linear", "A": [[0, 0], [0, 1]], "alpha": 0.3})"), 2);
  CHECK(lin.kind() == "linear");
  CHECK_THROWS_AS(records::parse_constraint(Json::parse(R"({"type": "linear", "A": [[0, 0], [0, 1]], "alpha": 0.3})"), 3),
                  InvalidInput);
  const ConstraintSet single =
      records::parse_constraint(Json::parse(R"({"type": "singleton", "rho": [[0.5, 0], [0, 0.5]]})"), 2);
  CHECK(single.kind() == "singleton");
  // The right factor dimension is inferred from the channel input.
  const ConstraintSet m = records::parse_constraint(
      Json::parse(R"({"type": "marginals", "left": {"type": "singleton", "rho": [[1, 0], [0, 0]]}, "right": {"type": "full"}})"), 6);
  const auto& mv = std::get<ConstraintSet::Marginals>(m.variant());
  CHECK(mv.dh == 2);
  CHECK(mv.dk == 3);
  CHECK_THROWS_AS(
      records::parse_constraint(Json::parse(R"({"type": "marginals", "left": {"type": "full"}, "right": {"type": "full"}})"), 4),
      InvalidInput);
  CHECK_THROWS_AS(records::parse_constraint(Json::parse(R"({"type": "ball"})"), 2), InvalidInput);
}

TEST_CASE("ensemble and extension records") {
  const Ensemble e = random_ensemble(2, 3, 5);
  const Ensemble back = records::parse_ensemble(Json::parse(records::to_json(e).dump()));
  REQUIRE(back.size() == 3);
  CHECK(max_abs(back.state(1).matrix() - e.state(1).matrix()) == 0.0);
  const ShorExtension x = records::parse_extension(Json::parse(
      R"({"base": {"family": "noiseless", "params": {"d": 2}}, "effect": [[1, 0], [0, 0]], "q": 0.1, "d": 4})"));
  CHECK(x.d() == 4);
  CHECK(x.q() == 0.1);
}

TEST_CASE("nine significant digits") {
  CHECK(records::round9(0.123456789123) == 0.123456789);
  CHECK(records::round9(1234567891.5) == 1234567890.0);
  GapReport r;
  r.quantity = "subadditivity";
  r.lhs = 1.0 / 3.0;
  r.rhs = 2.0 / 3.0;
  r.gap = r.rhs - r.lhs;
  r.proven = true;
  const Json out = records::to_json(r, Json::object());
  CHECK(out.at("lhs").dump() == "0.333333333");
  CHECK(out.at("pass").get<bool>());
  r.proven = false;
  CHECK(records::to_json(r, Json::object()).contains("report"));
}
