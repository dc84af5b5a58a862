#include <doctest.h>

#include <json.hpp>

#include "cartan/errors.hpp"
#include "cartan/fixtures.hpp"

using namespace cartan;
using json = nlohmann::json;

TEST_CASE("shipped fixtures pass") {
  const auto names = fixture_names();
  CHECK(names == std::vector<std::string>{"example1", "example2", "example3"});
  for (const auto& n : names) {
    const auto r = run_fixture(n);
    INFO(r.to_text());
    CHECK(r.pass());
    CHECK(r.items.size() >= 8);
    for (const auto& i : r.items) CHECK(i.status != "mismatch");
  }
}

TEST_CASE("errata statuses") {
  const auto r1 = run_fixture("example1");
  for (const auto& i : r1.items) CHECK(i.status == "match");
  const auto r3 = run_fixture("example3");
  for (const char* item : {"eta", "psi2", "psi4"}) {
    const auto* i = r3.find(item);
    REQUIRE(i);
    CHECK(i->status == "erratum");
    CHECK(i->pass);
    CHECK_FALSE(i->printed.empty());
    CHECK_FALSE(i->engine.empty());
  }
  CHECK(r3.find("psi1")->status == "match");
  CHECK(r3.find("vertical_field")->pass);
  const auto r2 = run_fixture("example2");
  CHECK(r2.find("P_vector_fields")->status == "erratum");
}

TEST_CASE("reports are deterministic") {
  for (const auto& n : fixture_names()) CHECK(run_fixture(n).to_json() == run_fixture(n).to_json());
  const auto j = json::parse(run_fixture("example1").to_json());
  CHECK(j["fixture"] == "example1");
  CHECK(j["seed"] == 50343);
}

TEST_CASE("goldens re-parse") {
  for (const auto& n : fixture_names()) {
    const json j = json::parse(fixture_source(n));
    CHECK(json::parse(j.dump()) == j);
    const auto spec = fixture_problem(n);
    CHECK(spec.bundle);
    CHECK(spec.factors.size() == spec.bundle->k() + 1);
  }
  CHECK_THROWS_AS(fixture_source("example9"), Error);
}

TEST_CASE("tampered goldens fail") {
  json j = json::parse(fixture_source("example1"));
  for (auto& g : j["golden"])
    if (g["item"] == "psi1") g["terms"][0]["coeff"] = "2";
  auto r = run_fixture_source(j.dump());
  CHECK_FALSE(r.pass());
  CHECK(r.find("psi1")->status == "mismatch");

  // A recorded correction on an item that already matches is itself a failure.
  json k = json::parse(fixture_source("example1"));
  k["errata"] = json::array({{{"item", "psi1"}, {"kind", "correction"}, {"note", "spurious"},
                              {"terms", json::array({{{"coeff", "1"}, {"index", {"x1", "x2"}}}})}}});
  r = run_fixture_source(k.dump());
  CHECK_FALSE(r.pass());
  CHECK_FALSE(r.find("psi1")->pass);

  // Dropping a recorded erratum turns the item into a mismatch.
  json m = json::parse(fixture_source("example3"));
  m["errata"].erase(0);
  r = run_fixture_source(m.dump());
  CHECK(r.find("eta")->status == "mismatch");
}

TEST_CASE("seed override") {
  const auto r = run_fixture_source(fixture_source("example1"), 12345);
  CHECK(r.seed == 12345);
  CHECK(r.pass());
}
