#pragma once

// Worked examples shipped with the library: problem data plus the expected
// displays, checked item by item.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cartan/problem_io.hpp"

namespace cartan {

struct FixtureItem {
  std::string item;
  std::string kind;
  /// "match", "erratum" (printed display differs from the engine by a
  /// recorded correction) or "mismatch".
  std::string status;
  bool pass = false;
  std::string detail;
  std::string printed;  // filled when the display and the engine differ
  std::string engine;
};

struct FixtureReport {
  std::string name;
  std::string title;
  std::uint64_t seed = 0;
  std::vector<FixtureItem> items;

  bool pass() const;
  const FixtureItem* find(std::string_view item) const;
  std::string to_json() const;
  std::string to_text() const;
};

std::vector<std::string> fixture_names();
/// Raw JSON of a shipped fixture; throws InvalidArgument for unknown names.
std::string_view fixture_source(std::string_view name);
ProblemSpec fixture_problem(std::string_view name);

/// Never throws for a known fixture: failures become report items.
FixtureReport run_fixture(std::string_view name);
FixtureReport run_fixture_source(std::string_view json_text, const std::optional<std::uint64_t>& seed = {});

}  // namespace cartan
