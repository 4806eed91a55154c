#pragma once
/// @file selftest.hpp
/// Built-in check suite behind `martenscale selftest`.

#include <string>
#include <vector>

namespace martenscale {

enum class CheckStatus { Pass, Fail, KnownFail, UnexpectedPass };
std::string to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Fail;
  std::string detail;
  double seconds = 0.0;
};

struct SelfTestOptions {
  /// Substring filter on check names (empty = all).
  std::string filter;
  /// Skips the minimizer and sweep checks.
  bool quick = false;
};

std::vector<std::string> selftest_names();
/// Runs the checks in order.  KnownFail marks expectations that the
/// discretization cannot meet; they do not count as failures.
std::vector<CheckResult> run_selftest(const SelfTestOptions& opt = {});
bool selftest_ok(const std::vector<CheckResult>& results);

}  // namespace martenscale
