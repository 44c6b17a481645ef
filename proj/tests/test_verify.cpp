#include <gtest/gtest.h>

#include "polarimetry/verify.hpp"

using namespace polarimetry;

TEST(Verify, DefaultSuitePasses) {
  VerifyOptions opt;
  opt.trials = 4;
  const auto s = run_verification(opt);
  EXPECT_EQ(s.checks.size(), verify_check_names().size());
  for (const auto& c : s.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.worst << " " << c.detail;
}

TEST(Verify, VacuumOnly) {
  VerifyOptions opt;
  opt.s0_max = 0.0;
  const auto s = run_verification(opt);
  EXPECT_TRUE(s.all_passed());
  EXPECT_EQ(s.checks.size(), 3u);
}

TEST(Verify, InjectedFaultIsNamed) {
  for (const std::string name : {"stokes_crb_constrained", "qfi_general_averaged", "vacuum_qfi"}) {
    VerifyOptions opt;
    opt.trials = 2;
    opt.inject_fault = name;
    const auto s = run_verification(opt);
    EXPECT_FALSE(s.all_passed());
    EXPECT_EQ(s.failed(), std::vector<std::string>{name});
  }
}

TEST(Verify, RejectsBadOptions) {
  VerifyOptions opt;
  opt.inject_fault = "no_such_check";
  EXPECT_THROW(run_verification(opt), Error);
  opt.inject_fault.clear();
  opt.s0_max = -1;
  EXPECT_THROW(run_verification(opt), Error);
}
