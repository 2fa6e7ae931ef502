from .verify_suite import OPERATIONS, SUITES, CheckResult, SuiteReport, VerificationSuite

__all__ = ["OPERATIONS", "SUITES", "CheckResult", "SuiteReport", "VerificationSuite"]
