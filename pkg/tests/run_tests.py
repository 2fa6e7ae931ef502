#!/usr/bin/env python
"""
Test runner for eigenrand
"""
import os
import subprocess
import sys

TEST_FILES = [
    "test_specfun.py",
    "test_measure.py",
    "test_montecarlo.py",
    "test_spectral.py",
    "test_randmat.py",
    "test_series.py",
    "test_plp.py",
    "test_cli.py",
    "test_suite.py",
    "test_phoenix.py",
]


def run_test(test_file, fast):
    """Run a single test file under pytest"""
    print(f"\n{'='*60}")
    print(f"Running: {test_file}")
    print('='*60)

    command = [sys.executable, "-m", "pytest", "-q", test_file]
    if fast:
        command += ["-m", "not slow"]
    try:
        result = subprocess.run(command, capture_output=False, cwd=os.path.dirname(os.path.abspath(__file__)))
        return result.returncode == 0
    except Exception as e:
        print(f"Error running {test_file}: {e}")
        return False


def main():
    """Run all tests; pass --fast to skip the acceptance-scale cases"""
    fast = "--fast" in sys.argv[1:]
    print("🧪 eigenrand - Test Suite")
    print("=" * 60)

    test_dir = os.path.dirname(os.path.abspath(__file__))
    results = []
    for name in TEST_FILES:
        test_file = os.path.join(test_dir, name)
        if os.path.exists(test_file):
            results.append((name, run_test(test_file, fast)))
        else:
            print(f"⚠️  Test file not found: {test_file}")
            results.append((name, False))

    # Summary
    print(f"\n{'='*60}")
    print("📊 Test Results Summary")
    print('='*60)

    passed = 0
    for test_name, success in results:
        status = "✅ PASSED" if success else "❌ FAILED"
        print(f"{test_name:<30} {status}")
        if success:
            passed += 1

    print(f"\nTotal: {len(results)} test files, {passed} passed, {len(results) - passed} failed")

    if passed == len(results):
        print("🎉 All tests passed!")
        return 0
    else:
        print("💥 Some tests failed!")
        return 1


if __name__ == "__main__":
    sys.exit(main())
