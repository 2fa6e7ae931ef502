import time
import json
import os
from datetime import datetime
from typing import Dict, Any, Optional
import logging


def setup_detailed_logging(log_dir: Optional[str] = None, level: int = logging.INFO) -> logging.Logger:
    """Set up file + console logging for an eigenrand run"""

    log_dir = log_dir or os.getenv("EIGENRAND_LOG_DIR", "logs")
    os.makedirs(log_dir, exist_ok=True)

    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    log_file = os.path.join(log_dir, f"eigenrand_{timestamp}.log")

    logger = logging.getLogger("eigenrand")
    logger.setLevel(level)
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    # A second call in the same process (tests, repeated CLI runs) replaces
    # the handlers instead of stacking them.
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    file_handler = logging.FileHandler(log_file, encoding="utf-8")
    file_handler.setFormatter(formatter)
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(file_handler)
    logger.addHandler(console_handler)
    logger.propagate = False

    logger.info(f"🚀 eigenrand session started - Log file: {log_file}")
    return logger


class PerformanceTracker:
    """Track wall-clock time per experiment"""

    def __init__(self, log_dir: Optional[str] = None):
        self.log_dir = log_dir or os.getenv("EIGENRAND_LOG_DIR", "logs")
        self.metrics = {
            "start_time": time.time(),
            "steps": [],
        }
        self.current_step_start = None

    def start_step(self, step_name: str, details: str = ""):
        """Start timing a new experiment"""
        self.current_step_start = time.time()
        print(f"⏳ Starting: {step_name}")
        if details:
            print(f"   Details: {details}")

    def end_step(self, step_name: str, rows: int = 0, passed: Optional[bool] = None):
        """Stop timing the current experiment"""
        if self.current_step_start:
            duration = time.time() - self.current_step_start

            step_data = {
                "name": step_name,
                "duration": duration,
                "rows": rows,
                "passed": passed,
                "timestamp": datetime.now().isoformat()
            }

            self.metrics["steps"].append(step_data)

            status = "✅" if passed is not False else "❌"
            print(f"{status} Completed: {step_name}")
            print(f"   Duration: {duration:.2f}s")
            if rows > 0:
                print(f"   Report rows: {rows}")

            self.current_step_start = None

    def get_summary(self) -> Dict[str, Any]:
        """Get performance summary"""
        total_time = time.time() - self.metrics["start_time"]
        steps = self.metrics["steps"]

        return {
            "total_duration": total_time,
            "total_steps": len(steps),
            "failed_steps": [s["name"] for s in steps if s["passed"] is False],
            "steps": steps,
            "average_step_time": sum(s["duration"] for s in steps) / len(steps) if steps else 0
        }

    def save_metrics(self, filename: str) -> str:
        """Save metrics next to the log files"""
        os.makedirs(self.log_dir, exist_ok=True)
        metrics_file = os.path.join(self.log_dir, filename)

        with open(metrics_file, 'w', encoding="utf-8") as f:
            json.dump(self.get_summary(), f, indent=2)

        print(f"📊 Performance metrics saved to: {metrics_file}")
        return metrics_file


class SuiteProgressTracker:
    """Progress updates while a verification suite runs"""

    def __init__(self, total_checks: int):
        self.total_checks = max(total_checks, 1)
        self.completed_checks = 0
        self.failed_checks = 0
        self.current_check = ""

    def start_check(self, check_name: str, description: str = ""):
        """Announce the next check"""
        self.current_check = check_name
        print(f"\n{'='*60}")
        print(f"🔬 CHECK {self.completed_checks + 1}/{self.total_checks}: {check_name}")
        if description:
            print(f"   {description}")
        print(f"{'='*60}")

    def complete_check(self, passed: bool, rows: int = 0):
        """Mark the current check as done"""
        self.completed_checks += 1
        if not passed:
            self.failed_checks += 1
        progress_percent = (self.completed_checks / self.total_checks) * 100

        print("✅ Check passed!" if passed else "❌ Check failed!")
        if rows > 0:
            print(f"   Rows: {rows}")
        print(f"   Progress: {self.completed_checks}/{self.total_checks} ({progress_percent:.1f}%)")

        bar_length = 30
        filled_length = int(bar_length * self.completed_checks // self.total_checks)
        bar = '█' * filled_length + '░' * (bar_length - filled_length)
        print(f"   [{bar}] {progress_percent:.1f}%")
