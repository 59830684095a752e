"""Run the acceptance suite and print only its criterion lines."""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def main():
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           str(ROOT / "tests" / "test_acceptance.py")],
                          cwd=ROOT, capture_output=True, text=True)
    lines = proc.stdout.splitlines()
    start = next((i for i, l in enumerate(lines) if "acceptance criteria" in l), None)
    if start is None:
        sys.stdout.write(proc.stdout + proc.stderr)
    else:
        for line in lines[start + 1:]:
            if line.startswith(("PASS  ", "FAIL  ")):
                print(line)
    return proc.returncode


if __name__ == "__main__":
    sys.exit(main())
