"""
Reports from the command line
=============================

The ``solidopt`` command runs every analysis on a fixture and writes a JSON
report plus CSV tables.  Running it twice with the same seed gives
byte-identical files.
"""
import json
import tempfile
from pathlib import Path

from solidopt.cli import main

out = Path(tempfile.mkdtemp()) / "L1"
code = main(["--fixture", "L1", "--command", "all", "--seed", "0", "--out", str(out)])
print("exit code", code)

report = json.loads((out / "report.json").read_text())
print({k: report[k] for k in ("fixture", "commands", "seed", "tool_version")})
for rec in report["records"][:6]:
    print(rec["command"], rec.get("operation", rec.get("kind", "")), rec.get("status", rec.get("value")))
print(sorted(p.name for p in out.iterdir()))
