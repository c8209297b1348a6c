#!/usr/bin/env python3
"""Regenerate configs/reference_verdicts.json from the shipped configs.

Usage: tools/freeze_reference_verdicts.py BUILD_DIR
Runs every sweep/validate config once and records the exit code and the
per-suite verdicts. The CLI tests check that later builds reproduce them.
"""
import json
import pathlib
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent
COMMANDS = {"validate_bump": "validate"}


def main() -> int:
    cli = pathlib.Path(sys.argv[1]) / "tools" / "perthom"
    verdicts = {}
    for cfg in sorted((ROOT / "configs").glob("*.toml")):
        command = COMMANDS.get(cfg.stem, "sweep")
        with tempfile.TemporaryDirectory() as out:
            proc = subprocess.run([str(cli), command, "--config", str(cfg), "--out", out],
                                  capture_output=True, text=True)
            name = "validate.json" if command == "validate" else "summary.json"
            summary = json.loads((pathlib.Path(out) / name).read_text())
        verdicts[cfg.stem] = {
            "command": command,
            "exit_code": proc.returncode,
            "suites": {s["name"]: s["pass"] for s in summary["suites"]},
        }
    path = ROOT / "configs" / "reference_verdicts.json"
    path.write_text(json.dumps(verdicts, indent=2) + "\n")
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
