"""Run archived configs into an output directory.

    python scripts/run_configs.py --out-dir runs/a                 # every config
    python scripts/run_configs.py --out-dir runs/b c02 c09         # by prefix
    python scripts/run_configs.py --out-dir runs/b --compare runs/a

A config with a ``"command"`` key goes to the ``wmsets`` CLI; one with a
``"script"`` key goes to that file in ``scripts/``.  Relative output paths
land in ``--out-dir``.  ``--compare`` checks the produced files byte for
byte against an earlier run.
"""

from __future__ import annotations

import argparse
import filecmp
import json
import subprocess
import sys
import time
from pathlib import Path

HERE = Path(__file__).resolve().parent
CONFIG_DIR = HERE / "configs"


def config_paths(prefixes=()) -> list[Path]:
    paths = sorted(CONFIG_DIR.glob("*.json"))
    if prefixes:
        paths = [p for p in paths if any(p.stem.startswith(x) for x in prefixes)]
    return paths


def command_for(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if "script" in cfg:
        return [sys.executable, str(HERE / cfg["script"]), "--config", str(path)]
    return [sys.executable, "-m", "wmsets", "-q", "--config", str(path)]


def output_name(path: Path) -> str:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)["out"]


def run_one(path: Path, out_dir: Path) -> tuple[int, float, str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    t = time.perf_counter()
    proc = subprocess.run(command_for(path), cwd=out_dir, capture_output=True, text=True)
    return proc.returncode, time.perf_counter() - t, proc.stderr


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", required=True)
    ap.add_argument("--compare", help="directory of an earlier run")
    ap.add_argument("prefixes", nargs="*")
    args = ap.parse_args(argv)
    out_dir = Path(args.out_dir).resolve()
    differ = 0
    for path in config_paths(args.prefixes):
        rc, dt, err = run_one(path, out_dir)
        line = f"{path.stem}: exit {rc}, {dt:.1f}s"
        if args.compare:
            name = output_name(path)
            same = filecmp.cmp(out_dir / name, Path(args.compare) / name, shallow=False)
            differ += not same
            line += ", identical" if same else ", DIFFERS"
        print(line, file=sys.stderr)
        if err.strip():
            print("  " + err.strip().replace("\n", "\n  "), file=sys.stderr)
    return 1 if differ else 0


if __name__ == "__main__":
    sys.exit(main())
