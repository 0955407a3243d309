"""
The command-line pipeline
=========================

The same steps from the ``failbench`` command: generate a data set, check it,
sessionize, profile, run the grid and re-render the report from its manifest.
Each call returns the process exit code.
"""
import sys
import tempfile
from pathlib import Path

from failbench.cli import main

work = Path(sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp())
data = work / "data"
config = str(data / "config.json")

for argv in (["synth", "--seed", "3", "--out", str(data)],
             ["validate", "--config", config],
             ["sessionize", "--config", config, "--out", str(work / "sessions.csv")],
             ["profile", "--config", config],
             ["run", "--config", config, "--out", str(work / "run")],
             ["report", "--manifest", str(work / "run" / "manifest.json")]):
    print("$ failbench", " ".join(argv))
    print("exit", main(argv))
print("outputs in", work / "run")
