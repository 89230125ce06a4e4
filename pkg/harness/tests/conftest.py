import subprocess
import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[2]


def run_cohsim(*args) -> None:
    """Drive the simulator CLI; the harness consumes only its output files."""
    res = subprocess.run([sys.executable, "-m", "cohsim.cli", *args],
                         capture_output=True, text=True)
    if res.returncode != 0:
        raise RuntimeError(f"cohsim {' '.join(args)} failed:\n{res.stderr}")


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """A small two-l_c dataset generated through the public CLI."""
    root = tmp_path_factory.mktemp("harness_data")
    idx = root / "idx"
    idx.mkdir()
    res = subprocess.run(
        [sys.executable, "-m", "cohsim.synthdigits", "--count", "40", "--seed", "5",
         "--out-images", str(idx / "imgs"), "--out-labels", str(idx / "lbls")],
        capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    manifests = {}
    for tag, l_c in (("lo", "0.0003",), ("hi", "0.008")):
        out = root / tag
        run_cohsim("generate", "--preset", "direct", "--n", "128", "--m", "6",
                   "--objects", "20", "--l-c", l_c,
                   "--images", str(idx / "imgs"), "--labels", str(idx / "lbls"),
                   "--output-dir", str(out))
        manifests[tag] = out / "manifest.jsonl"
    return manifests
