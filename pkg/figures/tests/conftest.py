"""Build a miniature data directory through the simulation CLI.

The figure scripts only consume files, so the fixtures call the installed
`cwlm` command exactly the way a user would, with small statistics.
"""

import os
import subprocess
import sys

import pytest

FIG_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, FIG_DIR)


def cwlm(*args):
    proc = subprocess.run([sys.executable, "-m", "cwlm.cli", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("figdata")
    d = str(root)
    cwlm("trajectory", "--out", f"{d}/fig1_single", "--T", "2", "--seed", "1")
    cwlm("trajectory", "--out", f"{d}/fig1_ensemble", "--n", "30", "--T", "2", "--seed", "2")
    for tag, sampling in (("T01", "0.1"), ("T04", "0.4")):
        cwlm("trajectory", "--out", f"{d}/fig2_{tag}", "--n", "30", "--T", "2",
             "--hamiltonian-y", "1", "--sampling", sampling, "--seed", "3")
    cwlm("oracle", "precession", "--out", f"{d}/oracle_precession", "--t-max", "2")
    for key, n, sampling in (("n100_T01", "100", "0.1"), ("n500_T01", "120", "0.1"),
                             ("n100_T04", "100", "0.4"), ("n500_T04", "120", "0.4")):
        cwlm("conditioned", "--out", f"{d}/fig3_{key}", "--n", n, "--T", "2",
             "--sampling", sampling, "--seed", "4")
    cwlm("decision", "--out", f"{d}/fig4", "--n", "4000", "--T", "8",
         "--h", "1e-1", "--h", "1e-2", "--seed", "5")
    cwlm("feedback", "single", "--out", f"{d}/fig5", "--I", "0", "--Tf", "1",
         "--cycles", "12", "--n", "1", "--seed", "6")
    for name, I, Tf, cycles in (("fig6_I0_T025", "0", "0.25", "25"),
                                ("fig6_I1_T025", "1", "0.25", "25"),
                                ("fig6_I0_T4", "0", "4", "12")):
        cwlm("feedback", "single", "--out", f"{d}/{name}", "--I", I, "--Tf", Tf,
             "--cycles", cycles, "--n", "10", "--seed", "7")
    cwlm("feedback", "sweep", "--out", f"{d}/fig7", "--I-grid", "0,0.5,1",
         "--Tf-grid", "0.2,0.3", "--cycles", "15", "--n", "20", "--seed", "8")
    return d
