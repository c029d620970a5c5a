"""Regenerate the versioned golden fixtures under tests/golden/.

Two families:
  * circuit_<variant>_d3_r1.txt  -- one-round circuit text dumps
  * scan_<variant>_d3.txt        -- single-fault scan reports at d=3,
    rounds=3, with the documentary policy (two-sided leakage at every
    site, p = p_leak = p_init_leak = 1e-3); matches the CLI defaults of
    ``toricleak scan``.

Run from the repository root: python3 scripts/make_goldens.py [--which all]
"""
from __future__ import annotations

import argparse
from pathlib import Path

from toricleak.circuits import VARIANTS, build_program, program_to_text
from toricleak.cli import SCAN_INIT_LEAK, SCAN_P, SCAN_R
from toricleak.decoder import Decoder
from toricleak.noise import NoiseModel
from toricleak.scanner import scan, verdict_to_text
from toricleak.sim import compile_program

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"


def circuits() -> None:
    for variant in VARIANTS:
        path = GOLDEN / f"circuit_{variant}_d3_r1.txt"
        path.write_text(program_to_text(build_program(variant, 3, 1)))
        print("wrote", path)


def scans() -> None:
    noise = NoiseModel(p=SCAN_P, r=SCAN_R, p_init_leak=SCAN_INIT_LEAK)
    for variant in VARIANTS:
        compiled = compile_program(build_program(variant, 3, 3), noise)
        verdict = scan(compiled, decoder=Decoder(compiled.lattice), max_faults=1)
        path = GOLDEN / f"scan_{variant}_d3.txt"
        path.write_text(verdict_to_text(compiled, verdict))
        print("wrote", path)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--which", choices=("circuits", "scans", "all"), default="all")
    args = ap.parse_args()
    if args.which in ("circuits", "all"):
        circuits()
    if args.which in ("scans", "all"):
        scans()


if __name__ == "__main__":
    main()
