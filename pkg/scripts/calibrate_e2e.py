"""Run the end-to-end suite once and freeze its PSNR margins.

The acceptance test compares later runs against the frozen margins
(each must stay within 0.2 dB).  Only rerun this deliberately.
"""
import argparse
import json
from pathlib import Path

from unfoldir.suite import NOISE_SIGMA, DARKEN_GAMMA, SEED, TUNE_BUDGET, load_suite, run_suite

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--suite", default=DATA / "suite")
    ap.add_argument("--out", default=DATA / "calibration.json")
    args = ap.parse_args()
    result = run_suite(load_suite(args.suite))
    for name, m in result.margins.items():
        print(f"{name:24s} input={result.input_psnr[name]:.3f} output={result.output_psnr[name]:.3f} margin={m:.3f}")
    record = {
        "darken_gamma": DARKEN_GAMMA,
        "noise_sigma": NOISE_SIGMA,
        "seed": SEED,
        "tune_budget": TUNE_BUDGET,
        "margins_db": {k: round(v, 4) for k, v in result.margins.items()},
        "tuned_config": result.config.to_dict(),
    }
    Path(args.out).write_text(json.dumps(record, indent=2) + "\n")


if __name__ == "__main__":
    main()
