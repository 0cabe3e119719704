"""PSNR on the calibration suite as a function of the stage count K."""
import argparse
from pathlib import Path

import numpy as np

from unfoldir.config import SolverConfig
from unfoldir.metrics import psnr, ssim
from unfoldir.pipeline import run_pipeline
from unfoldir.suite import SEED, degrade, load_suite

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--suite", default=DATA / "suite")
    ap.add_argument("--max-stages", type=int, default=6)
    args = ap.parse_args()
    clean = load_suite(args.suite)
    rng = np.random.default_rng(SEED)
    dark = {k: degrade(v, rng) for k, v in clean.items()}
    print("K  mean_psnr  mean_ssim  mean_final_isic")
    for k in range(1, args.max_stages + 1):
        cfg = SolverConfig(stages=k, output_mode="relit")
        p, s, i = [], [], []
        for name, img in dark.items():
            res = run_pipeline(img, cfg)
            p.append(psnr(res.output, clean[name]))
            s.append(ssim(res.output, clean[name]))
            i.append(res.final_isic)
        print(f"{k}  {np.mean(p):9.3f}  {np.mean(s):9.4f}  {np.mean(i):15.3f}")


if __name__ == "__main__":
    main()
