"""Write the clean calibration images (64x64 PPM) into tests/data/suite."""
import argparse
from pathlib import Path

import numpy as np
from skimage import data
from skimage.transform import resize

from unfoldir.imageio import write_image

NAMES = ("astronaut", "coffee", "chelsea", "rocket", "immunohistochemistry")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=Path(__file__).resolve().parents[1] / "tests" / "data" / "suite")
    ap.add_argument("--size", type=int, default=64)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        img = resize(getattr(data, name)(), (args.size, args.size), anti_aliasing=True)
        write_image(np.transpose(img, (2, 0, 1)), out / f"{name}.ppm")
        print(out / f"{name}.ppm")


if __name__ == "__main__":
    main()
