#!/usr/bin/env python3
"""Convert LASA handwriting .mat files to the generic trajectory CSV schema.

Usage: lasa_to_csv.py <DataSet dir> <out dir> [Shape ...]

Each output row is `traj_id,t,x1,x2` (positions only); the loader computes
velocities. Demonstrations are numbered 1..7 in file order.
"""
import pathlib
import sys

import scipy.io


def convert(mat_path: pathlib.Path, out_path: pathlib.Path) -> None:
    demos = scipy.io.loadmat(str(mat_path), simplify_cells=True)["demos"]
    with out_path.open("w", encoding="utf-8") as out:
        out.write("traj_id,t,x1,x2\n")
        for k, demo in enumerate(demos, start=1):
            pos, t = demo["pos"], demo["t"]
            for i in range(pos.shape[1]):
                out.write(f"{k},{t[i]:.17g},{pos[0, i]:.17g},{pos[1, i]:.17g}\n")


def main() -> int:
    if len(sys.argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    src, dst = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])
    shapes = sys.argv[3:] or ["Angle", "CShape", "Zshape", "NShape", "Sine", "BendedLine"]
    dst.mkdir(parents=True, exist_ok=True)
    for shape in shapes:
        convert(src / f"{shape}.mat", dst / f"{shape}.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
