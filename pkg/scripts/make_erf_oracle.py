"""Regenerate src/qdteleport/data/erf_oracle.json with mpmath at 40 digits."""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40

OUT = Path(__file__).resolve().parents[1] / "src" / "qdteleport" / "data" / "erf_oracle.json"


def faddeeva(z):
    return mp.exp(-z * z) * mp.erfc(-1j * z)


def grid(re_vals, im_vals):
    return [mp.mpc(x, y) for x in re_vals for y in im_vals]


def main():
    re_erf = [-4.0, -2.5, -1.2, -0.3, 0.0, 0.05, 0.4, 1.0, 2.2, 3.7]
    im_erf = [-3.0, -1.1, -0.2, 0.0, 0.15, 0.6, 1.3, 2.6]
    zs_erf = [z for z in grid(re_erf, im_erf) if z != 0]
    re_w = [-30.0, -6.0, -2.0, -0.5, 0.0, 0.3, 1.0, 4.5, 12.0, 200.0]
    im_w = [0.0, 0.01, 0.4, 1.0, 2.5, 9.8, 40.0, -0.3, -1.5]
    zs_w = grid(re_w, im_w)

    def pack(zs, fn):
        return {
            "z": [[float(z.real), float(z.imag)] for z in zs],
            "value": [[float(v.real), float(v.imag)] for v in (mp.mpc(fn(z)) for z in zs)],
        }

    data = {"digits": 40, "erf": pack(zs_erf, mp.erf), "faddeeva": pack(zs_w, faddeeva)}
    OUT.write_text(json.dumps(data, indent=1) + "\n")


if __name__ == "__main__":
    main()
