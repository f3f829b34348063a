"""Write example layout documents.

``rarity_tapster.json`` is the default two-wing rig; ``rarity_tapster_broken.json``
adds a 0.3 rad shifter on path b so the congruence check fails;
``mach_zehnder.json`` is the single-particle rig at phi = 0.
"""

import argparse
from pathlib import Path

from shadowsim.interferometer import build_mach_zehnder, build_rarity_tapster, with_extra_phase
from shadowsim.layoutfile import save_layout


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", nargs="?", default="layouts")
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--beta", type=float, default=0.0)
    args = ap.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    rt = build_rarity_tapster(args.alpha, args.beta)
    save_layout(rt, out / "rarity_tapster.json")
    save_layout(with_extra_phase(rt, "b", 0.3), out / "rarity_tapster_broken.json")
    save_layout(build_mach_zehnder(0.0), out / "mach_zehnder.json")
    for p in sorted(out.glob("*.json")):
        print(p)


if __name__ == "__main__":
    main()
