"""Regenerate the committed scene corpus in ``scenes/``."""

import argparse
from pathlib import Path

from powerline_hough.synth import bundle_spec, conformant_spec


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=Path(__file__).resolve().parent.parent / "scenes", type=Path)
    parser.add_argument("--count", type=int, default=12)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        spec = conformant_spec(1000 + k, salt=0.01, clutter_blocks=20, clutter_segments=10)
        (args.out / f"conformant_{k:02d}.json").write_text(spec.to_json() + "\n")
    (args.out / "bundle_seed7.json").write_text(bundle_spec().to_json() + "\n")


if __name__ == "__main__":
    main()
