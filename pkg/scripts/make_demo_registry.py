#!/usr/bin/env python3
"""Build a small synthetic demo registry for the service and the what-if UI.

    python scripts/make_demo_registry.py --out registry
    autorater serve --registry registry
"""

import argparse

from autorater.experiments import build_demo_registry


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="registry")
    parser.add_argument("--n", type=int, default=240)
    parser.add_argument("--epochs", type=int, default=12)
    args = parser.parse_args()
    out = build_demo_registry(args.out, n=args.n, train_epochs=args.epochs)
    print(f"demo registry written to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
