#!/usr/bin/env python3
"""Record real service responses as fixtures for the frontend test suite.

Builds a demo registry, runs the service in-process, replays a scripted
what-if interaction (baseline predict, planted-feature edit, explain), and
freezes the request/response pairs plus the planted-signal directions into
frontend/test/fixtures/demo_bundle.json.
"""

import argparse
import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from autorater.corpus.synthetic import DEFAULT_PARAMETRIC_WEIGHTS
from autorater.experiments import build_demo_registry
from autorater.service import create_app


def midpoint_body(schema: dict, bundle: str = "demo") -> dict:
    parametric = {}
    for f in schema["features"]:
        if f["kind"] == "numeric":
            parametric[f["name"]] = (f["numeric_min"] + f["numeric_max"]) / 2
        else:
            parametric[f["name"]] = f["vocabulary"][0]
    return {"bundle": bundle, "parametric": parametric}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="frontend/test/fixtures/demo_bundle.json")
    parser.add_argument("--n", type=int, default=240)
    parser.add_argument("--epochs", type=int, default=12)
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        registry = build_demo_registry(Path(tmp) / "registry", n=args.n, train_epochs=args.epochs)
        app = create_app(registry)
        with TestClient(app) as client:
            schema = client.get("/schema").json()
            bundles = client.get("/bundles").json()

            baseline_body = midpoint_body(schema)
            baseline = client.post("/predict", json=baseline_body).json()

            # horsepower carries a positive planted weight: push it to max
            edited_body = json.loads(json.dumps(baseline_body))
            hp = next(f for f in schema["features"] if f["name"] == "horsepower")
            edited_body["parametric"]["horsepower"] = hp["numeric_max"]
            edited = client.post("/predict", json=edited_body).json()

            explain = client.post("/explain", json={**edited_body, "score": "total"}).json()

    fixture = {
        "planted_direction": {"feature": "horsepower", "weight": DEFAULT_PARAMETRIC_WEIGHTS["horsepower"]},
        "schema": schema,
        "bundles": bundles,
        "baseline": {"request": baseline_body, "response": baseline},
        "edited": {"request": edited_body, "response": edited},
        "explain": {"request": {**edited_body, "score": "total"}, "response": explain},
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(fixture, indent=1))
    base_total = baseline["predictions"]["total"]["raw"]
    edit_total = edited["predictions"]["total"]["raw"]
    print(f"fixture written to {out}")
    print(f"total score: baseline {base_total:.3f} -> edited {edit_total:.3f} (expect increase)")
    if edit_total <= base_total:
        print("WARNING: planted direction not reflected; retrain with more epochs")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
