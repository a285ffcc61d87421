#!/usr/bin/env python3
"""Validate an experiment directory against the schemas in schemas/."""

import argparse
import json
import pathlib
import sys

import jsonschema

SCHEMA_FOR = {
    "manifest.json": "manifest",
    "geometry.json": "geometry",
    "sparseness.json": "sparseness",
    "cascade.json": "cascade",
    "oscillation.json": "oscillation",
    "harmonic.json": "harmonic",
}


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--schemas", required=True, type=pathlib.Path)
    ap.add_argument("--require", nargs="*", default=[], help="files that must be present")
    ap.add_argument("run_dir", type=pathlib.Path)
    args = ap.parse_args()

    schemas = {}
    for name in set(SCHEMA_FOR.values()) | {"config"}:
        s = load(args.schemas / f"{name}.schema.json")
        jsonschema.Draft202012Validator.check_schema(s)
        schemas[name] = s

    failures = []

    def check(doc, schema, label):
        errors = sorted(jsonschema.Draft202012Validator(schemas[schema]).iter_errors(doc), key=str)
        for e in errors:
            failures.append(f"{label}: {'/'.join(map(str, e.path))}: {e.message}")
        if not errors:
            print(f"ok {label}")

    manifest_path = args.run_dir / "manifest.json"
    if not manifest_path.exists():
        print(f"missing {manifest_path}", file=sys.stderr)
        return 1
    manifest = load(manifest_path)
    check(manifest, "manifest", "manifest.json")
    check(manifest.get("config", {}), "config", "manifest.json#config")

    for snap in manifest.get("run", {}).get("snapshots", []):
        if not (args.run_dir / snap["file"]).exists():
            failures.append(f"missing snapshot {snap['file']}")
    for block in manifest.get("blocks", []):
        if block["status"] != "ok":
            failures.append(f"block {block['name']}: {block['status']} {block['message']}")
        for f in block["files"]:
            if not (args.run_dir / f).exists():
                failures.append(f"block {block['name']}: missing {f}")
    for f in args.require:
        if not (args.run_dir / f).exists():
            failures.append(f"missing required {f}")

    for fname, schema in SCHEMA_FOR.items():
        p = args.run_dir / fname
        if fname != "manifest.json" and p.exists():
            check(load(p), schema, fname)

    for msg in failures:
        print(msg, file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
