"""Command-line interface: generate, validate-overlap, nl, plot, bench, hyperparams.

Exit codes are a stable contract: 0 success, 1 validation failure,
2 convergence failure, 3 NL/API failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .archetype import Archetype, load_archetypes_jsonl, sample_hyperparams
from .errors import ArchetypeValidationError, NLError, NonConvergenceError
from .metrics import evaluate_dataset
from .mixture import MixtureModel, sample_mixture_model
from .nl import ClientConfig, TemplateKind, describe_to_archetype, render_prompt
from .overlap import overlap_report_rows, pairwise_overlaps
from .postprocess import distort, wrap_around_sphere
from .sampling import Dataset, dataset_from_csv, dataset_to_csv, sample_dataset

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONVERGENCE = 2
EXIT_NL = 3


def derive_seed(master_seed: int, archetype_name: str, index: int) -> int:
    """Stable per-dataset seed: sha256 of 'master|name|index', first 8 bytes."""
    digest = hashlib.sha256(f"{master_seed}|{archetype_name}|{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class RunManifest:
    """Trace from every emitted dataset back to (archetype, seed)."""

    tool_version: str
    created_at: str
    master_seed: int
    entries: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "created_at": self.created_at,
            "master_seed": self.master_seed,
            "entries": self.entries,
        }


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _generate_one(archetype_dict, index, seed, out_dir, do_distort, do_wrap):
    """Worker: one dataset from one archetype (process-pool friendly)."""
    a = Archetype.from_dict(archetype_dict)
    rng = np.random.default_rng(seed)
    model = sample_mixture_model(a, rng)
    dataset = sample_dataset(model, rng)
    points = dataset.points
    if do_distort:
        points = distort(points, seed=seed)
    if do_wrap:
        points = wrap_around_sphere(points)
    dataset = Dataset(points, dataset.labels, dataset.archetype_name)
    path = os.path.join(out_dir, f"{a.name}_{index:03d}.csv")
    tmp_path = path + f".{os.getpid()}.tmp"
    dataset_to_csv(dataset, tmp_path)
    os.replace(tmp_path, path)
    return path


def _load_archetype_args(args) -> list[Archetype]:
    if args.inline:
        return [Archetype.from_json(args.inline)]
    return load_archetypes_jsonl(args.archetypes)


def cmd_generate(args) -> int:
    archetypes = _load_archetype_args(args)
    os.makedirs(args.out_dir, exist_ok=True)
    manifest = RunManifest(
        tool_version=__version__,
        created_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        master_seed=args.seed,
    )
    jobs = []
    for a in archetypes:
        for index in range(args.n_datasets):
            seed = derive_seed(args.seed, a.name, index)
            jobs.append((a, index, seed))

    worst = EXIT_OK
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(
                    _generate_one, a.to_dict(), index, seed,
                    args.out_dir, args.distort, args.wrap,
                )
                for a, index, seed in jobs
            ]
            outcomes = []
            for future in futures:
                try:
                    outcomes.append(("ok", future.result()))
                except Exception as exc:
                    outcomes.append(("error", exc))
    else:
        outcomes = []
        for a, index, seed in jobs:
            try:
                path = _generate_one(
                    a.to_dict(), index, seed, args.out_dir, args.distort, args.wrap
                )
                outcomes.append(("ok", path))
            except Exception as exc:
                outcomes.append(("error", exc))

    for (a, index, seed), (status, payload) in zip(jobs, outcomes):
        entry = {
            "archetype": a.name,
            "index": index,
            "seed": seed,
            "distort": bool(args.distort),
            "wrap": bool(args.wrap),
        }
        if status == "ok":
            entry["path"] = os.path.basename(payload)
            entry["status"] = "ok"
        else:
            if isinstance(payload, NonConvergenceError):
                entry["status"] = "convergence-failure"
                worst = max(worst, EXIT_CONVERGENCE)
            elif isinstance(payload, (ArchetypeValidationError, ValueError)):
                entry["status"] = "validation-failure"
                worst = max(worst, EXIT_VALIDATION)
            else:
                raise payload
            entry["error"] = str(payload)
            print(f"error: {a.name}[{index}]: {payload}", file=sys.stderr)
        manifest.entries.append(entry)

    _write_atomic(
        os.path.join(args.out_dir, "manifest.json"),
        json.dumps(manifest.to_dict(), indent=2) + "\n",
    )
    written = sum(1 for e in manifest.entries if e["status"] == "ok")
    print(f"wrote {written}/{len(jobs)} datasets to {args.out_dir}")
    return worst


def cmd_validate_overlap(args) -> int:
    if args.model:
        with open(args.model, "r", encoding="utf-8") as fh:
            model = MixtureModel.from_json(fh.read())
    else:
        with open(args.archetype, "r", encoding="utf-8") as fh:
            a = Archetype.from_json(fh.read())
        rng = np.random.default_rng(args.seed)
        model = sample_mixture_model(a, rng)
    reports = pairwise_overlaps(model, include_exact=args.exact)
    rows = overlap_report_rows(reports)
    text = "\n".join(rows) + "\n"
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    if not reports:
        print("note: single-cluster model has no pairwise overlaps")
        return EXIT_OK
    max_alpha = max(r.alpha_lda for r in reports)
    neighbor_best: dict[int, float] = {}
    for r in reports:
        for node in (r.i, r.j):
            neighbor_best[node] = max(neighbor_best.get(node, 0.0), r.alpha_lda)
    min_neighbor = min(neighbor_best.values())
    print(
        f"summary: max pairwise alpha_lda={max_alpha:.6g}, "
        f"smallest per-cluster max-neighbor alpha_lda={min_neighbor:.6g}"
    )
    return EXIT_OK


def cmd_nl(args) -> int:
    if not args.description or not args.description.strip():
        raise NLError("description must be nonempty")
    if args.dry_run:
        print(render_prompt(TemplateKind.PARAMS, args.description))
        print()
        print(render_prompt(TemplateKind.IDENTIFIER, args.description))
        return EXIT_OK
    config = ClientConfig(base_url=args.base_url, model=args.model)
    result, _ = describe_to_archetype(args.description, config, log_path=args.log)
    print(result.to_json())
    return EXIT_OK


_PALETTE = (
    "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee",
    "#aa3377", "#bbbbbb", "#222255", "#225555", "#552222",
)


def _svg_scatter(dataset: Dataset, width=640, height=480, margin=40) -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
    ]
    if dataset.n_samples:
        x, y = dataset.points[:, 0], dataset.points[:, 1]
        span = max(np.ptp(x), np.ptp(y), 1e-12)
        sx = lambda v: margin + (v - x.min()) / span * (width - 2 * margin)
        sy = lambda v: height - margin - (v - y.min()) / span * (height - 2 * margin)
        for row, label in zip(dataset.points, dataset.labels):
            color = _PALETTE[int(label) % len(_PALETTE)]
            parts.append(
                f'<circle cx="{sx(row[0]):.2f}" cy="{sy(row[1]):.2f}" r="3" '
                f'fill="{color}" fill-opacity="0.7"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_plot(args) -> int:
    dataset = dataset_from_csv(args.dataset)
    if dataset.dim != 2:
        raise ArchetypeValidationError(
            [
                f"plot requires 2-D data, got dim={dataset.dim}; "
                "dimensionality reduction is out of scope"
            ]
        )
    _write_atomic(args.out, _svg_scatter(dataset))
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    archetypes = _load_archetype_args(args)
    rows = ["archetype,seed,max_overlap,ami,ari,silhouette"]
    for a in archetypes:
        for index in range(args.n_datasets):
            seed = derive_seed(args.seed, a.name, index)
            rng = np.random.default_rng(seed)
            model = sample_mixture_model(a, rng)
            dataset = sample_dataset(model, rng)
            scores = evaluate_dataset(dataset.points, dataset.labels, a.n_clusters, rng)
            rows.append(
                f"{a.name},{seed},{a.max_overlap!r},"
                f"{scores['ami']:.6f},{scores['ari']:.6f},{scores['silhouette']:.6f}"
            )
    text = "\n".join(rows) + "\n"
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_hyperparams(args) -> int:
    with open(args.archetype, "r", encoding="utf-8") as fh:
        a = Archetype.from_json(fh.read())
    bounds = json.loads(args.bounds) if args.bounds else None
    if bounds is not None:
        bounds = {key: tuple(value) for key, value in bounds.items()}
    rng = np.random.default_rng(args.seed)
    try:
        variants = sample_hyperparams(a, args.n_variants, bounds, rng)
    except ValueError as exc:
        raise ArchetypeValidationError([str(exc)]) from exc
    for variant in variants:
        print(variant.to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clustergen",
        description="Synthetic cluster benchmark data from dataset archetypes",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample datasets from archetypes")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--archetypes", help="JSONL file, one archetype per line")
    src.add_argument("--inline", help="single archetype as inline JSON")
    p.add_argument("--n-datasets", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--distort", action="store_true", help="apply the random-network transform")
    p.add_argument("--wrap", action="store_true", help="wrap datasets around the sphere")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate-overlap", help="report pairwise overlaps of a model")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="mixture model JSON file")
    src.add_argument("--archetype", help="archetype JSON file (sampled with --seed)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="include the exact Gaussian oracle")
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(func=cmd_validate_overlap)

    p = sub.add_parser("nl", help="create an archetype from an English description")
    p.add_argument("description")
    p.add_argument("--dry-run", action="store_true", help="render prompts only, no network")
    p.add_argument("--base-url", default="https://api.openai.com/v1")
    p.add_argument("--model", default="gpt-4o")
    p.add_argument("--log", help="append prompt exchanges to this JSONL file")
    p.set_defaults(func=cmd_nl)

    p = sub.add_parser("plot", help="scatter-plot a 2-D dataset as SVG")
    p.add_argument("dataset")
    p.add_argument("out")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("bench", help="K-Means difficulty harness over archetypes")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--archetypes")
    src.add_argument("--inline")
    p.add_argument("--n-datasets", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("hyperparams", help="Poisson-resample archetype hyperparameters")
    p.add_argument("--archetype", required=True, help="archetype JSON file")
    p.add_argument("--n-variants", type=int, default=5)
    p.add_argument("--bounds", help='JSON like {"n_clusters": [2, 20]}')
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_hyperparams)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NL
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ArchetypeValidationError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
