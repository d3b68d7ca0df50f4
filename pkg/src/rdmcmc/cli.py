"""Command-line entry point: ``rdmcmc <verb> [--config FILE] [--key value ...]``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import archive, lossless
from .annealer import AnnealerConfig, Schedule, anneal, exhaustive_search
from .config import KEYS, ExperimentConfig, default_k, load_config
from .context import CYCLIC, ContextTable, build_counts, infer_alphabet
from .denoise import NoiseModel, denoise
from .image import Image2D, parse_offsets, read_pbm, write_pbm, DEFAULT_OFFSETS
from .sliding import apply_sb, enumerate_sb_codes, label_sequence, sb_anneal
from .sources import SourceSpec, generate

log = logging.getLogger("rdmcmc")

VERBS = ("compress", "decompress", "denoise", "trace", "sweep", "oracle")


def read_symbols(path) -> np.ndarray:
    """Text file of single-digit symbols; whitespace is ignored."""
    text = "".join(Path(path).read_text().split())
    if not text.isdigit():
        raise ValueError(f"{path}: expected digits 0-9 only")
    return np.frombuffer(text.encode(), dtype=np.uint8).astype(np.int64) - ord("0")


def write_symbols(path, y) -> None:
    Path(path).write_text("".join(str(int(v)) for v in y) + "\n")


def load_input(cfg: ExperimentConfig, path=None) -> tuple[np.ndarray, Image2D | None]:
    path = path or cfg.input
    if path is None:
        return generate(SourceSpec(cfg.source, cfg.p, cfg.n, cfg.data_seed)), None
    if str(path).lower().endswith(".pbm"):
        offsets = parse_offsets(cfg.offsets) if cfg.offsets else DEFAULT_OFFSETS
        img = read_pbm(path, offsets)
        return img.pixels, img
    return read_symbols(path), None


def save_output(path, y, img: Image2D | None) -> None:
    if img is not None:
        write_pbm(path, img.with_pixels(y))
    else:
        write_symbols(path, y)


def make_schedule(cfg: ExperimentConfig) -> Schedule:
    if cfg.schedule == "logarithmic":
        return Schedule.logarithmic(cfg.T0, cfg.sweep_length)
    return Schedule.geometric(cfg.gamma, cfg.beta0, cfg.sweep_length)


def order_for(cfg: ExperimentConfig, n: int, a: int, img: Image2D | None) -> int:
    if img is not None:
        return len(img.offsets)
    return cfg.k if cfg.k is not None else default_k(n, a)


def table_for(cfg: ExperimentConfig, n: int, k: int, img: Image2D | None) -> ContextTable:
    if img is not None:
        return img.context_table()
    return ContextTable.for_mode(n, k, cfg.boundary)


def quantize(x, cfg: ExperimentConfig, alpha: float, seed: int, img=None, init=None,
             trace_stride=None):
    """One block or sliding-block run.  Returns (y, trace or None, sb code or None)."""
    a = infer_alphabet(x)
    n = x.size
    k = order_for(cfg, n, a, img)
    r = int(round(cfg.r_mult * n))
    if cfg.mode == "sb":
        if img is not None:
            raise ValueError("sliding-block mode works on 1-D input only")
        code = sb_anneal(x, cfg.k_f, k, alpha, make_schedule(cfg), r, seed, init=init)
        return apply_sb(x, code), None, code
    acfg = AnnealerConfig(k=k, alpha=alpha, r=r, seed=seed, schedule=make_schedule(cfg),
                          init="source" if init is None else "given", init_sequence=init,
                          alphabet_size=a, table=table_for(cfg, n, k, img),
                          trace_stride=trace_stride)
    y, trace = anneal(x, acfg)
    return y, trace, None


def summarize(x, y, cfg: ExperimentConfig, img=None) -> dict:
    a = max(infer_alphabet(x, y), 2)
    n = x.size
    k = order_for(cfg, n, a, img)
    if cfg.mode == "sb":
        cm = build_counts(y, k, CYCLIC, a)
    else:
        cm = build_counts(y, k, alphabet_size=a, table=table_for(cfg, n, k, img))
    out = {
        "Hk_bits": cm.entropy(),
        "distortion": float(np.mean(x != y)),
        "lz_rate": lossless.lz78_length(y, a) / n,
    }
    lin_k = min(k, n - 1)
    out["le_rate"] = lossless.enumerative_length(y, lin_k, a) / n
    return out


def cmd_compress(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    x, img = load_input(cfg)
    a = max(infer_alphabet(x), 2)
    y, _, _ = quantize(x, cfg, cfg.alphas[0], cfg.seeds[0], img)
    s = summarize(x, y, cfg, img)
    k = order_for(cfg, x.size, a, img)
    arc = archive.Archive(y, k, a, img.width if img else None, img.height if img else None)
    size = None
    if cfg.output:
        size = archive.write(cfg.output, arc)
    print(f"Hk={s['Hk_bits']:.6f} dn={s['distortion']:.6f} "
          f"lz_rate={s['lz_rate']:.6f} le_rate={s['le_rate']:.6f}", file=out)
    if size is not None and cfg.png_size:
        print(f"archive {size} bytes vs png {cfg.png_size} bytes "
              f"({100 * (1 - size / cfg.png_size):.1f}% smaller)", file=out)
    return 0


def cmd_decompress(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    if cfg.input is None or cfg.output is None:
        raise ValueError("decompress needs --input ARCHIVE and --output PATH")
    arc = archive.read(cfg.input)
    img = None
    if arc.width is not None:
        img = Image2D(arc.width, arc.height, arc.y)
    save_output(cfg.output, arc.y, img)
    print(f"n={arc.y.size} k={arc.k} alphabet={arc.alphabet_size}", file=out)
    return 0


def cmd_denoise(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    z, img = load_input(cfg)
    if cfg.noise_pmf:
        noise = NoiseModel(tuple(cfg.noise_pmf))
    elif cfg.delta is not None:
        if cfg.delta == 0:
            x_hat = z.copy()
            return _denoise_report(cfg, z, x_hat, img, None, None, out)
        noise = NoiseModel.bsc(cfg.delta)
    else:
        raise ValueError("denoise needs --delta or --noise-pmf")
    kwargs = dict(k=order_for(cfg, z.size, noise.M, img), schedule=make_schedule(cfg),
                  seed=cfg.seeds[0], r_per_symbol=cfg.r_mult, tol=cfg.tol, prefix=cfg.prefix)
    alpha = cfg.alpha[0] if cfg.alpha else None
    if img is not None:
        kwargs.update(table=img.context_table(), window=img.window_table(cfg.window or 1),
                      table_for=img.prefix_table)
        res = denoise(z, noise, m=0, alpha=alpha, **kwargs)
    else:
        res = denoise(z, noise, m=4 if cfg.window is None else cfg.window, alpha=alpha, **kwargs)
    return _denoise_report(cfg, z, res.x_hat, img, res.alpha, res.search, out)


def _denoise_report(cfg, z, x_hat, img, alpha, search, out) -> int:
    if cfg.output:
        save_output(cfg.output, x_hat, img)
    parts = [f"alpha={alpha:.4f}" if alpha is not None else "alpha=none"]
    if search is not None:
        parts.append(f"converged={search.converged} probes={len(search.probes)}")
    parts.append(f"changed={float(np.mean(z != x_hat)):.6f}")
    if cfg.clean:
        clean, _ = load_input(cfg, cfg.clean)
        if clean.shape != x_hat.shape:
            raise ValueError("clean reference length differs from the noisy input")
        parts.append(f"ber={float(np.mean(clean != x_hat)):.6f}")
        parts.append(f"noisy_ber={float(np.mean(clean != z)):.6f}")
    print(" ".join(parts), file=out)
    return 0


def cmd_trace(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    if cfg.mode != "block":
        raise ValueError("trace is available in block mode")
    x, img = load_input(cfg)
    _, trace, _ = quantize(x, cfg, cfg.alphas[0], cfg.seeds[0], img,
                           trace_stride=cfg.sweep_length or x.size)
    target = cfg.trace or cfg.output
    if target:
        trace.write_csv(target)
    else:
        trace.write_csv(out)
    return 0


SWEEP_HEADER = ("alpha", "seed", "distortion", "Hk_bits", "energy_per_symbol", "lz_rate")


def _sweep_seed(cfg: ExperimentConfig, x, img, seed: int) -> list[tuple]:
    rows = []
    init = None
    for alpha in cfg.alphas:
        y, _, code = quantize(x, cfg, alpha, seed, img, init)
        s = summarize(x, y, cfg, img)
        rows.append((alpha, seed, s["distortion"], s["Hk_bits"],
                     s["Hk_bits"] + alpha * s["distortion"], s["lz_rate"]))
        log.info("alpha=%g seed=%d D=%.5f Hk=%.5f", alpha, seed, s["distortion"], s["Hk_bits"])
        if cfg.warm_start:
            init = code if code is not None else y
    return rows


def run_sweep(cfg: ExperimentConfig) -> list[tuple]:
    """Per-seed rows in (alpha, seed) order followed by per-alpha means (seed ``mean``)."""
    if cfg.mode not in ("block", "sb"):
        raise ValueError("sweep runs in block or sb mode")
    x, img = load_input(cfg)
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        per_seed = list(pool.map(lambda s: _sweep_seed(cfg, x, img, s), cfg.seeds))
    rows = []
    for i, alpha in enumerate(cfg.alphas):
        rows.extend(r[i] for r in per_seed)
    for i, alpha in enumerate(cfg.alphas):
        vals = np.array([r[i][2:] for r in per_seed])
        rows.append((alpha, "mean", *vals.mean(axis=0).tolist()))
    return rows


def cmd_sweep(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    rows = run_sweep(cfg)
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SWEEP_HEADER)
            w.writerows(rows)
    else:
        w = csv.writer(out)
        w.writerow(SWEEP_HEADER)
        w.writerows(rows)
    return 0


def cmd_oracle(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    x, img = load_input(cfg)
    a = max(infer_alphabet(x), 2)
    k = order_for(cfg, x.size, a, img)
    alpha = cfg.alphas[0]
    if cfg.mode == "sb":
        code, e = enumerate_sb_codes(x, cfg.k_f, k, alpha)
        labels = label_sequence(x, cfg.k_f, a)
        y = apply_sb(x, code, labels)
        print(f"energy={e:.9f} code={''.join(map(str, code.f))} y={''.join(map(str, y))}", file=out)
        return 0
    table = table_for(cfg, x.size, k, img)
    y, e = exhaustive_search(x, k, alpha, alphabet_size=a, table=table)
    print(f"energy={e:.9f} y={''.join(map(str, y))}", file=out)
    return 0


COMMANDS = {
    "compress": cmd_compress,
    "decompress": cmd_decompress,
    "denoise": cmd_denoise,
    "trace": cmd_trace,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rdmcmc", description="Lossy compression by annealed Gibbs sampling.")
    parser.add_argument("verb", choices=VERBS)
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    for f in dataclasses.fields(ExperimentConfig):
        parser.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None,
                            metavar=f.name.upper())
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {key: getattr(args, key) for key in KEYS}
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.verb](cfg)
    except (ValueError, OSError) as exc:
        print(f"rdmcmc {args.verb}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
