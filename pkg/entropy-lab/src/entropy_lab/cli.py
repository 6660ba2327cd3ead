"""Command line entry points.

    entropy-lab make-corpus --out corpus.txt [--chars N] [--seed S]
    entropy-lab train --config lab.conf --lam 0.5
    entropy-lab generate --checkpoint ck.pt --out samples.jsonl --n 100
    entropy-lab sweep --config lab.conf
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .data import synthetic_corpus
from .generate import generate_jsonl
from .model import ModelConfig
from .sweep import sweep_and_score
from .train import TrainConfig, train


def cmd_make_corpus(args) -> int:
    text = synthetic_corpus(min_chars=args.chars, seed=args.seed)
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {len(text)} chars to {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    text = Path(cfg.corpus).read_text(encoding="utf-8")
    base = ModelConfig(
        vocab_size=0, dim=cfg.dim, n_layers=cfg.n_layers,
        n_heads=cfg.n_heads, context=cfg.context,
    )
    tc = TrainConfig(
        lam=args.lam, steps=cfg.steps, batch_size=cfg.batch_size,
        lr=cfg.lr, seed=cfg.seed, min_corpus_tokens=cfg.min_corpus_tokens,
    )
    out = args.out or str(Path(cfg.out_dir) / f"checkpoint_lam{args.lam:g}.pt")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    res = train(text, base, tc, out, log_every=args.log_every)
    print(
        f"lam={res.lam:g} final loss {res.final_loss:+.4f} (ce {res.final_ce:.4f}) "
        f"val perplexity {res.val_perplexity:.3f} "
        f"output entropy {res.mean_output_entropy:.3f} nats"
    )
    print(f"checkpoint: {res.checkpoint_path}")
    return 0


def cmd_generate(args) -> int:
    path = generate_jsonl(
        args.checkpoint, args.out, n=args.n,
        max_new_tokens=args.max_new_tokens,
        temperature=args.temperature, seed=args.seed, prompt=args.prompt,
    )
    print(f"wrote {args.n} samples to {path}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    result = sweep_and_score(cfg)
    failed = [o for o in result.outcomes if o.status != "ok"]
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="entropy-lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-corpus", help="write a synthetic training corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--chars", type=int, default=400_000, help="minimum corpus size (default 400000)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_make_corpus)

    p = sub.add_parser("train", help="train one model at one lambda")
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--out", help="checkpoint path (default under out_dir)")
    p.add_argument("--log-every", type=int, default=0)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("generate", help="sample a checkpoint into JSONL")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-new-tokens", type=int, default=256)
    p.add_argument("--temperature", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prompt", default="\n")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("sweep", help="train the lambda grid and score every run")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_sweep)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
