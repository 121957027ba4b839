"""Command line for the pipeline stages and the service.

Subcommands stay thin: argument parsing plus one call into the core package
(or, for `infill`/`suggest` with --server, one HTTP request to a running
service). Configuration comes from --config TOML with flag overrides;
--seed pins every source of randomness.
"""

from __future__ import annotations

import json
from pathlib import Path
from random import Random

import click
import httpx

from .bpe import encode
from .config import AppConfig, load_config
from .dataprep import generate_examples, write_examples
from .decoding import DecodeRequest, InfillOptions, InfillTask, infill, decode_diversified
from .diversify import SubsetPolicy, plan_subsets
from .evaluation import (
    eval_ppl_suite,
    fidelity,
    render_ppl_report,
    sample_frame_subsets,
)
from .lexicon import LexiconError
from .runtime import load_runtime
from .scoring import save_ngram, train_ngram
from .suggest import SUGGESTION_SOURCE, suggest_frames
from .workflows import neighbor_frames


def _config(ctx, **overrides) -> AppConfig:
    return load_config(ctx.obj.get("config"), overrides=overrides)


def _runtime(ctx, **overrides):
    try:
        return load_runtime(_config(ctx, **overrides))
    except FileNotFoundError as e:
        raise click.ClickException(str(e))


def _parse_frames(spec: str | None) -> list[list[str]]:
    """`"[A] [B];[C]"` -> one frame list per blank (';' separates blanks)."""
    if not spec:
        return []
    groups = []
    for part in spec.split(";"):
        ids = [f.strip() for f in part.replace(",", " ").split() if f.strip()]
        groups.append(ids)
    return groups


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="TOML config file; flags override it.")
@click.pass_context
def main(ctx, config_path):
    ctx.obj = {"config": config_path}


@main.command()
@click.option("--variant", type=click.Choice(["ILM", "S", "M", "A"]), default="ILM")
@click.option("--ordered/--unordered", default=False)
@click.option("--blanks", type=click.Choice(["each", "all"]), default="each")
@click.option("--slots", type=int, default=None, help="Pad frame prefixes to this many slots.")
@click.option("--stories", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), required=True, help="Output prefix.")
@click.option("--seed", type=int, default=0)
@click.pass_context
def prepare(ctx, variant, ordered, blanks, slots, stories, out, seed):
    """Format the story corpus into infilling training examples."""
    rt = _runtime(ctx, stories=stories)
    examples = generate_examples(
        rt.stories, variant, Random(seed), ordered=ordered, blanks=blanks, slots=slots
    )
    text_path = Path(f"{out}.txt")
    meta_path = Path(f"{out}.meta.jsonl")
    write_examples(examples, text_path, meta_path)
    click.echo(f"wrote {len(examples)} examples to {text_path} (+ {meta_path.name})")


@main.command("train-lm")
@click.option("--input", "input_path", type=click.Path(exists=True), required=True,
              help="Plain-text examples, one per line.")
@click.option("--order", type=int, default=3)
@click.option("--discount", type=float, default=0.75)
@click.option("--out", type=click.Path(), required=True)
@click.pass_context
def train_lm(ctx, input_path, order, discount, out):
    """Train the n-gram language model on formatted examples."""
    rt = _runtime(ctx)
    with open(input_path, encoding="utf-8") as f:
        corpus = [encode(line.rstrip("\n"), rt.vocab) for line in f if line.strip()]
    model = train_ngram(corpus, order, rt.vocab.size, discount)
    save_ngram(model, out)
    click.echo(f"trained order-{order} model on {len(corpus)} sequences -> {out}")


@main.command("infill")
@click.option("--sentences", default=None, help="Pipe-separated sentences.")
@click.option("--file", "file_path", type=click.Path(exists=True), default=None,
              help="JSON task file: {sentences, blanks, frames}.")
@click.option("--blank", "blank_opts", type=int, multiple=True)
@click.option("--frames", "frames_spec", default=None,
              help="Frame ids per blank, ';' between blanks.")
@click.option("--ordered/--unordered", default=False)
@click.option("--beam", type=int, default=None, help="Beam size (default 20).")
@click.option("--max-new-tokens", type=int, default=None)
@click.option("--candidates", type=int, default=None)
@click.option("--diversify", "diversify_k", type=int, default=0,
              help="Split the frame's LUs into this many subsets and search each.")
@click.option("--seed", type=int, default=0)
@click.option("--server", default=None, help="Run against a live service instead.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def infill_cmd(ctx, sentences, file_path, blank_opts, frames_spec, ordered, beam,
               max_new_tokens, candidates, diversify_k, seed, server, as_json):
    """Infill blanks in a story under frame constraints."""
    cfg = _config(ctx)
    beam = beam if beam is not None else cfg.beam_size
    max_new_tokens = max_new_tokens if max_new_tokens is not None else cfg.max_new_tokens
    candidates = candidates if candidates is not None else cfg.num_candidates
    if file_path:
        task_data = json.loads(Path(file_path).read_text())
        sents = task_data["sentences"]
        blanks = task_data.get("blanks", [])
        frames = task_data.get("frames", [])
    else:
        if not sentences:
            raise click.UsageError("provide --sentences or --file")
        sents = [s.strip() for s in sentences.split("|")]
        blanks = list(blank_opts) or [i for i, s in enumerate(sents) if s == "[blank]"]
        frames = _parse_frames(frames_spec)
    if not blanks:
        raise click.UsageError("no blank positions given (use --blank or [blank] cells)")
    while len(frames) < len(blanks):
        frames.append([])
    mode = "ordered" if ordered else "unordered"

    if server:
        resp = httpx.post(f"{server.rstrip('/')}/v1/infill", json={
            "sentences": sents, "blanks": blanks, "frames": frames,
            "options": {"mode": mode, "beam_size": beam,
                        "max_new_tokens": max_new_tokens, "num_candidates": candidates},
            "seed": seed,
        }, timeout=300)
        if resp.status_code != 200:
            raise click.ClickException(f"server error {resp.status_code}: {resp.text}")
        _emit_infill(resp.json()["blanks"], as_json)
        return

    rt = _runtime(ctx)
    try:
        resolved = [[rt.frame_index.resolve(f).id for f in group] for group in frames]
    except LexiconError as e:
        raise click.UsageError(str(e))
    task = InfillTask.create(sents, blanks, resolved)
    options = InfillOptions(mode=mode, beam_size=beam, max_new_tokens=max_new_tokens,
                            num_candidates=candidates)

    if diversify_k > 1:
        if len(blanks) != 1 or len(resolved[0]) == 0:
            raise click.UsageError("--diversify needs exactly one blank with frames")
        frames_objs = [rt.frame_index.resolve(f) for f in resolved[0]]
        policy = SubsetPolicy(single_k=diversify_k)
        plan = plan_subsets(frames_objs, rt.embeddings, policy, seed=seed)
        from .constraints import build_suite
        from .dataprep import masked_context

        prefix = tuple(encode(masked_context(sents, blanks) + " [sep]", rt.vocab))
        request = DecodeRequest(
            prefix=prefix,
            suite=build_suite(frames_objs, mode, rt.vocab),
            terminators=frozenset({rt.vocab.special_id("[sep]"), rt.vocab.special_id("[eos]")}),
            beam_size=beam,
            max_new_tokens=max_new_tokens,
        )
        result = decode_diversified(request, rt.scorer, plan, rt.vocab,
                                    num_candidates=candidates)
        payload = [{
            "blank": blanks[0],
            "candidates": [
                {"text": d.candidate.text, "logprob": d.candidate.logprob,
                 "score": d.candidate.score, "satisfied": list(d.candidate.satisfied),
                 "combination": d.combination}
                for d in result.candidates
            ],
            "search_failed": len(result.failed_combinations) == len(plan.combinations),
        }]
        if as_json:
            click.echo(json.dumps({"blanks": payload, "plan": plan.describe()}, indent=2))
        else:
            _emit_infill(payload, as_json)
        return

    results = infill(task, rt.frame_index, rt.vocab, rt.scorer, options)
    payload = [{
        "blank": r.blank,
        "candidates": [
            {"text": c.text, "logprob": c.logprob, "score": c.score,
             "satisfied": list(c.satisfied)}
            for c in r.candidates
        ],
        "search_failed": r.search_failed,
    } for r in results]
    _emit_infill(payload, as_json)


def _emit_infill(blanks_payload, as_json):
    if as_json:
        click.echo(json.dumps({"blanks": blanks_payload}, indent=2))
        return
    for blank in blanks_payload:
        click.echo(f"blank {blank['blank']}:")
        if blank.get("search_failed"):
            click.echo("  (search failed; partial hypotheses omitted)")
        for c in blank["candidates"]:
            sat = " ".join(c["satisfied"])
            click.echo(f"  {c['logprob']:9.3f}  {c['text']}  {('<' + sat + '>') if sat else ''}")


@main.command("eval-fidelity")
@click.option("--input", "input_path", type=click.Path(exists=True), required=True,
              help="JSONL of {text, frames}.")
@click.option("--subset-size", type=int, default=None,
              help="Evaluate against sampled target subsets of this size.")
@click.option("--seed", type=int, required=False, default=None)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def eval_fidelity(ctx, input_path, subset_size, seed, as_json):
    """Lexical frame fidelity of generated outputs."""
    rt = _runtime(ctx)
    outputs = []
    with open(input_path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                rec = json.loads(line)
                outputs.append((rec["text"], rec.get("frames", [])))
    if subset_size is not None:
        if seed is None:
            raise click.UsageError("--subset-size requires --seed (it defines the sample)")
        subsets = sample_frame_subsets([f for _, f in outputs], subset_size, seed)
        outputs = [(t, s) for (t, _), s in zip(outputs, subsets)]
    try:
        report = fidelity(outputs, rt.frame_index, rt.vocab)
    except LexiconError as e:
        raise click.UsageError(str(e))
    click.echo(report.to_json() if as_json else report.to_table())


@main.command("eval-ppl")
@click.option("--variant", type=click.Choice(["ILM", "S", "M", "A"]), default="ILM")
@click.option("--ordered/--unordered", default=False)
@click.option("--ngram", "ngram_path", type=click.Path(exists=True), default=None)
@click.option("--order", type=int, default=None, help="LM order (default 3).")
@click.option("--seed", type=int, default=0)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def eval_ppl(ctx, variant, ordered, ngram_path, order, seed, as_json):
    """Perplexity under the infill-only / +special / 5-slot maskings, for the
    one-masked and all-masked regimes."""
    rt = _runtime(ctx, ngram=ngram_path, ngram_order=order)  # None keeps config
    tables = {}
    for regime, blanks in (("one_masked", "each"), ("all_masked", "all")):
        examples = generate_examples(rt.stories, variant, Random(seed),
                                     ordered=ordered, blanks=blanks)
        tables[regime] = eval_ppl_suite(rt.scorer, examples, rt.vocab)
    if as_json:
        click.echo(json.dumps(tables, indent=2))
    else:
        click.echo(render_ppl_report(tables))


@main.command("suggest")
@click.option("--sentences", required=True, help="Pipe-separated sentences.")
@click.option("--position", type=int, required=True)
@click.option("--k", type=int, default=5)
@click.option("--server", default=None)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def suggest_cmd(ctx, sentences, position, k, server, as_json):
    """Suggest frames for a position from surrounding context."""
    sents = [s.strip() for s in sentences.split("|")]
    if server:
        resp = httpx.post(f"{server.rstrip('/')}/v1/suggest",
                          json={"sentences": sents, "position": position, "k": k},
                          timeout=60)
        if resp.status_code != 200:
            raise click.ClickException(f"server error {resp.status_code}: {resp.text}")
        data = resp.json()
        ranked = [(f["id"], f["score"]) for f in data["frames"]]
    else:
        rt = _runtime(ctx)
        left, right = neighbor_frames(rt, sents, position)
        ranked = suggest_frames(rt.suggestion, left, right, k)
    if as_json:
        click.echo(json.dumps({
            "frames": [{"id": f, "score": s} for f, s in ranked],
            "suggestion_source": SUGGESTION_SOURCE,
        }, indent=2))
    else:
        for fid, score in ranked:
            click.echo(f"{score:8.5f}  {fid}")


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    rt = _runtime(ctx, host=host, port=port)
    app = create_app(rt)
    uvicorn.run(app, host=rt.config.host, port=rt.config.port, log_level="warning")


if __name__ == "__main__":
    main()
